//! Time evolution: the finite volume update on the adapted mesh, the same
//! update written over the reference mesh, and the three-stage adaptive step.

use crate::diagnostics::{
    enforce_maincond, entropy_error_terms, entropy_residual, entropy_stable_max_dt,
    evaluate_motion, total_entropy, MotionEval, StepReport, DEFAULT_MAX_BISECT,
};
use crate::error::{check_len, Error, Result};
use crate::field::{CellField, Frame};
use crate::flux::{
    advective_max_dt, cfl_max_dt, InterfaceCoeffs, Problem, SchemeChoice, DEFAULT_Q_MIN,
};
use crate::mesh::{reconstruct_mesh, AdaptParams, Mesh1D};
use crate::refmap::{gcl_residual, to_reference, ReferencePair};
use crate::remap::{remap_u, HTerms};

/// Relative slack when comparing a time step against its bounds.
const DT_SLACK: f64 = 1e-12;

/// Step-size bounds evaluated on one reference state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeStepLimits {
    /// `dx / (4 K^3 max Q*)`.
    pub viscosity: f64,
    /// `dx / max |f'(v)|`.
    pub advective: f64,
    /// Largest `dt` keeping every mesh-motion bound term non-negative.
    pub entropy_stable: f64,
}

impl TimeStepLimits {
    pub fn evaluate(
        problem: &Problem,
        coeffs: &InterfaceCoeffs,
        v: &[f64],
        dx: f64,
        q_min: f64,
    ) -> Self {
        Self {
            viscosity: cfl_max_dt(problem, coeffs, dx, q_min),
            advective: advective_max_dt(problem, v, dx),
            entropy_stable: entropy_stable_max_dt(problem, coeffs, dx),
        }
    }

    /// Rejects `dt` above the viscosity or advective bound.
    pub fn check(&self, dt: f64) -> Result<()> {
        if !(dt.is_finite() && dt >= 0.0) {
            return Err(Error::InvalidParam {
                name: "dt",
                reason: format!("must be finite and >= 0, got {dt}"),
            });
        }
        for (bound, limit) in [
            ("viscosity CFL", self.viscosity),
            ("advective CFL", self.advective),
        ] {
            if dt > limit * (1.0 + DT_SLACK) {
                return Err(Error::Cfl { dt, limit, bound });
            }
        }
        Ok(())
    }

    fn min(self, other: Self) -> Self {
        Self {
            viscosity: self.viscosity.min(other.viscosity),
            advective: self.advective.min(other.advective),
            entropy_stable: self.entropy_stable.min(other.entropy_stable),
        }
    }
}

/// `dt = cfl_target * min(viscosity, advective)`, further capped by the
/// entropy-stable bound when `entropy_bound` is set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DtPolicy {
    pub cfl_target: f64,
    pub entropy_bound: bool,
    pub q_min: f64,
}

impl Default for DtPolicy {
    fn default() -> Self {
        Self {
            cfl_target: 0.4,
            entropy_bound: false,
            q_min: DEFAULT_Q_MIN,
        }
    }
}

impl DtPolicy {
    pub fn select(&self, limits: &TimeStepLimits) -> f64 {
        let dt = self.cfl_target * limits.viscosity.min(limits.advective);
        if self.entropy_bound {
            dt.min(limits.entropy_stable)
        } else {
            dt
        }
    }
}

/// `u_i = u^_i - dt / h_i (F_{i+1/2} - F_{i-1/2})` on the new mesh.
pub fn step_nonuniform(
    new_mesh: &Mesh1D,
    u_hat: &CellField,
    coeffs: &InterfaceCoeffs,
    dt: f64,
    limits: &TimeStepLimits,
) -> Result<CellField> {
    u_hat.expect_frame(Frame::Physical)?;
    let n = new_mesh.n_cells();
    check_len("nonuniform step field", n, u_hat.len())?;
    check_len("nonuniform step coefficients", n, coeffs.len())?;
    limits.check(dt)?;
    let f = coeffs.f_hat();
    let out = (0..n)
        .map(|i| u_hat[i] - dt / new_mesh.width(i) * (f[i] - f[(i + n - 1) % n]))
        .collect();
    Ok(CellField::from_raw(out, Frame::Physical))
}

/// The combined update over the reference mesh,
/// `v_i' = v_i - (dt/dx) [(dx/dt) H_{i+1/2} + F_{i+1/2} - (dx/dt) H_{i-1/2} - F_{i-1/2}]`,
/// evaluated as `v_i - (H_{i+1/2} - H_{i-1/2}) - (dt/dx) (F_{i+1/2} - F_{i-1/2})`
/// so that `dt = 0` is allowed.
pub fn step_uniform_combined(
    v: &CellField,
    h: &HTerms,
    coeffs: &InterfaceCoeffs,
    dt: f64,
    dx: f64,
    limits: &TimeStepLimits,
) -> Result<CellField> {
    v.expect_frame(Frame::Reference)?;
    let n = v.len();
    check_len("combined step h-terms", n, h.len())?;
    check_len("combined step coefficients", n, coeffs.len())?;
    limits.check(dt)?;
    let lambda = dt / dx;
    let f = coeffs.f_hat();
    let hv = h.values();
    let out = (0..n)
        .map(|i| {
            let l = (i + n - 1) % n;
            v[i] - (hv[i] - hv[l]) - lambda * (f[i] - f[l])
        })
        .collect();
    Ok(CellField::from_raw(out, Frame::Reference))
}

/// `F_{i+1/2} - F_{i-1/2}` reassembled from the viscosity-form coefficients:
/// `((B - Q) dv)_{i+1/2} / 2 + ((B + Q) dv)_{i-1/2} / 2`.
pub fn incremental_flux_difference(coeffs: &InterfaceCoeffs) -> Vec<f64> {
    let n = coeffs.len();
    (0..n)
        .map(|i| {
            let r = &coeffs.faces[i];
            let l = &coeffs.faces[(i + n - 1) % n];
            0.5 * ((r.b - r.q) * r.dv + (l.b + l.q) * l.dv)
        })
        .collect()
}

/// Adaptive mesh-solution pair together with its reference pair.
#[derive(Clone, Debug, PartialEq)]
pub struct MasState {
    pub t: f64,
    pub step: usize,
    pub mesh: Mesh1D,
    pub u: CellField,
    pub reference: ReferencePair,
}

impl MasState {
    pub fn new(mesh: Mesh1D, u: CellField) -> Result<Self> {
        let reference = to_reference(&mesh, &u)?;
        Ok(Self {
            t: 0.0,
            step: 0,
            mesh,
            u,
            reference,
        })
    }

    /// `sum(h_i u_i)`.
    pub fn mass(&self) -> f64 {
        self.mesh
            .widths()
            .iter()
            .zip(self.u.values())
            .map(|(h, u)| h * u)
            .sum()
    }

    pub fn entropy(&self, problem: &Problem) -> f64 {
        total_entropy(problem, &self.reference)
    }
}

/// Settings of one adaptive step.
#[derive(Clone, Copy, Debug)]
pub struct MasConfig {
    pub problem: Problem,
    pub scheme: SchemeChoice,
    /// `None` disables mesh reconstruction (a plain finite volume step).
    pub adapt: Option<AdaptParams>,
    pub enforce_maincond: bool,
    pub max_bisect: usize,
    pub dt_policy: DtPolicy,
}

impl MasConfig {
    pub fn new(problem: Problem, scheme: SchemeChoice) -> Self {
        Self {
            problem,
            scheme,
            adapt: None,
            enforce_maincond: false,
            max_bisect: DEFAULT_MAX_BISECT,
            dt_policy: DtPolicy::default(),
        }
    }
}

/// One adaptive step: redistribute the mesh, remap the solution, evolve.
///
/// `dt` is chosen by the policy on both the current state and the remapped
/// state of the proposed mesh, then capped by `max_dt`. With enforcement on,
/// the proposed motion is scaled back until the mesh-motion entropy
/// condition holds in every cell. The input state is not modified.
pub fn mas_step(state: &MasState, cfg: &MasConfig, max_dt: f64) -> Result<(MasState, StepReport)> {
    let problem = &cfg.problem;
    let dx = state.reference.dx;
    let q_min = cfg.dt_policy.q_min;

    let candidate = match &cfg.adapt {
        Some(params) => reconstruct_mesh(&state.mesh, &state.u, params)?,
        None => state.mesh.clone(),
    };

    let v = state.reference.v.values();
    let c_now = InterfaceCoeffs::compute(problem, cfg.scheme, v)?;
    let mut limits = TimeStepLimits::evaluate(problem, &c_now, v, dx, q_min);
    if candidate != state.mesh {
        let u_cand = remap_u(&state.mesh, &candidate, &state.u)?;
        let v_cand = to_reference(&candidate, &u_cand)?;
        let c_cand = InterfaceCoeffs::compute(problem, cfg.scheme, v_cand.v.values())?;
        limits = limits.min(TimeStepLimits::evaluate(
            problem,
            &c_cand,
            v_cand.v.values(),
            dx,
            q_min,
        ));
    }
    let dt = cfg.dt_policy.select(&limits).min(max_dt);

    let (theta, eval): (f64, MotionEval) = if cfg.enforce_maincond {
        let e = enforce_maincond(
            &state.mesh,
            &candidate,
            &state.u,
            &state.reference,
            problem,
            cfg.scheme,
            dt,
            cfg.max_bisect,
        )?;
        (e.theta, e.eval)
    } else {
        let eval = evaluate_motion(
            &state.mesh,
            &candidate,
            &state.u,
            &state.reference,
            problem,
            cfg.scheme,
            dt,
        )?;
        (1.0, eval)
    };

    let step_limits =
        TimeStepLimits::evaluate(problem, &eval.coeffs, eval.v_hat.v.values(), dx, q_min);
    let u_new = step_nonuniform(&eval.mesh, &eval.u_hat, &eval.coeffs, dt, &step_limits)?;
    let reference = to_reference(&eval.mesh, &u_new)?;

    let residual = entropy_residual(problem, v, reference.v.values(), &eval.coeffs.g(), dt, dx)?;
    let (e_x, e_fe_bound) = entropy_error_terms(&eval.coeffs, dt, dx, problem.k_const);
    let lambda = dt / dx;
    let chain_excess = (0..residual.len())
        .map(|i| residual[i] - eval.m[i] + lambda * e_x[i] - e_fe_bound[i])
        .collect();
    let margin = eval.rhs.iter().zip(&eval.m).map(|(r, m)| r - m).collect();
    let gcl_max = gcl_residual(&eval.mesh, &u_new, &reference)?
        .iter()
        .fold(0.0, |acc: f64, x| acc.max(x.abs()));

    let next = MasState {
        t: state.t + dt,
        step: state.step + 1,
        mesh: eval.mesh,
        u: u_new,
        reference,
    };
    let report = StepReport {
        step: next.step,
        t: next.t,
        dt,
        theta,
        total_mass: next.mass(),
        entropy_before: state.entropy(problem),
        total_entropy: next.entropy(problem),
        violations: eval.check.violations,
        worst_margin: eval.check.worst_margin,
        clipped_faces: eval.coeffs.clipped(),
        m: eval.m,
        maincond_rhs: eval.rhs,
        margin,
        entropy_residual: residual,
        e_x,
        e_fe_bound,
        chain_excess,
        gcl_max,
    };
    Ok((next, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn open_limits() -> TimeStepLimits {
        TimeStepLimits {
            viscosity: f64::INFINITY,
            advective: f64::INFINITY,
            entropy_stable: f64::INFINITY,
        }
    }

    #[test]
    fn constant_state_is_stationary() {
        let p = Problem::burgers();
        let m = Mesh1D::from_interfaces(vec![0.0, 0.3, 0.45, 0.8, 1.0]).unwrap();
        let u = CellField::physical(vec![1.5; 4]).unwrap();
        let c = InterfaceCoeffs::compute(&p, SchemeChoice::Rusanov, &[1.5; 4]).unwrap();
        let out = step_nonuniform(&m, &u, &c, 0.01, &open_limits()).unwrap();
        assert_eq!(out, u);
        let out0 = step_nonuniform(&m, &u, &c, 0.0, &open_limits()).unwrap();
        assert_eq!(out0, u);
    }

    #[test]
    fn hand_evaluated_burgers_step() {
        // uniform N = 4, dx = 1/4, dt = 0.05, econs flux F* = (l^2 + l r + r^2)/6
        let p = Problem::burgers();
        let m = Mesh1D::uniform(0.0, 1.0, 4).unwrap();
        let u = [0.0, 1.0, 0.0, -1.0];
        let c = InterfaceCoeffs::compute(&p, SchemeChoice::EntropyConservative, &u).unwrap();
        // faces: (0,1) 1/6, (1,0) 1/6, (0,-1) 1/6, (-1,0) 1/6
        for f in c.f_hat() {
            assert!((f - 1.0 / 6.0).abs() < 1e-15);
        }
        let out = step_nonuniform(
            &m,
            &CellField::physical(u.to_vec()).unwrap(),
            &c,
            0.05,
            &open_limits(),
        )
        .unwrap();
        for (a, b) in out.values().iter().zip(u) {
            assert!((a - b).abs() < 1e-15);
        }
        // a non-symmetric state: u = (2, 0, 1, 0)
        let u = [2.0, 0.0, 1.0, 0.0];
        let c = InterfaceCoeffs::compute(&p, SchemeChoice::EntropyConservative, &u).unwrap();
        let fs = [4.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0, 4.0 / 6.0];
        let lambda = 0.05 / 0.25;
        let want = [
            2.0 - lambda * (fs[0] - fs[3]),
            0.0 - lambda * (fs[1] - fs[0]),
            1.0 - lambda * (fs[2] - fs[1]),
            0.0 - lambda * (fs[3] - fs[2]),
        ];
        let out = step_nonuniform(
            &m,
            &CellField::physical(u.to_vec()).unwrap(),
            &c,
            0.05,
            &open_limits(),
        )
        .unwrap();
        for (a, b) in out.values().iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn cfl_violation_is_an_error() {
        let p = Problem::burgers();
        let m = Mesh1D::uniform(0.0, 1.0, 4).unwrap();
        let u = [0.0, 2.0, 0.0, 0.0];
        let c = InterfaceCoeffs::compute(&p, SchemeChoice::Rusanov, &u).unwrap();
        let limits = TimeStepLimits::evaluate(&p, &c, &u, 0.25, DEFAULT_Q_MIN);
        assert_eq!(limits.advective, 0.125);
        let err = step_nonuniform(
            &m,
            &CellField::physical(u.to_vec()).unwrap(),
            &c,
            0.2,
            &limits,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Cfl { .. }), "{err}");
        assert!(step_nonuniform(
            &m,
            &CellField::physical(u.to_vec()).unwrap(),
            &c,
            0.1,
            &limits
        )
        .is_ok());
    }

    #[test]
    fn combined_step_reduces_to_uniform_scheme_and_pure_remap() {
        let p = Problem::burgers();
        let v = CellField::reference(vec![0.2, 1.0, -0.4, 0.7, 0.0]).unwrap();
        let c = InterfaceCoeffs::compute(&p, SchemeChoice::Rusanov, v.values()).unwrap();
        let zero = HTerms(vec![0.0; 5]);
        let out = step_uniform_combined(&v, &zero, &c, 0.02, 0.2, &open_limits()).unwrap();
        let f = c.f_hat();
        for i in 0..5 {
            let want = v[i] - 0.1 * (f[i] - f[(i + 4) % 5]);
            assert!((out[i] - want).abs() < 1e-15);
        }
        let zero_flux = Problem::advection(0.0);
        let c0 =
            InterfaceCoeffs::compute(&zero_flux, SchemeChoice::EntropyConservative, v.values())
                .unwrap();
        let h = HTerms(vec![0.1, -0.05, 0.0, 0.2, 0.03]);
        let out = step_uniform_combined(&v, &h, &c0, 0.37, 0.2, &open_limits()).unwrap();
        let div = h.divergence();
        for i in 0..5 {
            assert!((out[i] - (v[i] + div[i])).abs() < 1e-15);
        }
    }

    #[test]
    fn incremental_form_matches_flux_difference() {
        let p = Problem::burgers();
        let v = [0.1, 1.3, -0.6, 0.6, 0.6, 2.0, -1.0];
        for scheme in [
            SchemeChoice::EntropyConservative,
            SchemeChoice::Rusanov,
            SchemeChoice::FixedD(0.4),
        ] {
            let c = InterfaceCoeffs::compute(&p, scheme, &v).unwrap();
            let inc = incremental_flux_difference(&c);
            let f = c.f_hat();
            for i in 0..v.len() {
                assert!((inc[i] - (f[i] - f[(i + v.len() - 1) % v.len()])).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn constant_state_mas_step() {
        let mut cfg = MasConfig::new(Problem::burgers(), SchemeChoice::Rusanov);
        cfg.adapt = Some(AdaptParams {
            alpha: 1.0,
            ..Default::default()
        });
        cfg.enforce_maincond = true;
        cfg.dt_policy.entropy_bound = true;
        let m = Mesh1D::uniform(0.0, 1.0, 12).unwrap();
        let s = MasState::new(m, CellField::physical(vec![0.5; 12]).unwrap()).unwrap();
        let (next, report) = mas_step(&s, &cfg, f64::INFINITY).unwrap();
        assert_eq!(next.mesh, s.mesh);
        // widths of the uniform mesh differ from dx in the last bit
        for (a, b) in next.u.values().iter().zip(s.u.values()) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(next.t > 0.0);
        assert_eq!(report.theta, 1.0);
        assert_eq!(report.violations, 0);
    }
}
