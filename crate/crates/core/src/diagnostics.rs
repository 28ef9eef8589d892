//! Entropy bookkeeping for the combined mesh-motion + flux update.
//!
//! Mesh motion contributes `M_i = v_i (H_{i-1/2} - H_{i+1/2})` to the entropy
//! of cell `i`. The combined step dissipates entropy if, cell by cell,
//!
//! ```text
//! M_i <= dt/(4 dx) * { (D_l - K^3 (dt/dx) (B_l + Q*_l + D_l)^2) dv_l^2
//!                    + (D_r - K^3 (dt/dx) (B_r - Q*_r - D_r)^2) dv_r^2 }
//! ```
//!
//! where `l`, `r` are the left and right faces of the cell and all
//! coefficients are evaluated on the remapped reference state. The right-hand
//! side equals `(dt/dx) E_x - E_fe`, the flux dissipation minus the bound on
//! the forward-Euler entropy error. [`enforce_maincond`] scales the mesh
//! motion down until the condition holds everywhere.

use crate::error::{check_len, Error, Result};
use crate::field::{CellField, Frame};
use crate::flux::{InterfaceCoeff, InterfaceCoeffs, Problem, SchemeChoice};
use crate::mesh::{edge_displacements, Mesh1D};
use crate::refmap::{to_reference, ReferencePair};
use crate::remap::{h_terms, remap_u, HTerms};

/// Relative slack on the closed inequality `M_i <= rhs_i`.
pub const MAINCOND_REL_TOL: f64 = 1e-14;

pub const DEFAULT_MAX_BISECT: usize = 30;

/// `M_i = v_i (H_{i-1/2} - H_{i+1/2})` with the pre-motion entropy variables.
pub fn mesh_term(v: &CellField, h: &HTerms) -> Result<Vec<f64>> {
    v.expect_frame(Frame::Reference)?;
    check_len("mesh term", v.len(), h.len())?;
    Ok(v.values()
        .iter()
        .zip(h.divergence())
        .map(|(vi, di)| vi * di)
        .collect())
}

fn faces(coeffs: &InterfaceCoeffs, i: usize) -> (&InterfaceCoeff, &InterfaceCoeff) {
    let n = coeffs.len();
    (&coeffs.faces[(i + n - 1) % n], &coeffs.faces[i])
}

/// Right-hand side of the mesh-motion condition for every cell.
pub fn maincond_rhs(coeffs: &InterfaceCoeffs, dt: f64, dx: f64, k_const: f64) -> Vec<f64> {
    let lambda = dt / dx;
    let k3 = k_const.powi(3);
    (0..coeffs.len())
        .map(|i| {
            let (l, r) = faces(coeffs, i);
            let left = (l.d - k3 * lambda * (l.b + l.q_star + l.d).powi(2)) * l.dv * l.dv;
            let right = (r.d - k3 * lambda * (r.b - r.q_star - r.d).powi(2)) * r.dv * r.dv;
            dt / (4.0 * dx) * (left + right)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct MainCondCheck {
    pub satisfied: Vec<bool>,
    /// `min_i (rhs_i - M_i)`.
    pub worst_margin: f64,
    pub violations: usize,
}

impl MainCondCheck {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    pub fn violating_cells(&self) -> Vec<usize> {
        self.satisfied
            .iter()
            .enumerate()
            .filter_map(|(i, ok)| (!ok).then_some(i))
            .collect()
    }
}

/// Cell `i` passes iff `M_i <= rhs_i + 1e-14 * max(1, |rhs_i|)`.
pub fn check_maincond(m: &[f64], rhs: &[f64]) -> Result<MainCondCheck> {
    check_len("maincond", m.len(), rhs.len())?;
    let satisfied: Vec<bool> = m
        .iter()
        .zip(rhs)
        .map(|(&mi, &ri)| mi <= ri + MAINCOND_REL_TOL * ri.abs().max(1.0))
        .collect();
    let worst_margin = m
        .iter()
        .zip(rhs)
        .map(|(mi, ri)| ri - mi)
        .fold(f64::INFINITY, f64::min);
    let violations = satisfied.iter().filter(|ok| !**ok).count();
    Ok(MainCondCheck {
        satisfied,
        worst_margin,
        violations,
    })
}

/// Per-cell `(E_x, E_fe_bound)`:
///
/// `E_x = (D_l dv_l^2 + D_r dv_r^2) / 4` and
/// `E_fe_bound = K^3/4 (dt/dx)^2 [(B_r - Q*_r - D_r)^2 dv_r^2 + (B_l + Q*_l + D_l)^2 dv_l^2]`.
pub fn entropy_error_terms(
    coeffs: &InterfaceCoeffs,
    dt: f64,
    dx: f64,
    k_const: f64,
) -> (Vec<f64>, Vec<f64>) {
    let lambda = dt / dx;
    let k3 = k_const.powi(3);
    (0..coeffs.len())
        .map(|i| {
            let (l, r) = faces(coeffs, i);
            let e_x = 0.25 * (l.d * l.dv * l.dv + r.d * r.dv * r.dv);
            let e_fe = 0.25
                * k3
                * lambda
                * lambda
                * ((r.b - r.q_star - r.d).powi(2) * r.dv * r.dv
                    + (l.b + l.q_star + l.d).powi(2) * l.dv * l.dv);
            (e_x, e_fe)
        })
        .unzip()
}

/// `U(v_new) - U(v_old) + (dt/dx) (G_{i+1/2} - G_{i-1/2})`; `g` is in the
/// right-face convention.
pub fn entropy_residual(
    problem: &Problem,
    v_old: &[f64],
    v_new: &[f64],
    g: &[f64],
    dt: f64,
    dx: f64,
) -> Result<Vec<f64>> {
    let n = v_old.len();
    check_len("entropy residual (new state)", n, v_new.len())?;
    check_len("entropy residual (entropy flux)", n, g.len())?;
    let lambda = dt / dx;
    Ok((0..n)
        .map(|i| {
            problem.entropy(v_new[i]) - problem.entropy(v_old[i])
                + lambda * (g[i] - g[(i + n - 1) % n])
        })
        .collect())
}

/// Total entropy `sum(dx * U(v_i))` of a reference state.
pub fn total_entropy(problem: &Problem, reference: &ReferencePair) -> f64 {
    reference
        .v
        .values()
        .iter()
        .map(|&v| reference.dx * problem.entropy(v))
        .sum()
}

/// Largest `dt` for which every face satisfies
/// `K^3 (dt/dx) (B +- (Q* + D))^2 <= D`, which makes every term of
/// [`maincond_rhs`] non-negative. Faces with `dv = 0` contribute nothing and
/// are skipped; faces with `D <= 0` cannot be fixed by any `dt > 0` and are
/// skipped too (the condition is then infeasible there whatever `dt`).
pub fn entropy_stable_max_dt(problem: &Problem, coeffs: &InterfaceCoeffs, dx: f64) -> f64 {
    let k3 = problem.k_const.powi(3);
    coeffs
        .faces
        .iter()
        .filter(|c| c.dv != 0.0 && c.d > 0.0)
        .map(|c| {
            let m = (c.b + c.q_star + c.d)
                .abs()
                .max((c.b - c.q_star - c.d).abs());
            if m > 0.0 {
                dx * c.d / (k3 * m * m)
            } else {
                f64::INFINITY
            }
        })
        .fold(f64::INFINITY, f64::min)
}

/// Range `[lo, hi]` of extra viscosities `D >= 0` for which both face terms
/// of the mesh-motion bound are non-negative, i.e. `c D >= (k + D)^2` for
/// `k = Q* + B` and `k = Q* - B`, where `c = dx / (K^3 dt)`.
///
/// Each inequality is the quadratic `D^2 + (2k - c) D + k^2 <= 0`, which has
/// real roots iff `k <= 0` or `c >= 4k`. `None` when no admissible `D` exists.
pub fn viscosity_window(b: f64, q_star: f64, c: f64) -> Option<(f64, f64)> {
    let roots = |k: f64| -> Option<(f64, f64)> {
        let disc = c * c - 4.0 * k * c;
        if disc < 0.0 {
            return None;
        }
        let s = disc.sqrt();
        let mid = c - 2.0 * k;
        // the smaller root via the product k^2 to avoid cancellation
        let hi = 0.5 * (mid + s);
        let lo = if hi > 0.0 { k * k / hi } else { 0.0 };
        Some((lo, hi))
    };
    let (a_lo, a_hi) = roots(q_star + b)?;
    let (b_lo, b_hi) = roots(q_star - b)?;
    let lo = a_lo.max(b_lo).max(0.0);
    let hi = a_hi.min(b_hi);
    (lo <= hi).then_some((lo, hi))
}

/// Everything the entropy analysis needs about one candidate mesh motion.
#[derive(Clone, Debug)]
pub struct MotionEval {
    pub mesh: Mesh1D,
    pub displacements: Vec<f64>,
    pub h: HTerms,
    /// Remapped physical state on `mesh`.
    pub u_hat: CellField,
    /// Its reference counterpart `v^`.
    pub v_hat: ReferencePair,
    pub coeffs: InterfaceCoeffs,
    pub m: Vec<f64>,
    pub rhs: Vec<f64>,
    pub check: MainCondCheck,
}

/// Remaps `u` from `old_mesh` to `new_mesh` and evaluates the mesh-motion
/// condition for a time step `dt`. Coefficients are taken on the remapped
/// reference state; `M` uses the pre-motion reference values `reference`.
pub fn evaluate_motion(
    old_mesh: &Mesh1D,
    new_mesh: &Mesh1D,
    u: &CellField,
    reference: &ReferencePair,
    problem: &Problem,
    scheme: SchemeChoice,
    dt: f64,
) -> Result<MotionEval> {
    let displacements = edge_displacements(old_mesh, new_mesh)?;
    let h = h_terms(&reference.v, old_mesh, &displacements)?;
    let u_hat = remap_u(old_mesh, new_mesh, u)?;
    let v_hat = to_reference(new_mesh, &u_hat)?;
    let coeffs = InterfaceCoeffs::compute(problem, scheme, v_hat.v.values())?;
    let m = mesh_term(&reference.v, &h)?;
    let rhs = maincond_rhs(&coeffs, dt, reference.dx, problem.k_const);
    let check = check_maincond(&m, &rhs)?;
    Ok(MotionEval {
        mesh: new_mesh.clone(),
        displacements,
        h,
        u_hat,
        v_hat,
        coeffs,
        m,
        rhs,
        check,
    })
}

#[derive(Clone, Debug)]
pub struct Enforcement {
    pub theta: f64,
    pub eval: MotionEval,
}

/// Shrinks the motion `old -> candidate` to `x_old + theta (x_cand - x_old)`
/// with the largest `theta` in `{1, 1/2, 1/4, ...}` (at most `max_bisect`
/// halvings, then `theta = 0`) for which the mesh-motion condition holds in
/// every cell.
#[allow(clippy::too_many_arguments)]
pub fn enforce_maincond(
    old_mesh: &Mesh1D,
    candidate: &Mesh1D,
    u: &CellField,
    reference: &ReferencePair,
    problem: &Problem,
    scheme: SchemeChoice,
    dt: f64,
    max_bisect: usize,
) -> Result<Enforcement> {
    let mut theta = 1.0;
    for _ in 0..=max_bisect {
        let mesh = Mesh1D::blend(old_mesh, candidate, theta)?;
        let eval = evaluate_motion(old_mesh, &mesh, u, reference, problem, scheme, dt)?;
        if eval.check.passed() {
            return Ok(Enforcement { theta, eval });
        }
        theta *= 0.5;
    }
    let eval = evaluate_motion(old_mesh, old_mesh, u, reference, problem, scheme, dt)?;
    if eval.check.passed() {
        return Ok(Enforcement { theta: 0.0, eval });
    }
    Err(Error::Infeasible {
        cells: eval.check.violating_cells(),
    })
}

/// Per-step diagnostics of one adaptive step.
#[derive(Clone, Debug, PartialEq)]
pub struct StepReport {
    /// Index of the step that produced this report (the first step is 1).
    pub step: usize,
    /// Time after the step.
    pub t: f64,
    pub dt: f64,
    /// Fraction of the proposed mesh motion that was applied.
    pub theta: f64,
    pub m: Vec<f64>,
    pub maincond_rhs: Vec<f64>,
    /// `rhs_i - M_i`.
    pub margin: Vec<f64>,
    pub entropy_residual: Vec<f64>,
    pub e_x: Vec<f64>,
    pub e_fe_bound: Vec<f64>,
    /// `residual_i - M_i + (dt/dx) E_x_i - E_fe_bound_i`; non-positive when the
    /// cell entropy inequality chain holds.
    pub chain_excess: Vec<f64>,
    /// Physical mass `sum(h_i u_i)` after the step.
    pub total_mass: f64,
    /// `sum(dx U(v_i))` before and after the step.
    pub entropy_before: f64,
    pub total_entropy: f64,
    pub violations: usize,
    pub worst_margin: f64,
    /// Interfaces where the Rusanov viscosity fell below `Q*`.
    pub clipped_faces: usize,
    /// `max_i |dx v_i - h_i u_i|` of the new state.
    pub gcl_max: f64,
}

impl StepReport {
    /// Scale used for the chain tolerance in cell `i`.
    pub fn chain_scale(&self, i: usize, lambda: f64) -> f64 {
        1f64.max(self.entropy_residual[i].abs())
            .max(self.m[i].abs())
            .max((lambda * self.e_x[i]).abs())
            .max(self.e_fe_bound[i].abs())
    }
}
