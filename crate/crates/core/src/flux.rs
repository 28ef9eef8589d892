//! Scalar fluxes, the quadratic entropy pair and numerical interface fluxes
//! in viscosity form.
//!
//! A numerical flux is written as `F = (f_l + f_r)/2 - Q dv/2`, where `Q` is
//! its numerical viscosity. `Q*` is the viscosity of the entropy-conservative
//! flux and `D = Q - Q*` is the extra, entropy-dissipating part.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::exec::ExecMode;

/// Relative jump below which interface quotients take their pointwise limits.
pub const DEGENERATE_REL: f64 = 1e-12;

/// Floor on `Q*` in [`cfl_max_dt`] for constant states.
pub const DEFAULT_Q_MIN: f64 = 1e-12;

// 8-point Gauss-Legendre on [0, 1]: exact for polynomials of degree <= 15.
const GL_NODES: [f64; 8] = [
    0.019855071751231856,
    0.10166676129318664,
    0.2372337950418355,
    0.4082826787521751,
    0.591717321247825,
    0.7627662049581645,
    0.8983332387068134,
    0.9801449282487681,
];
const GL_WEIGHTS: [f64; 8] = [
    0.05061426814518813,
    0.11119051722668724,
    0.15685332293894363,
    0.181341891689181,
    0.181341891689181,
    0.15685332293894363,
    0.11119051722668724,
    0.05061426814518813,
];

fn mean_over(f: fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let d = hi - lo;
    GL_NODES
        .iter()
        .zip(GL_WEIGHTS)
        .map(|(s, w)| w * f(lo + s * d))
        .sum()
}

/// User-supplied flux `f` with derivative `df`.
#[derive(Clone, Copy)]
pub struct CustomFlux {
    pub name: &'static str,
    pub f: fn(f64) -> f64,
    pub df: fn(f64) -> f64,
}

impl fmt::Debug for CustomFlux {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomFlux")
            .field("name", &self.name)
            .finish()
    }
}

#[derive(Clone, Copy, Debug)]
pub enum FluxKind {
    /// `f(u) = u^2 / 2`
    Burgers,
    /// `f(u) = speed * u`
    Advection {
        speed: f64,
    },
    Custom(CustomFlux),
}

/// A scalar conservation law `u_t + f(u)_x = 0` with the quadratic entropy
/// `U(u) = u^2 / 2`, so the entropy variable is `u` itself and the entropy
/// potential is `psi(u) = int_0^u f`.
#[derive(Clone, Copy, Debug)]
pub struct Problem {
    pub kind: FluxKind,
    /// Bound on the entropy Hessian scale; 1 for the quadratic entropy.
    pub k_const: f64,
}

impl Problem {
    pub fn burgers() -> Self {
        Self {
            kind: FluxKind::Burgers,
            k_const: 1.0,
        }
    }

    pub fn advection(speed: f64) -> Self {
        Self {
            kind: FluxKind::Advection { speed },
            k_const: 1.0,
        }
    }

    pub fn custom(flux: CustomFlux) -> Self {
        Self {
            kind: FluxKind::Custom(flux),
            k_const: 1.0,
        }
    }

    pub fn with_k(mut self, k: f64) -> Self {
        self.k_const = k;
        self
    }

    pub fn flux(&self, u: f64) -> f64 {
        match self.kind {
            FluxKind::Burgers => 0.5 * u * u,
            FluxKind::Advection { speed } => speed * u,
            FluxKind::Custom(c) => (c.f)(u),
        }
    }

    pub fn derivative(&self, u: f64) -> f64 {
        match self.kind {
            FluxKind::Burgers => u,
            FluxKind::Advection { speed } => speed,
            FluxKind::Custom(c) => (c.df)(u),
        }
    }

    pub fn entropy(&self, u: f64) -> f64 {
        0.5 * u * u
    }

    pub fn entropy_variable(&self, u: f64) -> f64 {
        u
    }

    /// `psi(u) = v(u) f(u) - g(u)`, i.e. `int_0^u f` for the quadratic entropy.
    pub fn entropy_potential(&self, u: f64) -> f64 {
        match self.kind {
            FluxKind::Burgers => u * u * u / 6.0,
            FluxKind::Advection { speed } => 0.5 * speed * u * u,
            FluxKind::Custom(c) => u * mean_over(c.f, 0.0, u),
        }
    }

    /// Entropy flux `g` with `g' = U' f'`.
    pub fn entropy_flux(&self, u: f64) -> f64 {
        self.entropy_variable(u) * self.flux(u) - self.entropy_potential(u)
    }

    fn is_degenerate(vl: f64, vr: f64) -> bool {
        (vr - vl).abs() < DEGENERATE_REL * 1f64.max(vl.abs()).max(vr.abs())
    }

    /// Tadmor's entropy-conservative flux `(psi_r - psi_l) / (v_r - v_l)`,
    /// which for the quadratic entropy is the mean of `f` over `[v_l, v_r]`.
    pub fn entropy_conservative_flux(&self, vl: f64, vr: f64) -> f64 {
        if Self::is_degenerate(vl, vr) {
            return self.flux(vl);
        }
        match self.kind {
            FluxKind::Burgers => (vl * vl + vl * vr + vr * vr) / 6.0,
            FluxKind::Advection { speed } => 0.5 * speed * (vl + vr),
            FluxKind::Custom(c) => mean_over(c.f, vl, vr),
        }
    }

    /// `Q* = (f_l + f_r - 2 F*) / dv`, using closed forms where available.
    pub fn entropy_conservative_viscosity(&self, vl: f64, vr: f64) -> f64 {
        if Self::is_degenerate(vl, vr) {
            return 0.0;
        }
        match self.kind {
            FluxKind::Burgers => (vr - vl) / 6.0,
            FluxKind::Advection { .. } => 0.0,
            FluxKind::Custom(_) => {
                let fs = self.entropy_conservative_flux(vl, vr);
                (self.flux(vl) + self.flux(vr) - 2.0 * fs) / (vr - vl)
            }
        }
    }
}

/// How the dissipative viscosity `D` is chosen at each interface.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SchemeChoice {
    /// `D = 0`
    EntropyConservative,
    /// `Q = max(|f'(v_l)|, |f'(v_r)|)`, `D = max(0, Q - Q*)`.
    Rusanov,
    /// Constant user-supplied `D >= 0`.
    FixedD(f64),
}

impl SchemeChoice {
    pub fn name(&self) -> &'static str {
        match self {
            SchemeChoice::EntropyConservative => "econs",
            SchemeChoice::Rusanov => "rusanov",
            SchemeChoice::FixedD(_) => "fixed-d",
        }
    }
}

impl FromStr for SchemeChoice {
    type Err = String;

    /// Parses the scheme name; `fixed-d` starts with `D = 0` and the caller
    /// fills in the constant.
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "econs" => Ok(SchemeChoice::EntropyConservative),
            "rusanov" => Ok(SchemeChoice::Rusanov),
            "fixed-d" => Ok(SchemeChoice::FixedD(0.0)),
            other => Err(format!(
                "unknown scheme `{other}` (expected econs, rusanov or fixed-d)"
            )),
        }
    }
}

/// Quantities at one interface between reference values `v_l`, `v_r`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InterfaceCoeff {
    pub dv: f64,
    pub b: f64,
    pub q: f64,
    pub q_star: f64,
    pub d: f64,
    /// Numerical flux.
    pub f_hat: f64,
    /// Numerical entropy flux `(v_l + v_r)/2 * F - (psi_l + psi_r)/2`.
    pub g: f64,
    /// True if the Rusanov viscosity fell below `Q*` and `D` was clipped to 0.
    pub clipped: bool,
}

pub fn interface_coeffs(
    problem: &Problem,
    vl: f64,
    vr: f64,
    scheme: SchemeChoice,
) -> Result<InterfaceCoeff> {
    if !(vl.is_finite() && vr.is_finite()) {
        return Err(Error::NonFinite {
            what: "interface state",
            index: 0,
        });
    }
    Ok(coeff_unchecked(problem, vl, vr, scheme))
}

fn coeff_unchecked(problem: &Problem, vl: f64, vr: f64, scheme: SchemeChoice) -> InterfaceCoeff {
    let dv = vr - vl;
    let fl = problem.flux(vl);
    let fr = problem.flux(vr);
    let degenerate = Problem::is_degenerate(vl, vr);
    let b = if degenerate {
        problem.derivative(vl)
    } else {
        (fr - fl) / dv
    };
    let f_star = problem.entropy_conservative_flux(vl, vr);
    let q_star = problem.entropy_conservative_viscosity(vl, vr);
    let mut clipped = false;
    let d = match scheme {
        SchemeChoice::EntropyConservative => 0.0,
        SchemeChoice::FixedD(d) => d,
        SchemeChoice::Rusanov => {
            let q = problem
                .derivative(vl)
                .abs()
                .max(problem.derivative(vr).abs());
            if q < q_star {
                clipped = true;
                0.0
            } else {
                q - q_star
            }
        }
    };
    let f_hat = match scheme {
        SchemeChoice::EntropyConservative => f_star,
        _ => f_star - 0.5 * d * dv,
    };
    let g = 0.5 * (problem.entropy_variable(vl) + problem.entropy_variable(vr)) * f_hat
        - 0.5 * (problem.entropy_potential(vl) + problem.entropy_potential(vr));
    InterfaceCoeff {
        dv,
        b,
        q: q_star + d,
        q_star,
        d,
        f_hat,
        g,
        clipped,
    }
}

/// Coefficients at every interface of a periodic reference state, in the
/// right-face convention (entry `i` sits between cells `i` and `i + 1 mod N`).
#[derive(Clone, Debug, PartialEq)]
pub struct InterfaceCoeffs {
    pub faces: Vec<InterfaceCoeff>,
}

impl InterfaceCoeffs {
    pub fn compute(problem: &Problem, scheme: SchemeChoice, v: &[f64]) -> Result<Self> {
        Self::compute_with(ExecMode::default(), problem, scheme, v)
    }

    pub fn compute_with(
        mode: ExecMode,
        problem: &Problem,
        scheme: SchemeChoice,
        v: &[f64],
    ) -> Result<Self> {
        crate::error::check_finite("interface states", v)?;
        if let SchemeChoice::FixedD(d) = scheme {
            if !(d.is_finite() && d >= 0.0) {
                return Err(Error::InvalidParam {
                    name: "fixed_d",
                    reason: format!("must be finite and >= 0, got {d}"),
                });
            }
        }
        let n = v.len();
        let faces = mode.map(n, |i| {
            coeff_unchecked(problem, v[i], v[(i + 1) % n], scheme)
        });
        Ok(Self { faces })
    }

    pub fn len(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn f_hat(&self) -> Vec<f64> {
        self.faces.iter().map(|c| c.f_hat).collect()
    }

    pub fn g(&self) -> Vec<f64> {
        self.faces.iter().map(|c| c.g).collect()
    }

    pub fn clipped(&self) -> usize {
        self.faces.iter().filter(|c| c.clipped).count()
    }

    pub fn max_q_star(&self) -> f64 {
        self.faces
            .iter()
            .map(|c| c.q_star)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `dx / (4 K^3 max Q*)`, with `max Q*` floored at `q_min`.
pub fn cfl_max_dt(problem: &Problem, coeffs: &InterfaceCoeffs, dx: f64, q_min: f64) -> f64 {
    let q = coeffs.max_q_star().max(q_min);
    dx / (4.0 * problem.k_const.powi(3) * q)
}

/// Advective bound `dx / max |f'(v_i)|` (infinite for a zero wave speed).
pub fn advective_max_dt(problem: &Problem, v: &[f64], dx: f64) -> f64 {
    let speed = v
        .iter()
        .map(|&x| problem.derivative(x).abs())
        .fold(0.0, f64::max);
    if speed > 0.0 {
        dx / speed
    } else {
        f64::INFINITY
    }
}
