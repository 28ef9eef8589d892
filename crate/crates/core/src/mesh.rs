//! Non-uniform 1D meshes and curvature-driven mesh redistribution.
//!
//! A mesh over `[a, b]` with `N` cells is stored as its `N + 1` interface
//! positions. Cell `i` spans `[x_i, x_{i+1}]`; the interface at index `j`
//! sits between cells `j - 1` and `j`. The domain is periodic, so interfaces
//! `0` and `N` are the same physical point and never move.

use crate::error::{check_finite, check_len, Error, Result};
use crate::field::{CellField, Frame};

/// Relative roundoff allowed between `sum(h_i)` and `b - a`.
const LENGTH_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct Mesh1D {
    interfaces: Vec<f64>,
    widths: Vec<f64>,
}

impl Mesh1D {
    /// Builds a mesh from `N + 1` strictly increasing interface positions.
    pub fn from_interfaces(interfaces: Vec<f64>) -> Result<Self> {
        if interfaces.len() < 2 {
            return Err(Error::InvalidMesh(format!(
                "need at least 2 interfaces, got {}",
                interfaces.len()
            )));
        }
        check_finite("mesh interfaces", &interfaces)?;
        let widths: Vec<f64> = interfaces.windows(2).map(|w| w[1] - w[0]).collect();
        if let Some(i) = widths.iter().position(|&h| h <= 0.0) {
            return Err(Error::InvalidMesh(format!(
                "cell {i} has non-positive width {:e}",
                widths[i]
            )));
        }
        let length = interfaces[interfaces.len() - 1] - interfaces[0];
        let total: f64 = widths.iter().sum();
        if (total - length).abs() > LENGTH_TOL * length {
            return Err(Error::InvalidMesh(format!(
                "cell widths sum to {total}, domain length is {length}"
            )));
        }
        Ok(Self { interfaces, widths })
    }

    pub fn uniform(a: f64, b: f64, n_cells: usize) -> Result<Self> {
        if n_cells == 0 {
            return Err(Error::InvalidMesh("zero cells".into()));
        }
        if !(a.is_finite() && b.is_finite() && b > a) {
            return Err(Error::InvalidMesh(format!("bad domain [{a}, {b}]")));
        }
        Self::from_interfaces(uniform_interfaces(a, b, n_cells))
    }

    pub fn n_cells(&self) -> usize {
        self.widths.len()
    }

    pub fn interfaces(&self) -> &[f64] {
        &self.interfaces
    }

    pub fn widths(&self) -> &[f64] {
        &self.widths
    }

    pub fn width(&self, i: usize) -> f64 {
        self.widths[i]
    }

    pub fn left(&self) -> f64 {
        self.interfaces[0]
    }

    pub fn right(&self) -> f64 {
        self.interfaces[self.interfaces.len() - 1]
    }

    pub fn length(&self) -> f64 {
        self.right() - self.left()
    }

    /// Width of the uniform mesh with the same domain and cardinality.
    pub fn reference_width(&self) -> f64 {
        self.length() / self.n_cells() as f64
    }

    pub fn center(&self, i: usize) -> f64 {
        0.5 * (self.interfaces[i] + self.interfaces[i + 1])
    }

    pub fn min_width(&self) -> f64 {
        self.widths.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `x_old + theta * (x_target - x_old)`; `theta` in `[0, 1]`.
    ///
    /// `theta = 0` and `theta = 1` return the end meshes exactly.
    pub fn blend(old: &Mesh1D, target: &Mesh1D, theta: f64) -> Result<Mesh1D> {
        same_shape(old, target)?;
        if theta == 0.0 {
            return Ok(old.clone());
        }
        if theta == 1.0 {
            return Ok(target.clone());
        }
        let x = old
            .interfaces
            .iter()
            .zip(&target.interfaces)
            .map(|(&xo, &xt)| xo + theta * (xt - xo))
            .collect();
        Mesh1D::from_interfaces(x)
    }
}

fn uniform_interfaces(a: f64, b: f64, n: usize) -> Vec<f64> {
    let len = b - a;
    let mut x: Vec<f64> = (0..=n).map(|j| a + len * (j as f64 / n as f64)).collect();
    x[n] = b;
    x
}

fn same_shape(a: &Mesh1D, b: &Mesh1D) -> Result<()> {
    check_len("mesh interfaces", a.interfaces.len(), b.interfaces.len())?;
    if a.left() != b.left() || a.right() != b.right() {
        return Err(Error::InvalidMesh(format!(
            "endpoint mismatch: [{}, {}] vs [{}, {}]",
            a.left(),
            a.right(),
            b.left(),
            b.right()
        )));
    }
    Ok(())
}

/// Mesh redistribution controls.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdaptParams {
    /// Monitor strength; `0` disables the curvature term.
    pub alpha: f64,
    pub smoothing_passes: usize,
    /// Number of equidistribution passes, each recomputing the monitor.
    pub equidist_iters: usize,
    /// Interior displacements are capped at `beta * min(h_left, h_right)`.
    pub beta: f64,
}

impl Default for AdaptParams {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            smoothing_passes: 2,
            equidist_iters: 3,
            beta: 0.4,
        }
    }
}

impl AdaptParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::InvalidParam {
                name: "alpha",
                reason: format!("must be finite and >= 0, got {}", self.alpha),
            });
        }
        if self.equidist_iters < 1 {
            return Err(Error::InvalidParam {
                name: "equidist_iters",
                reason: "must be >= 1".into(),
            });
        }
        // beta <= 1/2 keeps every new cell inside its old neighbours
        if !(self.beta > 0.0 && self.beta <= 0.5) {
            return Err(Error::InvalidParam {
                name: "beta",
                reason: format!("must lie in (0, 0.5], got {}", self.beta),
            });
        }
        Ok(())
    }
}

/// Per-interface monitor weights `w_j = 1 + alpha * |kappa_j|`, smoothed.
///
/// `kappa_j` averages the non-uniform second divided differences
/// `2 (s_{i+1} - s_i) / (c_{i+1} - c_{i-1})` of the two cells adjacent to
/// interface `j`, where `s` are slopes between neighbouring cell centres.
/// Returns `N + 1` weights with `w[0] == w[N]`.
pub fn compute_monitor(u: &CellField, mesh: &Mesh1D, params: &AdaptParams) -> Result<Vec<f64>> {
    let n = mesh.n_cells();
    check_len("monitor field", n, u.len())?;
    check_finite("monitor field", u.values())?;
    if n < 3 {
        return Err(Error::InvalidMesh(format!(
            "monitor needs at least 3 cells, got {n}"
        )));
    }
    let u = u.values();
    let len = mesh.length();
    let centers: Vec<f64> = (0..n).map(|i| mesh.center(i)).collect();
    // distance between centre i-1 and centre i across the periodic seam
    let gap = |i: usize| {
        if i == 0 {
            centers[0] - centers[n - 1] + len
        } else {
            centers[i] - centers[i - 1]
        }
    };
    // slope[j]: between cells j-1 and j, j = 0..n (slope[n] == slope[0])
    let slope: Vec<f64> = (0..n)
        .map(|j| (u[j] - u[(j + n - 1) % n]) / gap(j))
        .collect();
    let curvature: Vec<f64> = (0..n)
        .map(|i| {
            let right = slope[(i + 1) % n];
            let span = gap(i) + gap((i + 1) % n);
            2.0 * (right - slope[i]) / span
        })
        .collect();

    let mut w: Vec<f64> = (0..n)
        .map(|j| {
            let k = 0.5 * (curvature[(j + n - 1) % n] + curvature[j]);
            1.0 + params.alpha * k.abs()
        })
        .collect();
    for _ in 0..params.smoothing_passes {
        w = (0..n)
            .map(|j| 0.25 * (w[(j + n - 1) % n] + 2.0 * w[j] + w[(j + 1) % n]))
            .collect();
    }
    w.push(w[0]);
    Ok(w)
}

/// Interior interfaces that equidistribute the cumulative monitor.
///
/// The cell monitor is the mean of its two interface weights, so the
/// cumulative monitor is piecewise linear in `x` and is inverted exactly.
fn equidistribute(mesh: &Mesh1D, w: &[f64]) -> Vec<f64> {
    let n = mesh.n_cells();
    if w.iter().all(|&wj| wj == w[0]) {
        return uniform_interfaces(mesh.left(), mesh.right(), n);
    }
    let x = mesh.interfaces();
    let cell_w: Vec<f64> = (0..n).map(|i| 0.5 * (w[i] + w[i + 1])).collect();
    let mut cumulative = Vec::with_capacity(n + 1);
    cumulative.push(0.0);
    for i in 0..n {
        cumulative.push(cumulative[i] + cell_w[i] * mesh.width(i));
    }
    let total = cumulative[n];

    let mut out = Vec::with_capacity(n + 1);
    out.push(mesh.left());
    let mut k = 0;
    for j in 1..n {
        let target = total * (j as f64 / n as f64);
        while k + 1 < n && cumulative[k + 1] <= target {
            k += 1;
        }
        let xj = x[k] + (target - cumulative[k]) / cell_w[k];
        out.push(xj.clamp(x[k], x[k + 1]));
    }
    out.push(mesh.right());
    out
}

/// Cell averages of the piecewise-constant `values` on `src` over the cells
/// of `dst`, by exact overlap integration.
pub fn average_onto(src: &Mesh1D, values: &[f64], dst: &Mesh1D) -> Result<Vec<f64>> {
    check_len("projected field", src.n_cells(), values.len())?;
    same_shape(src, dst)?;
    let xs = src.interfaces();
    let xd = dst.interfaces();
    let mut out = Vec::with_capacity(dst.n_cells());
    let mut k = 0;
    for i in 0..dst.n_cells() {
        let (lo, hi) = (xd[i], xd[i + 1]);
        while k + 1 < src.n_cells() && xs[k + 1] <= lo {
            k += 1;
        }
        let mut mass = 0.0;
        let mut m = k;
        while m < src.n_cells() && xs[m] < hi {
            let overlap = xs[m + 1].min(hi) - xs[m].max(lo);
            if overlap > 0.0 {
                mass += overlap * values[m];
            }
            m += 1;
        }
        out.push(mass / (hi - lo));
    }
    Ok(out)
}

/// Clamps each interior displacement to `beta * min(h_left, h_right)` of the
/// old mesh. Endpoints stay at the old positions.
fn cap_displacements(old: &Mesh1D, candidate: &[f64], beta: f64) -> Vec<f64> {
    let x = old.interfaces();
    let n = old.n_cells();
    let mut out = x.to_vec();
    for j in 1..n {
        let limit = beta * old.width(j - 1).min(old.width(j));
        let d = (candidate[j] - x[j]).clamp(-limit, limit);
        out[j] = x[j] + d;
    }
    out
}

/// Redistributes the mesh nodes toward regions of high solution curvature.
///
/// Runs `equidist_iters` equidistribution passes (the monitor of each pass is
/// evaluated on the previous candidate, with `u` projected onto it), then
/// caps the interior displacements relative to `mesh`. Node count and
/// endpoints are preserved.
pub fn reconstruct_mesh(mesh: &Mesh1D, u: &CellField, params: &AdaptParams) -> Result<Mesh1D> {
    params.validate()?;
    u.expect_frame(Frame::Physical)?;
    check_len("reconstruct field", mesh.n_cells(), u.len())?;

    let mut candidate = mesh.clone();
    for pass in 0..params.equidist_iters {
        let w = if pass == 0 {
            compute_monitor(u, mesh, params)?
        } else {
            let projected = average_onto(mesh, u.values(), &candidate)?;
            compute_monitor(
                &CellField::from_raw(projected, Frame::Physical),
                &candidate,
                params,
            )?
        };
        let next = equidistribute(&candidate, &w);
        candidate = Mesh1D::from_interfaces(next)
            .map_err(|e| Error::Internal(format!("equidistribution produced a bad mesh: {e}")))?;
    }
    let capped = cap_displacements(mesh, candidate.interfaces(), params.beta);
    Mesh1D::from_interfaces(capped)
        .map_err(|e| Error::Internal(format!("capped mesh is invalid: {e}")))
}

/// `x_new - x_old` per interface; the two boundary entries are exactly zero.
pub fn edge_displacements(old: &Mesh1D, new: &Mesh1D) -> Result<Vec<f64>> {
    same_shape(old, new)?;
    let n = old.n_cells();
    Ok((0..=n)
        .map(|j| {
            if j == 0 || j == n {
                0.0
            } else {
                new.interfaces[j] - old.interfaces[j]
            }
        })
        .collect())
}

/// `(max(d, 0), max(-d, 0))`: both parts are magnitudes and `plus - minus == d`.
pub fn positive_negative_parts(d: f64) -> Result<(f64, f64)> {
    if !d.is_finite() {
        return Err(Error::NonFinite {
            what: "displacement",
            index: 0,
        });
    }
    Ok((d.max(0.0), (-d).max(0.0)))
}
