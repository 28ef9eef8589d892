//! Conservative piecewise-constant remap between consecutive meshes.
//!
//! Displacements are capped so that every new cell overlaps only itself and
//! its two old neighbours; under that cap the one-interface-per-side mass
//! exchange below is exact, not an approximation.
//!
//! Per-interface arrays of length `N` ([`HTerms`], and the coefficient arrays
//! in [`crate::flux`]) use the right-face convention: entry `i` belongs to the
//! interface between cell `i` and cell `i + 1 (mod N)`, so entry `N - 1` is the
//! periodic seam.

use crate::error::{check_len, Error, Result};
use crate::field::{CellField, Frame};
use crate::mesh::{edge_displacements, positive_negative_parts, Mesh1D};

/// Mass flux `H_{i+1/2}` through each interface caused by its motion, in
/// reference-solution units (right-face convention).
#[derive(Clone, Debug, PartialEq)]
pub struct HTerms(pub Vec<f64>);

impl HTerms {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    /// `H_{i-1/2} - H_{i+1/2}` for every cell.
    pub fn divergence(&self) -> Vec<f64> {
        let h = &self.0;
        let n = h.len();
        (0..n).map(|i| h[(i + n - 1) % n] - h[i]).collect()
    }
}

fn check_cap(old: &Mesh1D, d: &[f64]) -> Result<()> {
    let n = old.n_cells();
    for (j, dj) in d.iter().enumerate().take(n).skip(1) {
        let limit = old.width(j - 1).min(old.width(j));
        if dj.abs() >= limit {
            return Err(Error::CapViolated {
                interface: j,
                displacement: dj.abs(),
                limit,
            });
        }
    }
    Ok(())
}

/// Remaps physical cell averages from `old_mesh` onto `new_mesh`:
///
/// `h_i' u^_i = h_i u_i - d-_{i+1/2} u_i + d+_{i+1/2} u_{i+1} + d-_{i-1/2} u_{i-1} - d+_{i-1/2} u_i`
///
/// Fails with [`Error::CapViolated`] if an interface moves by a full
/// neighbouring cell width or more.
pub fn remap_u(old_mesh: &Mesh1D, new_mesh: &Mesh1D, u: &CellField) -> Result<CellField> {
    u.expect_frame(Frame::Physical)?;
    let n = old_mesh.n_cells();
    check_len("remap field", n, u.len())?;
    let d = edge_displacements(old_mesh, new_mesh)?;
    check_cap(old_mesh, &d)?;
    let u = u.values();
    let parts: Vec<(f64, f64)> = d
        .iter()
        .map(|&dj| positive_negative_parts(dj))
        .collect::<Result<_>>()?;
    let out = (0..n)
        .map(|i| {
            let (lp, lm) = parts[i];
            let (rp, rm) = parts[i + 1];
            if d[i] == 0.0 && d[i + 1] == 0.0 {
                return u[i];
            }
            let prev = u[(i + n - 1) % n];
            let next = u[(i + 1) % n];
            let mass = old_mesh.width(i) * u[i] - rm * u[i] + rp * next + lm * prev - lp * u[i];
            mass / new_mesh.width(i)
        })
        .collect();
    Ok(CellField::from_raw(out, Frame::Physical))
}

/// `H_{i+1/2} = (d-_{i+1/2} / h_i) v_i - (d+_{i+1/2} / h_{i+1}) v_{i+1}` with
/// old widths `h` and mesh displacements `d` (length `N + 1`).
pub fn h_terms(v: &CellField, old_mesh: &Mesh1D, displacements: &[f64]) -> Result<HTerms> {
    v.expect_frame(Frame::Reference)?;
    let n = old_mesh.n_cells();
    check_len("h-terms field", n, v.len())?;
    check_len("h-terms displacements", n + 1, displacements.len())?;
    let v = v.values();
    let h = old_mesh.widths();
    let out = (0..n)
        .map(|i| {
            let next = (i + 1) % n;
            let (dp, dm) = positive_negative_parts(displacements[i + 1])?;
            Ok(dm / h[i] * v[i] - dp / h[next] * v[next])
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(HTerms(out))
}

/// `v^_i = v_i + H_{i-1/2} - H_{i+1/2}`.
pub fn remap_v_via_h(v: &CellField, h: &HTerms) -> Result<CellField> {
    v.expect_frame(Frame::Reference)?;
    check_len("h-terms", v.len(), h.len())?;
    let div = h.divergence();
    let out = v.values().iter().zip(div).map(|(vi, di)| vi + di).collect();
    Ok(CellField::from_raw(out, Frame::Reference))
}
