//! The reference uniform mesh paired with an adaptive mesh.
//!
//! The reference mesh has the same domain and cell count as the adaptive one
//! but fixed width `dx = (b - a) / N`. Its values carry the same per-cell mass:
//! `dx * v_i = h_i * u_i`.

use crate::error::{check_len, Error, Result};
use crate::field::{CellField, Frame};
use crate::mesh::Mesh1D;

#[derive(Clone, Debug, PartialEq)]
pub struct ReferencePair {
    pub dx: f64,
    pub v: CellField,
}

impl ReferencePair {
    pub fn new(dx: f64, v: CellField) -> Result<Self> {
        if !(dx.is_finite() && dx > 0.0) {
            return Err(Error::InvalidParam {
                name: "dx",
                reason: format!("must be positive, got {dx}"),
            });
        }
        v.expect_frame(Frame::Reference)?;
        Ok(Self { dx, v })
    }

    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    /// Total mass `sum(dx * v_i)`.
    pub fn mass(&self) -> f64 {
        self.v.values().iter().map(|v| self.dx * v).sum()
    }
}

/// `v_i = h_i u_i / dx`.
pub fn to_reference(mesh: &Mesh1D, u: &CellField) -> Result<ReferencePair> {
    u.expect_frame(Frame::Physical)?;
    check_len("reference transform", mesh.n_cells(), u.len())?;
    let dx = mesh.reference_width();
    let v = mesh
        .widths()
        .iter()
        .zip(u.values())
        .map(|(h, u)| h * u / dx)
        .collect();
    ReferencePair::new(dx, CellField::from_raw(v, Frame::Reference))
}

/// `u_i = dx v_i / h_i`.
pub fn from_reference(mesh: &Mesh1D, reference: &ReferencePair) -> Result<CellField> {
    check_len("reference transform", mesh.n_cells(), reference.len())?;
    let dx = reference.dx;
    let u = mesh
        .widths()
        .iter()
        .zip(reference.v.values())
        .map(|(h, v)| dx * v / h)
        .collect();
    Ok(CellField::from_raw(u, Frame::Physical))
}

/// Per-cell mass mismatch `dx * v_i - h_i * u_i`; zero for a consistent pair.
pub fn gcl_residual(mesh: &Mesh1D, u: &CellField, reference: &ReferencePair) -> Result<Vec<f64>> {
    let n = mesh.n_cells();
    check_len("gcl residual field", n, u.len())?;
    check_len("gcl residual reference", n, reference.len())?;
    Ok((0..n)
        .map(|i| reference.dx * reference.v[i] - mesh.width(i) * u[i])
        .collect())
}
