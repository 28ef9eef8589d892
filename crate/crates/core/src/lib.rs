//! Adaptive moving-mesh finite volume solver for 1D scalar conservation laws.
//!
//! Each time step runs three stages: the mesh is redistributed by
//! equidistributing a curvature monitor, the cell averages are remapped
//! conservatively onto the new mesh, and a finite volume update is applied on
//! the new mesh. Every adaptive state is paired with a reference state on the
//! uniform mesh of the same cardinality (`dx * v_i = h_i * u_i`), where mesh
//! motion and flux update combine into one conservative update. The
//! [`diagnostics`] module evaluates, and optionally enforces, a sufficient
//! condition on the mesh motion for the combined update to dissipate entropy.

pub mod config;
pub mod diagnostics;
pub mod error;
pub mod evolve;
pub mod exec;
pub mod field;
pub mod flux;
pub mod mesh;
pub mod refmap;
pub mod remap;
pub mod runner;
pub mod scenario;

pub use error::{Error, Result};
pub use field::{CellField, Frame};
pub use mesh::{AdaptParams, Mesh1D};
