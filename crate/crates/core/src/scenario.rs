//! Initial conditions, sampled as exact cell averages.

use crate::error::{Error, Result};
use crate::field::CellField;
use crate::mesh::Mesh1D;
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitialCondition {
    /// `offset + amplitude * sin(2 pi (x - a) / (b - a))`.
    Sine { amplitude: f64, offset: f64 },
    /// `ul` left of `position`, `ur` right of it (periodically a step up and a step down).
    Riemann { ul: f64, ur: f64, position: f64 },
    /// Triangle of the given height and half-width on a zero background.
    Hat {
        height: f64,
        half_width: f64,
        center: f64,
    },
}

impl InitialCondition {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Sine { .. } => "sine",
            Self::Riemann { .. } => "riemann",
            Self::Hat { .. } => "hat",
        }
    }

    /// Pointwise value at `x` on the domain `[a, b]`.
    pub fn value(&self, x: f64, a: f64, b: f64) -> f64 {
        match *self {
            Self::Sine { amplitude, offset } => {
                offset + amplitude * (2.0 * PI * (x - a) / (b - a)).sin()
            }
            Self::Riemann { ul, ur, position } => {
                if x < position {
                    ul
                } else {
                    ur
                }
            }
            Self::Hat {
                height,
                half_width,
                center,
            } => height * (1.0 - (x - center).abs() / half_width).max(0.0),
        }
    }

    /// Exact integral over `[x0, x1]`, both inside `[a, b]`.
    fn integral(&self, x0: f64, x1: f64, a: f64, b: f64) -> f64 {
        match *self {
            Self::Sine { amplitude, offset } => {
                let k = 2.0 * PI / (b - a);
                offset * (x1 - x0) - amplitude / k * ((k * (x1 - a)).cos() - (k * (x0 - a)).cos())
            }
            Self::Riemann { ul, ur, position } => {
                let p = position.clamp(x0, x1);
                ul * (p - x0) + ur * (x1 - p)
            }
            Self::Hat {
                height,
                half_width,
                center,
            } => {
                // antiderivative of the triangle, piecewise on its three kinks
                let ramp = |x: f64| -> f64 {
                    let s = ((x - center) / half_width).clamp(-1.0, 1.0);
                    let part = if s <= 0.0 {
                        0.5 * (1.0 + s) * (1.0 + s)
                    } else {
                        1.0 - 0.5 * (1.0 - s) * (1.0 - s)
                    };
                    height * half_width * part
                };
                ramp(x1) - ramp(x0)
            }
        }
    }

    /// Cell averages on `mesh`.
    pub fn cell_averages(&self, mesh: &Mesh1D) -> Result<CellField> {
        self.validate(mesh.left(), mesh.right())?;
        let (a, b) = (mesh.left(), mesh.right());
        let x = mesh.interfaces();
        let u = (0..mesh.n_cells())
            .map(|i| self.integral(x[i], x[i + 1], a, b) / mesh.width(i))
            .collect();
        CellField::physical(u)
    }

    pub fn validate(&self, a: f64, b: f64) -> Result<()> {
        let bad = |name: &'static str, reason: String| Err(Error::InvalidParam { name, reason });
        match *self {
            Self::Sine { amplitude, offset } if !(amplitude.is_finite() && offset.is_finite()) => {
                bad("sine", "amplitude and offset must be finite".into())
            }
            Self::Riemann { ul, ur, position } => {
                if !(ul.is_finite() && ur.is_finite()) {
                    bad("riemann", "states must be finite".into())
                } else if !(position > a && position < b) {
                    bad(
                        "riemann_position",
                        format!("must lie strictly inside ({a}, {b}), got {position}"),
                    )
                } else {
                    Ok(())
                }
            }
            Self::Hat {
                height,
                half_width,
                center,
            } => {
                if !height.is_finite() {
                    bad("hat_height", "must be finite".into())
                } else if !(half_width > 0.0
                    && center - half_width >= a
                    && center + half_width <= b)
                {
                    bad(
                        "hat_half_width",
                        format!(
                            "support [{}, {}] must be inside [{a}, {b}]",
                            center - half_width,
                            center + half_width
                        ),
                    )
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }
}
