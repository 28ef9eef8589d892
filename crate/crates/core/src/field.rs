use crate::error::{check_finite, Error, Result};

/// Which mesh a set of cell values lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Frame {
    /// Cell averages `u_i` over the adaptive mesh.
    Physical,
    /// Values `v_i` over the uniform reference mesh.
    Reference,
}

/// Per-cell values tagged with their frame. All values are finite.
#[derive(Clone, Debug, PartialEq)]
pub struct CellField {
    values: Vec<f64>,
    frame: Frame,
}

impl CellField {
    pub fn new(values: Vec<f64>, frame: Frame) -> Result<Self> {
        check_finite("cell field", &values)?;
        Ok(Self { values, frame })
    }

    pub fn physical(values: Vec<f64>) -> Result<Self> {
        Self::new(values, Frame::Physical)
    }

    pub fn reference(values: Vec<f64>) -> Result<Self> {
        Self::new(values, Frame::Reference)
    }

    pub(crate) fn from_raw(values: Vec<f64>, frame: Frame) -> Self {
        debug_assert!(values.iter().all(|x| x.is_finite()));
        Self { values, frame }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub(crate) fn expect_frame(&self, expected: Frame) -> Result<()> {
        if self.frame != expected {
            return Err(Error::Frame {
                expected,
                found: self.frame,
            });
        }
        Ok(())
    }
}

impl std::ops::Index<usize> for CellField {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}
