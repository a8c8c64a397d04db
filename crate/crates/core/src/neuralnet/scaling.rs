use alloc::vec::Vec;

use crate::{Error, Result};

/// Fixed affine map of network inputs: every plant-state component and the
/// set-point go from their configured `[lo, hi]` to `[-1, 1]`, and the
/// integrator is divided by its bound.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureScaling {
    pub state: Vec<(f64, f64)>,
    pub setpoint: (f64, f64),
    pub z_bound: f64,
}

#[inline]
fn affine(v: f64, (lo, hi): (f64, f64)) -> f64 {
    (2.0 * v - lo - hi) / (hi - lo)
}

impl FeatureScaling {
    pub fn validate(&self) -> Result<()> {
        let bad = |&(lo, hi): &(f64, f64)| !(lo < hi && lo.is_finite() && hi.is_finite());
        if self.state.iter().any(bad) || bad(&self.setpoint) {
            return Err(Error::InvalidSpec("normalization ranges need lo < hi".into()));
        }
        if !(self.z_bound > 0.0 && self.z_bound.is_finite()) {
            return Err(Error::InvalidSpec("integrator bound must be positive".into()));
        }
        Ok(())
    }

    pub fn state_dim(&self) -> usize {
        self.state.len()
    }

    /// Normalized `[x..., y_ref]`.
    pub fn main_features(&self, x: &[f64], y_ref: f64) -> Result<Vec<f64>> {
        if x.len() != self.state.len() {
            return Err(Error::Structural(alloc::format!(
                "state has {} components, scaling expects {}",
                x.len(),
                self.state.len()
            )));
        }
        let mut f: Vec<f64> = x.iter().zip(&self.state).map(|(&v, &r)| affine(v, r)).collect();
        f.push(affine(y_ref, self.setpoint));
        Ok(f)
    }

    #[inline]
    pub fn z_feature(&self, z: f64) -> f64 {
        z / self.z_bound
    }
}
