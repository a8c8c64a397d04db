//! Policy and value networks with hand-written reverse-mode gradients, the
//! Gaussian action head and the Adam optimizer. All arithmetic is `f64`.

mod adam;
mod dense;
mod modular;
mod policy;
mod scaling;
pub mod serialize;
mod value;

pub use adam::AdamState;
pub use dense::{Activation, Dense, Stack, StackTrace};
pub use modular::{ModularNet, ModularTrace, NetSizes};
pub use policy::{gaussian_entropy, gaussian_log_prob, GaussianPolicy, PolicyTrace};
pub use scaling::FeatureScaling;
pub use value::ValueNet;

use crate::{Error, Result};

/// Error on the first non-finite gradient entry.
pub fn check_gradient(grad: &[f64]) -> Result<()> {
    match grad.iter().position(|g| !g.is_finite()) {
        Some(index) => Err(Error::NonFiniteGradient { index }),
        None => Ok(()),
    }
}
