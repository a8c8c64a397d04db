use alloc::vec::Vec;
use rand::Rng;

use super::dense::{Activation, Stack, StackTrace};
use super::scaling::FeatureScaling;
use crate::{Error, Result};

/// Plain tanh stack over the normalized `(x, z, y_ref)`, returning a scalar
/// multiplied by `value_scale`.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueNet {
    pub stack: Stack,
    pub scaling: FeatureScaling,
    pub value_scale: f64,
    params: Vec<f64>,
}

impl ValueNet {
    pub fn new<R: Rng + ?Sized>(
        scaling: FeatureScaling,
        hidden: &[usize],
        value_scale: f64,
        rng: &mut R,
    ) -> Result<Self> {
        scaling.validate()?;
        let mut dims = alloc::vec![scaling.state_dim() + 2];
        dims.extend_from_slice(hidden);
        dims.push(1);
        let stack = Stack::new(&dims, 0, Activation::Tanh, Activation::Identity);
        let mut params = alloc::vec![0.0; stack.param_count()];
        stack.init(&mut params, rng, true);
        Self::from_parts(stack, scaling, value_scale, params)
    }

    pub fn from_parts(stack: Stack, scaling: FeatureScaling, value_scale: f64, params: Vec<f64>) -> Result<Self> {
        if params.len() != stack.param_count() || stack.offset() != 0 {
            return Err(Error::Structural(alloc::format!(
                "value network expects {} parameters, got {}",
                stack.param_count(),
                params.len()
            )));
        }
        if stack.input_dim() != scaling.state_dim() + 2 || stack.output_dim() != 1 {
            return Err(Error::Structural("value network shape does not match scaling".into()));
        }
        if !(value_scale > 0.0 && value_scale.is_finite()) {
            return Err(Error::InvalidSpec("value scale must be positive".into()));
        }
        Ok(ValueNet { stack, scaling, value_scale, params })
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.params.len() {
            return Err(Error::Structural("value parameter length mismatch".into()));
        }
        self.params.copy_from_slice(params);
        Ok(())
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    fn features(&self, x: &[f64], y_ref: f64, z: f64) -> Result<Vec<f64>> {
        let mut f = self.scaling.main_features(x, y_ref)?;
        f.push(self.scaling.z_feature(z));
        Ok(f)
    }

    pub fn value(&self, x: &[f64], y_ref: f64, z: f64) -> Result<f64> {
        Ok(self.value_traced(x, y_ref, z)?.0)
    }

    pub fn value_traced(&self, x: &[f64], y_ref: f64, z: f64) -> Result<(f64, StackTrace)> {
        let trace = self.stack.forward(&self.params, &self.features(x, y_ref, z)?);
        Ok((self.value_scale * trace.output()[0], trace))
    }

    pub fn backward(&self, trace: &StackTrace, dvalue: f64, grad: &mut [f64]) {
        self.stack.backward(&self.params, trace, &[dvalue * self.value_scale], grad);
    }
}
