use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::math::{sqrt, tanh};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Tanh,
    Identity,
}

impl Activation {
    pub fn name(self) -> &'static str {
        match self {
            Activation::Tanh => "tanh",
            Activation::Identity => "identity",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "tanh" => Some(Activation::Tanh),
            "identity" => Some(Activation::Identity),
            _ => None,
        }
    }
}

/// Fully connected layer stored in a flat parameter vector at `offset`:
/// `fan_out` rows of `fan_in` weights, then `fan_out` biases.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dense {
    pub fan_in: usize,
    pub fan_out: usize,
    pub offset: usize,
    pub activation: Activation,
}

impl Dense {
    pub fn param_count(&self) -> usize {
        (self.fan_in + 1) * self.fan_out
    }

    fn forward(&self, params: &[f64], input: &[f64], out: &mut [f64]) {
        let w = &params[self.offset..self.offset + self.fan_in * self.fan_out];
        let b = &params[self.offset + self.fan_in * self.fan_out..self.offset + self.param_count()];
        for (o, (row, bias)) in out.iter_mut().zip(w.chunks_exact(self.fan_in).zip(b)) {
            let pre = row.iter().zip(input).fold(*bias, |acc, (wi, xi)| acc + wi * xi);
            *o = match self.activation {
                Activation::Tanh => tanh(pre),
                Activation::Identity => pre,
            };
        }
    }

    /// Accumulates parameter gradients into `grad` and writes the input
    /// gradient into `din`.
    fn backward(
        &self,
        params: &[f64],
        input: &[f64],
        output: &[f64],
        dout: &[f64],
        grad: &mut [f64],
        din: &mut [f64],
    ) {
        let nw = self.fan_in * self.fan_out;
        let w = &params[self.offset..self.offset + nw];
        let (gw, gb) = grad[self.offset..self.offset + self.param_count()].split_at_mut(nw);
        din.iter_mut().for_each(|d| *d = 0.0);
        for j in 0..self.fan_out {
            let dpre = match self.activation {
                Activation::Tanh => dout[j] * (1.0 - output[j] * output[j]),
                Activation::Identity => dout[j],
            };
            if dpre == 0.0 {
                continue;
            }
            gb[j] += dpre;
            let row = j * self.fan_in;
            for i in 0..self.fan_in {
                gw[row + i] += dpre * input[i];
                din[i] += dpre * w[row + i];
            }
        }
    }
}

/// Activations recorded by [`Stack::forward`]; `acts[0]` is the input.
#[derive(Debug, Clone, PartialEq)]
pub struct StackTrace {
    pub acts: Vec<Vec<f64>>,
}

impl StackTrace {
    pub fn output(&self) -> &[f64] {
        self.acts.last().map(Vec::as_slice).unwrap_or(&[])
    }
}

/// Chain of dense layers laid out contiguously in a parameter vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stack {
    pub layers: Vec<Dense>,
}

impl Stack {
    /// `sizes = [input, hidden..., output]`; hidden layers use `hidden`,
    /// the last layer uses `last`.
    pub fn new(sizes: &[usize], offset: usize, hidden: Activation, last: Activation) -> Self {
        let mut layers = Vec::with_capacity(sizes.len().saturating_sub(1));
        let mut at = offset;
        for (k, pair) in sizes.windows(2).enumerate() {
            let activation = if k + 2 == sizes.len() { last } else { hidden };
            let layer = Dense { fan_in: pair[0], fan_out: pair[1], offset: at, activation };
            at += layer.param_count();
            layers.push(layer);
        }
        Stack { layers }
    }

    pub fn from_layers(layers: Vec<Dense>) -> Self {
        Stack { layers }
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Dense::param_count).sum()
    }

    pub fn offset(&self) -> usize {
        self.layers.first().map_or(0, |l| l.offset)
    }

    /// One past the last parameter index used.
    pub fn end(&self) -> usize {
        self.offset() + self.param_count()
    }

    pub fn input_dim(&self) -> usize {
        self.layers.first().map_or(0, |l| l.fan_in)
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(0, |l| l.fan_out)
    }

    pub fn forward(&self, params: &[f64], input: &[f64]) -> StackTrace {
        debug_assert_eq!(input.len(), self.input_dim());
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(input.to_vec());
        for layer in &self.layers {
            let mut out = vec![0.0; layer.fan_out];
            layer.forward(params, acts.last().unwrap(), &mut out);
            acts.push(out);
        }
        StackTrace { acts }
    }

    /// Back-propagates `dout` through the stack, accumulating into `grad`.
    /// Returns the gradient with respect to the stack input.
    pub fn backward(&self, params: &[f64], trace: &StackTrace, dout: &[f64], grad: &mut [f64]) -> Vec<f64> {
        let mut upstream = dout.to_vec();
        for (k, layer) in self.layers.iter().enumerate().rev() {
            let mut din = vec![0.0; layer.fan_in];
            layer.backward(params, &trace.acts[k], &trace.acts[k + 1], &upstream, grad, &mut din);
            upstream = din;
        }
        upstream
    }

    /// Gaussian weights with variance `1/fan_in`, zero biases. With
    /// `zero_last`, the final layer starts at exactly zero.
    pub fn init<R: Rng + ?Sized>(&self, params: &mut [f64], rng: &mut R, zero_last: bool) {
        for (k, layer) in self.layers.iter().enumerate() {
            let nw = layer.fan_in * layer.fan_out;
            let block = &mut params[layer.offset..layer.offset + layer.param_count()];
            let (w, b) = block.split_at_mut(nw);
            b.iter_mut().for_each(|v| *v = 0.0);
            if zero_last && k + 1 == self.layers.len() {
                w.iter_mut().for_each(|v| *v = 0.0);
            } else {
                let scale = 1.0 / sqrt(layer.fan_in as f64);
                w.iter_mut().for_each(|v| *v = scale * rng.sample::<f64, _>(StandardNormal));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_layer_matches_hand_derivative() {
        // Loss (w·x + b − t)²: dL/dw = 2(w·x+b−t)x, dL/db = 2(w·x+b−t).
        let stack = Stack::new(&[3, 1], 0, Activation::Identity, Activation::Identity);
        let params = [0.5, -1.0, 2.0, 0.25];
        let x = [1.0, 2.0, -0.5];
        let t = 0.3;
        let tr = stack.forward(&params, &x);
        let y = tr.output()[0];
        assert!((y - (0.5 - 2.0 - 1.0 + 0.25)).abs() < 1e-15);
        let mut grad = [0.0; 4];
        stack.backward(&params, &tr, &[2.0 * (y - t)], &mut grad);
        let r = 2.0 * (y - t);
        assert_eq!(grad, [r * x[0], r * x[1], r * x[2], r]);
    }

    #[test]
    fn zero_upstream_gives_zero_gradient() {
        let stack = Stack::new(&[2, 4, 1], 0, Activation::Tanh, Activation::Identity);
        let params: Vec<f64> = (0..stack.param_count()).map(|i| (i as f64 * 0.37).sin()).collect();
        let tr = stack.forward(&params, &[0.3, -0.2]);
        let mut grad = vec![0.0; params.len()];
        stack.backward(&params, &tr, &[0.0], &mut grad);
        assert!(grad.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn layout_is_contiguous() {
        let stack = Stack::new(&[3, 64, 64, 1], 10, Activation::Tanh, Activation::Identity);
        assert_eq!(stack.param_count(), 4 * 64 + 65 * 64 + 65);
        assert_eq!(stack.offset(), 10);
        assert_eq!(stack.layers[1].offset, 10 + 4 * 64);
        assert_eq!(stack.end(), 10 + stack.param_count());
    }
}
