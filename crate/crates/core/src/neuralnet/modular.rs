use alloc::vec::Vec;
use rand::Rng;

use super::dense::{Activation, Stack, StackTrace};
use crate::{Error, Result};

/// Hidden-layer widths of the three sub-networks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetSizes {
    pub main: Vec<usize>,
    pub z: Vec<usize>,
    pub trunk: Vec<usize>,
}

impl Default for NetSizes {
    fn default() -> Self {
        NetSizes {
            main: alloc::vec![64, 64],
            z: alloc::vec![16, 16],
            trunk: alloc::vec![64, 64],
        }
    }
}

/// Mean-correction network with two input branches that only meet in the
/// trunk: one over the plant state and set-point, one over the integrator.
///
/// Parameter layout: main branch, then integrator branch, then trunk (whose
/// last layer is a single linear output unit).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModularNet {
    pub main: Stack,
    pub zbranch: Stack,
    pub trunk: Stack,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModularTrace {
    main: StackTrace,
    zbranch: StackTrace,
    trunk: StackTrace,
}

impl ModularNet {
    pub fn new(main_inputs: usize, sizes: &NetSizes) -> Self {
        let tanh = Activation::Tanh;
        let dims = |input: usize, hidden: &[usize]| {
            let mut v = alloc::vec![input];
            v.extend_from_slice(hidden);
            v
        };
        let main = Stack::new(&dims(main_inputs, &sizes.main), 0, tanh, tanh);
        let zbranch = Stack::new(&dims(1, &sizes.z), main.end(), tanh, tanh);
        let mut trunk_dims = dims(main.output_dim() + zbranch.output_dim(), &sizes.trunk);
        trunk_dims.push(1);
        let trunk = Stack::new(&trunk_dims, zbranch.end(), tanh, Activation::Identity);
        ModularNet { main, zbranch, trunk }
    }

    /// Reassemble from deserialized stacks, checking that they fit together.
    pub fn from_stacks(main: Stack, zbranch: Stack, trunk: Stack) -> Result<Self> {
        let ok = main.offset() == 0
            && zbranch.offset() == main.end()
            && trunk.offset() == zbranch.end()
            && zbranch.input_dim() == 1
            && trunk.input_dim() == main.output_dim() + zbranch.output_dim()
            && trunk.output_dim() == 1;
        if ok {
            Ok(ModularNet { main, zbranch, trunk })
        } else {
            Err(Error::Structural("modular network stacks do not fit together".into()))
        }
    }

    pub fn main_inputs(&self) -> usize {
        self.main.input_dim()
    }

    pub fn param_count(&self) -> usize {
        self.trunk.end()
    }

    pub fn init<R: Rng + ?Sized>(&self, params: &mut [f64], rng: &mut R) {
        self.main.init(params, rng, false);
        self.zbranch.init(params, rng, false);
        self.trunk.init(params, rng, true);
    }

    fn check(&self, params: &[f64], main_in: &[f64]) -> Result<()> {
        if main_in.len() != self.main_inputs() {
            return Err(Error::Structural(alloc::format!(
                "expected {} main-branch inputs, got {}",
                self.main_inputs(),
                main_in.len()
            )));
        }
        if params.len() < self.param_count() {
            return Err(Error::Structural("parameter vector too short".into()));
        }
        Ok(())
    }

    pub fn forward(&self, params: &[f64], main_in: &[f64], z_in: f64) -> Result<f64> {
        Ok(self.forward_traced(params, main_in, z_in)?.0)
    }

    pub fn forward_traced(&self, params: &[f64], main_in: &[f64], z_in: f64) -> Result<(f64, ModularTrace)> {
        self.check(params, main_in)?;
        let main = self.main.forward(params, main_in);
        let zbranch = self.zbranch.forward(params, &[z_in]);
        let mut joined = main.output().to_vec();
        joined.extend_from_slice(zbranch.output());
        let trunk = self.trunk.forward(params, &joined);
        let out = trunk.output()[0];
        Ok((out, ModularTrace { main, zbranch, trunk }))
    }

    /// Accumulate `dout · ∂out/∂θ` into `grad`.
    pub fn backward(&self, params: &[f64], trace: &ModularTrace, dout: f64, grad: &mut [f64]) {
        let djoined = self.trunk.backward(params, &trace.trunk, &[dout], grad);
        let split = self.main.output_dim();
        self.main.backward(params, &trace.main, &djoined[..split], grad);
        self.zbranch.backward(params, &trace.zbranch, &djoined[split..], grad);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    #[test]
    fn parameter_count_formula() {
        let net = ModularNet::new(3, &NetSizes::default());
        let expect = 4 * 64 + 65 * 64 + 2 * 16 + 17 * 16 + 81 * 64 + 65 * 64 + 65;
        assert_eq!(net.param_count(), expect);
    }

    #[test]
    fn zero_weights_give_zero_output() {
        let net = ModularNet::new(3, &NetSizes::default());
        let params = alloc::vec![0.0; net.param_count()];
        assert_eq!(net.forward(&params, &[0.3, -0.9, 0.1], 0.7).unwrap(), 0.0);
    }

    #[test]
    fn zero_initialized_output_layer() {
        let net = ModularNet::new(2, &NetSizes::default());
        let mut params = alloc::vec![0.0; net.param_count()];
        net.init(&mut params, &mut substream(1, &[]));
        for (x, z) in [([0.1, 0.2], 0.0), ([-1.0, 1.0], 0.9)] {
            assert_eq!(net.forward(&params, &x, z).unwrap(), 0.0);
        }
    }

    #[test]
    fn branch_separation() {
        let net = ModularNet::new(3, &NetSizes::default());
        let mut rng = substream(3, &[]);
        let mut params: Vec<f64> = (0..net.param_count())
            .map(|_| rng.random::<f64>() - 0.5)
            .collect();
        let x = [0.2, -0.4, 0.6];
        assert_ne!(
            net.forward(&params, &x, -0.5).unwrap(),
            net.forward(&params, &x, 0.5).unwrap()
        );
        for layer in &net.zbranch.layers {
            params[layer.offset..layer.offset + layer.param_count()].fill(0.0);
        }
        assert_eq!(
            net.forward(&params, &x, -0.5).unwrap(),
            net.forward(&params, &x, 0.5).unwrap()
        );
    }

    #[test]
    fn deterministic_forward() {
        let net = ModularNet::new(2, &NetSizes::default());
        let mut rng = substream(5, &[]);
        let params: Vec<f64> = (0..net.param_count()).map(|_| rng.random::<f64>() - 0.5).collect();
        let a = net.forward(&params, &[0.1, 0.3], 0.2).unwrap();
        let b = net.forward(&params, &[0.1, 0.3], 0.2).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn wrong_input_width_is_structural() {
        let net = ModularNet::new(3, &NetSizes::default());
        let params = alloc::vec![0.0; net.param_count()];
        assert!(matches!(net.forward(&params, &[0.0; 2], 0.0), Err(Error::Structural(_))));
    }
}
