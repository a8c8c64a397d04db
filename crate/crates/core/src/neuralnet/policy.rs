use alloc::vec::Vec;
use rand::Rng;
use rand_distr::StandardNormal;

use super::modular::{ModularNet, ModularTrace, NetSizes};
use super::scaling::FeatureScaling;
use crate::math::{exp, LN_2PI};
use crate::{Error, Result};

/// Log-density of `u` under `N(mean, exp(log_std)²)`.
#[inline]
pub fn gaussian_log_prob(mean: f64, log_std: f64, u: f64) -> f64 {
    let k = (u - mean) * exp(-log_std);
    -0.5 * k * k - log_std - 0.5 * LN_2PI
}

/// Differential entropy of a Gaussian with the given log standard deviation.
#[inline]
pub fn gaussian_entropy(log_std: f64) -> f64 {
    0.5 + 0.5 * LN_2PI + log_std
}

/// Stochastic policy `u ~ N(κ + g_θ(x, y_ref, z), σ²)` with a single
/// state-independent learnable `log σ`.
///
/// The prior action κ is supplied by the caller; this type owns `g_θ` and
/// `log σ`. Parameters are one flat vector: the network weights followed by
/// `log σ` as the last entry.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPolicy {
    pub net: ModularNet,
    pub scaling: FeatureScaling,
    /// Multiplies the raw network output, so a unit output spans half the
    /// actuator range.
    pub action_scale: f64,
    pub log_std_bounds: (f64, f64),
    params: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct PolicyTrace {
    inner: ModularTrace,
}

impl GaussianPolicy {
    pub fn new<R: Rng + ?Sized>(
        scaling: FeatureScaling,
        sizes: &NetSizes,
        action_scale: f64,
        log_std_init: f64,
        log_std_bounds: (f64, f64),
        rng: &mut R,
    ) -> Result<Self> {
        scaling.validate()?;
        let net = ModularNet::new(scaling.state_dim() + 1, sizes);
        let mut params = alloc::vec![0.0; net.param_count() + 1];
        net.init(&mut params, rng);
        params[net.param_count()] = log_std_init;
        Self::from_parts(net, scaling, action_scale, log_std_bounds, params)
    }

    pub fn from_parts(
        net: ModularNet,
        scaling: FeatureScaling,
        action_scale: f64,
        log_std_bounds: (f64, f64),
        params: Vec<f64>,
    ) -> Result<Self> {
        if params.len() != net.param_count() + 1 {
            return Err(Error::Structural(alloc::format!(
                "policy expects {} parameters, got {}",
                net.param_count() + 1,
                params.len()
            )));
        }
        if net.main_inputs() != scaling.state_dim() + 1 {
            return Err(Error::Structural("network width does not match scaling".into()));
        }
        if !(log_std_bounds.0 < log_std_bounds.1) || !(action_scale > 0.0) {
            return Err(Error::InvalidSpec("bad log_std bounds or action scale".into()));
        }
        let mut p = GaussianPolicy { net, scaling, action_scale, log_std_bounds, params };
        p.clamp_log_std();
        Ok(p)
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    /// Replace all parameters; `log σ` is projected back into its bounds.
    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.params.len() {
            return Err(Error::Structural("policy parameter length mismatch".into()));
        }
        self.params.copy_from_slice(params);
        self.clamp_log_std();
        Ok(())
    }

    pub fn log_std_index(&self) -> usize {
        self.params.len() - 1
    }

    pub fn log_std(&self) -> f64 {
        self.params[self.log_std_index()]
    }

    pub fn set_log_std(&mut self, v: f64) {
        let i = self.log_std_index();
        self.params[i] = v;
        self.clamp_log_std();
    }

    pub fn sigma(&self) -> f64 {
        exp(self.log_std())
    }

    pub fn clamp_log_std(&mut self) {
        let i = self.log_std_index();
        self.params[i] = self.params[i].clamp(self.log_std_bounds.0, self.log_std_bounds.1);
    }

    /// Network mean correction `g_θ(x, y_ref, z)` in action units.
    pub fn mean_correction(&self, x: &[f64], y_ref: f64, z: f64) -> Result<f64> {
        let f = self.scaling.main_features(x, y_ref)?;
        Ok(self.action_scale * self.net.forward(&self.params, &f, self.scaling.z_feature(z))?)
    }

    pub fn mean_correction_traced(&self, x: &[f64], y_ref: f64, z: f64) -> Result<(f64, PolicyTrace)> {
        let f = self.scaling.main_features(x, y_ref)?;
        let (out, inner) = self.net.forward_traced(&self.params, &f, self.scaling.z_feature(z))?;
        Ok((self.action_scale * out, PolicyTrace { inner }))
    }

    /// Accumulate `dmean · ∂g/∂θ` into `grad` (length [`Self::param_count`]).
    pub fn backward_mean(&self, trace: &PolicyTrace, dmean: f64, grad: &mut [f64]) {
        self.net.backward(&self.params, &trace.inner, dmean * self.action_scale, grad);
    }

    pub fn log_prob(&self, mean_total: f64, u: f64) -> f64 {
        gaussian_log_prob(mean_total, self.log_std(), u)
    }

    pub fn sample_action<R: Rng + ?Sized>(&self, mean_total: f64, rng: &mut R) -> (f64, f64) {
        let xi: f64 = rng.sample(StandardNormal);
        let u = mean_total + self.sigma() * xi;
        (u, self.log_prob(mean_total, u))
    }

    pub fn entropy(&self) -> f64 {
        gaussian_entropy(self.log_std())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    fn scaling() -> FeatureScaling {
        FeatureScaling {
            state: alloc::vec![(0.0, 25.0), (0.0, 25.0)],
            setpoint: (1.0, 12.0),
            z_bound: 25.0,
        }
    }

    fn policy(log_std: f64) -> GaussianPolicy {
        GaussianPolicy::new(scaling(), &NetSizes::default(), 5.0, log_std, (-8.0, 1.0), &mut substream(0, &[]))
            .unwrap()
    }

    #[test]
    fn log_density_at_mode() {
        let p = policy(0.0);
        assert!((p.log_prob(1.3, 1.3) + 0.918_938_533_204_672_7).abs() < 1e-15);
        assert!((p.log_prob(0.0, 1.0) - p.log_prob(0.0, 0.0) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn log_density_is_symmetric() {
        let p = policy(-0.7);
        for d in [0.015625, 0.375, 2.0] {
            assert_eq!(p.log_prob(2.0, 2.0 + d), p.log_prob(2.0, 2.0 - d));
        }
    }

    #[test]
    fn density_integrates_to_one() {
        // Trapezoid rule over ±8σ.
        let p = policy(-1.2);
        let (mean, s) = (0.4, p.sigma());
        let n = 20_000;
        let (a, b) = (mean - 8.0 * s, mean + 8.0 * s);
        let h = (b - a) / n as f64;
        let total: f64 = (0..=n)
            .map(|i| {
                let w = if i == 0 || i == n { 0.5 } else { 1.0 };
                w * exp(p.log_prob(mean, a + i as f64 * h))
            })
            .sum::<f64>()
            * h;
        assert!((total - 1.0).abs() < 1e-6, "{total}");
    }

    #[test]
    fn sampled_log_prob_matches_density() {
        let p = policy(-0.5);
        let mut rng = substream(1, &[]);
        for _ in 0..100 {
            let (u, lp) = p.sample_action(0.8, &mut rng);
            assert_eq!(lp.to_bits(), p.log_prob(0.8, u).to_bits());
        }
    }

    #[test]
    fn empirical_spread_matches_sigma() {
        let p = policy(-4.0);
        let mut rng = substream(2, &[]);
        let n = 10_000;
        let draws: Vec<f64> = (0..n).map(|_| p.sample_action(3.0, &mut rng).0).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|u| (u - mean) * (u - mean)).sum::<f64>() / (n - 1) as f64;
        let rel = (var.sqrt() - p.sigma()).abs() / p.sigma();
        assert!(rel < 0.05, "{rel}");
    }

    #[test]
    fn starts_at_zero_correction() {
        let p = policy(-0.7);
        assert_eq!(p.mean_correction(&[3.0, 7.0], 5.0, -4.0).unwrap(), 0.0);
    }

    #[test]
    fn log_std_is_clamped() {
        let mut p = policy(5.0);
        assert_eq!(p.log_std(), 1.0);
        p.set_log_std(-100.0);
        assert_eq!(p.log_std(), -8.0);
        assert!(p.sigma() > 0.0);
    }
}
