use crate::math::exp;
use crate::neuralnet::{check_gradient, gaussian_entropy, gaussian_log_prob, GaussianPolicy, ValueNet};
use crate::{Error, Result};

use super::{PpoHyper, RolloutBatch};

/// Loss value and its parts, averaged over the evaluated samples.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LossReport {
    pub total: f64,
    /// `−mean(min(ρA, clip(ρ)A))`.
    pub policy: f64,
    /// `mean((V − target)²)`, unweighted.
    pub value: f64,
    pub entropy: f64,
    /// Fraction of samples with `|ρ − 1| > ε`.
    pub clip_frac: f64,
    /// `mean(log π_old − log π_new)`.
    pub approx_kl: f64,
}

/// Clipped-surrogate PPO loss over `indices` of `batch`, using `advantages`
/// (already normalized) in place of the batch's raw ones.
pub fn ppo_loss(
    batch: &RolloutBatch,
    advantages: &[f64],
    indices: &[usize],
    policy: &GaussianPolicy,
    value: &ValueNet,
    hyper: &PpoHyper,
) -> Result<LossReport> {
    evaluate(batch, advantages, indices, policy, value, hyper, None)
}

/// As [`ppo_loss`], also accumulating parameter gradients into the two
/// gradient buffers (which the caller zeroes).
pub fn ppo_loss_and_grad(
    batch: &RolloutBatch,
    advantages: &[f64],
    indices: &[usize],
    policy: &GaussianPolicy,
    value: &ValueNet,
    hyper: &PpoHyper,
    policy_grad: &mut [f64],
    value_grad: &mut [f64],
) -> Result<LossReport> {
    if policy_grad.len() != policy.param_count() || value_grad.len() != value.param_count() {
        return Err(Error::Structural("gradient buffer length mismatch".into()));
    }
    let report = evaluate(batch, advantages, indices, policy, value, hyper, Some((policy_grad, value_grad)))?;
    Ok(report)
}

fn evaluate(
    batch: &RolloutBatch,
    advantages: &[f64],
    indices: &[usize],
    policy: &GaussianPolicy,
    value: &ValueNet,
    hyper: &PpoHyper,
    mut grads: Option<(&mut [f64], &mut [f64])>,
) -> Result<LossReport> {
    if advantages.len() != batch.len() {
        return Err(Error::Structural("advantage count does not match batch".into()));
    }
    if indices.is_empty() {
        return Err(Error::Structural("empty minibatch".into()));
    }
    let n = indices.len() as f64;
    let log_std = policy.log_std();
    let inv_var = exp(-2.0 * log_std);
    let (lo, hi) = (1.0 - hyper.clip, 1.0 + hyper.clip);
    let mut r = LossReport::default();

    for &i in indices {
        let s = batch.samples.get(i).ok_or_else(|| Error::Structural("sample index out of range".into()))?;
        let a = advantages[i];
        let (x, z) = (&s.x_ext.x, s.x_ext.z);

        let (g, ptrace) = policy.mean_correction_traced(x, s.y_ref, z)?;
        let mean = s.prior + g;
        let logp = gaussian_log_prob(mean, log_std, s.u);
        let ratio = exp(logp - s.log_prob_old);
        let unclipped = ratio * a;
        let clipped = ratio.clamp(lo, hi) * a;
        r.policy -= unclipped.min(clipped);
        if ratio < lo || ratio > hi {
            r.clip_frac += 1.0;
        }
        r.approx_kl += s.log_prob_old - logp;

        let (v, vtrace) = value.value_traced(x, s.y_ref, z)?;
        let verr = v - batch.returns[i];
        r.value += verr * verr;

        if let Some((pg, vg)) = grads.as_mut() {
            // d(−min)/dρ is −A on the unclipped branch and 0 once clipped.
            let dloss_dratio = if unclipped <= clipped { -a / n } else { 0.0 };
            let dloss_dlogp = dloss_dratio * ratio;
            let diff = s.u - mean;
            let dlogp_dmean = diff * inv_var;
            let dlogp_dlogstd = diff * diff * inv_var - 1.0;
            policy.backward_mean(&ptrace, dloss_dlogp * dlogp_dmean, pg);
            let ls = policy.log_std_index();
            pg[ls] += dloss_dlogp * dlogp_dlogstd - hyper.c2 / n;
            value.backward(&vtrace, 2.0 * hyper.c1 * verr / n, vg);
        }
    }

    r.policy /= n;
    r.value /= n;
    r.clip_frac /= n;
    r.approx_kl /= n;
    r.entropy = gaussian_entropy(log_std);
    r.total = r.policy + hyper.c1 * r.value - hyper.c2 * r.entropy;

    for (term, v) in [("policy", r.policy), ("value", r.value), ("entropy", r.entropy)] {
        if !v.is_finite() {
            return Err(Error::NonFiniteLoss { term });
        }
    }
    if let Some((pg, vg)) = grads {
        check_gradient(pg)?;
        check_gradient(vg).map_err(|e| match e {
            Error::NonFiniteGradient { index } => Error::NonFiniteGradient { index: pg.len() + index },
            other => other,
        })?;
    }
    Ok(r)
}
