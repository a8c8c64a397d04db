use alloc::vec::Vec;
use rand::seq::SliceRandom;
use rand::Rng;

use super::loss::{ppo_loss_and_grad, LossReport};
use super::{normalize_advantages, PpoHyper, RolloutBatch};
use crate::neuralnet::{AdamState, GaussianPolicy, ValueNet};
use crate::{Error, Result};

/// Adam states for the policy and value networks.
#[derive(Debug, Clone, PartialEq)]
pub struct Optimizers {
    pub policy: AdamState,
    pub value: AdamState,
}

impl Optimizers {
    pub fn new(policy: &GaussianPolicy, value: &ValueNet, stepsize: f64) -> Self {
        Optimizers {
            policy: AdamState::new(policy.param_count(), stepsize),
            value: AdamState::new(value.param_count(), stepsize),
        }
    }
}

/// Loss components averaged over every minibatch step of an update.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct UpdateStats {
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub clip_frac: f64,
    pub approx_kl: f64,
    pub steps: usize,
}

/// `epochs` passes over `batch` in shuffled minibatches, one Adam step per
/// minibatch. Advantages are normalized once over the whole batch. On error
/// the networks and optimizer states are restored to their values on entry.
pub fn update<R: Rng + ?Sized>(
    policy: &mut GaussianPolicy,
    value: &mut ValueNet,
    batch: &RolloutBatch,
    hyper: &PpoHyper,
    opt: &mut Optimizers,
    rng: &mut R,
) -> Result<UpdateStats> {
    if batch.is_empty() {
        return Err(Error::Structural("empty rollout batch".into()));
    }
    let saved = (policy.params().to_vec(), value.params().to_vec(), opt.clone());
    let result = run_epochs(policy, value, batch, hyper, opt, rng);
    if result.is_err() {
        policy.set_params(&saved.0)?;
        value.set_params(&saved.1)?;
        *opt = saved.2;
    }
    result
}

fn run_epochs<R: Rng + ?Sized>(
    policy: &mut GaussianPolicy,
    value: &mut ValueNet,
    batch: &RolloutBatch,
    hyper: &PpoHyper,
    opt: &mut Optimizers,
    rng: &mut R,
) -> Result<UpdateStats> {
    let mut adv = batch.advantages.clone();
    normalize_advantages(&mut adv);
    let mut order: Vec<usize> = (0..batch.len()).collect();
    let mut pg = alloc::vec![0.0; policy.param_count()];
    let mut vg = alloc::vec![0.0; value.param_count()];
    let mut sum = LossReport::default();
    let mut stats = UpdateStats::default();

    for _ in 0..hyper.epochs {
        order.shuffle(rng);
        for mb in order.chunks(hyper.minibatch) {
            pg.fill(0.0);
            vg.fill(0.0);
            let r = ppo_loss_and_grad(batch, &adv, mb, policy, value, hyper, &mut pg, &mut vg)?;

            let mut p = policy.params().to_vec();
            opt.policy.step(&mut p, &pg)?;
            policy.set_params(&p)?;
            let mut v = value.params().to_vec();
            opt.value.step(&mut v, &vg)?;
            value.set_params(&v)?;

            sum.policy += r.policy;
            sum.value += r.value;
            sum.entropy += r.entropy;
            sum.clip_frac += r.clip_frac;
            sum.approx_kl += r.approx_kl;
            stats.steps += 1;
        }
    }
    let k = stats.steps as f64;
    stats.policy_loss = sum.policy / k;
    stats.value_loss = sum.value / k;
    stats.entropy = sum.entropy / k;
    stats.clip_frac = sum.clip_frac / k;
    stats.approx_kl = sum.approx_kl / k;
    Ok(stats)
}
