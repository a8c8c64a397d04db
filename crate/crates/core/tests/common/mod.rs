#![allow(dead_code)]

use pime_core::control::extend;
use pime_core::neuralnet::{FeatureScaling, GaussianPolicy, NetSizes, ValueNet};
use pime_core::ppo::{RolloutBatch, TransitionRecord};
use pime_core::rng::{substream, StreamRng};
use rand::Rng;

pub fn tank_scaling() -> FeatureScaling {
    FeatureScaling {
        state: vec![(0.0, 25.0), (0.0, 25.0)],
        setpoint: (1.0, 12.0),
        z_bound: 25.0,
    }
}

/// Policy and value nets with every layer (including the zero-initialized
/// output layers) randomized.
pub fn random_nets(sizes: &NetSizes, value_hidden: &[usize], seed: u64) -> (GaussianPolicy, ValueNet) {
    let mut rng = substream(seed, &[]);
    let mut p = GaussianPolicy::new(tank_scaling(), sizes, 5.0, -0.3, (-8.0, 1.0), &mut rng).unwrap();
    let mut v = ValueNet::new(tank_scaling(), value_hidden, 10.0, &mut rng).unwrap();
    let n = p.param_count();
    let pp: Vec<f64> = p
        .params()
        .iter()
        .enumerate()
        .map(|(i, w)| if i + 1 == n { *w } else { w + 0.3 * (rng.random::<f64>() - 0.5) })
        .collect();
    p.set_params(&pp).unwrap();
    let vp: Vec<f64> = v.params().iter().map(|w| w + 0.3 * (rng.random::<f64>() - 0.5)).collect();
    v.set_params(&vp).unwrap();
    (p, v)
}

/// Synthetic on-policy batch: actions drawn from `policy`, random
/// advantages and targets.
pub fn synthetic_batch(policy: &GaussianPolicy, n: usize, rng: &mut StreamRng) -> RolloutBatch {
    let mut samples = Vec::with_capacity(n);
    for _ in 0..n {
        let x = [25.0 * rng.random::<f64>(), 25.0 * rng.random::<f64>()];
        let y_ref = 1.0 + 11.0 * rng.random::<f64>();
        let z = 50.0 * rng.random::<f64>() - 25.0;
        let prior = 0.5 * (y_ref - x[1]);
        let mean = prior + policy.mean_correction(&x, y_ref, z).unwrap();
        let (u, lp) = policy.sample_action(mean, rng);
        samples.push(TransitionRecord {
            x_ext: extend(&x, z),
            y_ref,
            prior,
            u,
            log_prob_old: lp,
            reward: -(x[1] - y_ref).powi(2),
            value_pred: 0.0,
            done: false,
        });
    }
    RolloutBatch {
        advantages: (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect(),
        returns: (0..n).map(|_| -5.0 * rng.random::<f64>()).collect(),
        samples,
    }
}
