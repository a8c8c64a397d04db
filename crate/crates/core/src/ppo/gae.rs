use alloc::vec::Vec;

use crate::math::sqrt;
use crate::{Error, Result};

/// Generalized advantage estimation over one episode.
///
/// `values[t]` is `V(s_t)`; `bootstrap` is `V(s_T)` (or 0 for a terminal
/// state). Returns `(advantages, value targets)` with targets `A_t + V_t`.
pub fn compute_gae(
    rewards: &[f64],
    values: &[f64],
    bootstrap: f64,
    gamma: f64,
    lambda: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if rewards.len() != values.len() {
        return Err(Error::Structural(alloc::format!(
            "{} rewards but {} values",
            rewards.len(),
            values.len()
        )));
    }
    let n = rewards.len();
    let mut adv = alloc::vec![0.0; n];
    let mut running = 0.0;
    let mut next_value = bootstrap;
    for t in (0..n).rev() {
        let delta = rewards[t] + gamma * next_value - values[t];
        running = delta + gamma * lambda * running;
        adv[t] = running;
        next_value = values[t];
    }
    let ret = adv.iter().zip(values).map(|(a, v)| a + v).collect();
    Ok((adv, ret))
}

/// `Σ_k γ^k r_k`.
pub fn discounted_return(rewards: &[f64], gamma: f64) -> f64 {
    rewards.iter().rev().fold(0.0, |acc, r| r + gamma * acc)
}

/// Shift to zero mean and scale to unit (population) standard deviation.
/// Batches with fewer than two samples or zero spread are only centred.
pub fn normalize_advantages(adv: &mut [f64]) {
    if adv.is_empty() {
        return;
    }
    let n = adv.len() as f64;
    let mean = adv.iter().sum::<f64>() / n;
    adv.iter_mut().for_each(|a| *a -= mean);
    let std = sqrt(adv.iter().map(|a| a * a).sum::<f64>() / n);
    if adv.len() > 1 && std > 1e-12 {
        adv.iter_mut().for_each(|a| *a /= std);
    }
}
