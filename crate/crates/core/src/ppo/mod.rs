//! Proximal policy optimization: advantage estimation, the clipped surrogate
//! objective and the epoch/minibatch update driver.

mod gae;
mod loss;
mod update;

pub use gae::{compute_gae, discounted_return, normalize_advantages};
pub use loss::{ppo_loss, ppo_loss_and_grad, LossReport};
pub use update::{update, Optimizers, UpdateStats};

use alloc::vec::Vec;

use crate::control::ExtendedState;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PpoHyper {
    /// Clipping parameter ε.
    pub clip: f64,
    pub gamma: f64,
    pub lambda: f64,
    /// Value-loss weight.
    pub c1: f64,
    /// Entropy-bonus weight.
    pub c2: f64,
    pub epochs: usize,
    pub minibatch: usize,
    /// Adam stepsize for both networks.
    pub stepsize: f64,
}

impl PpoHyper {
    pub fn tanks() -> Self {
        PpoHyper {
            clip: 0.2,
            gamma: 0.995,
            lambda: 0.97,
            c1: 1.0,
            c2: 0.02,
            epochs: 10,
            minibatch: 256,
            stepsize: 3e-4,
        }
    }

    pub fn ph() -> Self {
        PpoHyper {
            gamma: 0.98,
            epochs: 40,
            minibatch: 128,
            ..Self::tanks()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.clip > 0.0
            && self.clip < 1.0
            && (0.0..=1.0).contains(&self.gamma)
            && (0.0..=1.0).contains(&self.lambda)
            && self.c1 >= 0.0
            && self.c2 >= 0.0
            && self.epochs >= 1
            && self.minibatch >= 1
            && self.stepsize > 0.0;
        if ok {
            Ok(())
        } else {
            Err(crate::Error::InvalidSpec(alloc::format!("invalid PPO hyperparameters {self:?}")))
        }
    }
}

/// One environment step of experience.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionRecord {
    pub x_ext: ExtendedState,
    pub y_ref: f64,
    /// Prior action κ at this state; zero when the prior is disabled.
    pub prior: f64,
    /// Sampled (unsaturated) action.
    pub u: f64,
    pub log_prob_old: f64,
    pub reward: f64,
    pub value_pred: f64,
    pub done: bool,
}

/// Transitions of one episode in time order, plus `V(x̃_T)` for the state
/// reached after the last step.
#[derive(Debug, Clone, PartialEq)]
pub struct Episode {
    pub transitions: Vec<TransitionRecord>,
    pub bootstrap_value: f64,
}

impl Episode {
    pub fn total_reward(&self) -> f64 {
        self.transitions.iter().map(|t| t.reward).sum()
    }
}

/// Concatenated episodes with advantages and value targets computed per
/// episode, before any shuffling.
#[derive(Debug, Clone, PartialEq)]
pub struct RolloutBatch {
    pub samples: Vec<TransitionRecord>,
    pub advantages: Vec<f64>,
    pub returns: Vec<f64>,
}

impl RolloutBatch {
    /// Episodes are concatenated in the order given.
    pub fn from_episodes(episodes: &[Episode], gamma: f64, lambda: f64) -> Result<Self> {
        let mut batch = RolloutBatch {
            samples: Vec::new(),
            advantages: Vec::new(),
            returns: Vec::new(),
        };
        for ep in episodes {
            let rewards: Vec<f64> = ep.transitions.iter().map(|t| t.reward).collect();
            let values: Vec<f64> = ep.transitions.iter().map(|t| t.value_pred).collect();
            let (adv, ret) = compute_gae(&rewards, &values, ep.bootstrap_value, gamma, lambda)?;
            batch.samples.extend(ep.transitions.iter().cloned());
            batch.advantages.extend(adv);
            batch.returns.extend(ret);
        }
        Ok(batch)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}
