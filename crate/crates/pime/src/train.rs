//! Training loop: per iteration, M episodes over fresh (set-point, model)
//! pairs, then one PPO update on the concatenated batch.

use std::path::{Path, PathBuf};

use pime_core::envsim::PlantModel;
use pime_core::neuralnet::{GaussianPolicy, ValueNet};
use pime_core::ppo::{update, Episode, Optimizers, RolloutBatch};
use pime_core::rng::{substream, tag};
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::episode::{fixed_model, run_episode, training_setup, Controller, EpisodeOutput, Sampling};
use crate::error::Result;
use crate::io::{create_dir, save_weights, write_text, DiagnosticsWriter};
use crate::metrics::summarize;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRow {
    pub iteration: usize,
    /// Environment steps collected up to and including this iteration.
    pub env_steps: usize,
    /// Undiscounted episode returns of this iteration's rollouts.
    pub mean_return: f64,
    pub std_return: f64,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub clip_frac: f64,
    pub approx_kl: f64,
    /// Exploration standard deviation after the update.
    pub sigma: f64,
}

pub struct Trainer {
    pub cfg: ExperimentConfig,
    pub policy: GaussianPolicy,
    pub value: ValueNet,
    pub opt: Optimizers,
    pub fixed: Option<PlantModel>,
    pub iteration: usize,
}

impl Trainer {
    pub fn new(cfg: ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let (policy, value) = cfg.build_networks()?;
        let opt = Optimizers::new(&policy, &value, cfg.ppo.stepsize);
        let fixed = if cfg.ablation.fix_single_model { Some(fixed_model(&cfg)?) } else { None };
        Ok(Trainer { cfg, policy, value, opt, fixed, iteration: 0 })
    }

    /// The M episodes of `iteration` under the current policy, in index
    /// order. Episodes run in parallel on independent substreams.
    pub fn collect(&self, iteration: usize) -> Result<Vec<(u64, EpisodeOutput)>> {
        let cfg = &self.cfg;
        let ctrl = Controller::from_config(cfg, Some(&self.policy));
        (0..cfg.episodes_per_iteration)
            .into_par_iter()
            .map(|m| {
                let (setup, mut noise) = training_setup(cfg, iteration, m, self.fixed.as_ref())?;
                let mut act = substream(cfg.seed, &[tag::ACTION, iteration as u64, m as u64]);
                let out = run_episode(
                    &setup,
                    &ctrl,
                    cfg.integrator,
                    Some(&self.value),
                    Sampling::Stochastic(&mut act),
                    &mut noise,
                )?;
                Ok((setup.model_id, out))
            })
            .collect()
    }

    /// Collect and update once.
    pub fn step(&mut self) -> Result<DiagnosticsRow> {
        let it = self.iteration;
        let outputs = self.collect(it)?;
        let returns: Vec<f64> = outputs.iter().map(|(_, o)| o.total_reward()).collect();
        let episodes: Vec<Episode> = outputs.into_iter().map(|(_, o)| o.episode).collect();
        let h = &self.cfg.ppo;
        let batch = RolloutBatch::from_episodes(&episodes, h.gamma, h.lambda)?;
        let mut rng = substream(self.cfg.seed, &[tag::SHUFFLE, it as u64]);
        let stats = update(&mut self.policy, &mut self.value, &batch, h, &mut self.opt, &mut rng)?;
        let s = summarize(&returns);
        self.iteration += 1;
        Ok(DiagnosticsRow {
            iteration: it,
            env_steps: self.iteration * self.cfg.steps_per_iteration(),
            mean_return: s.mean,
            std_return: s.std,
            policy_loss: stats.policy_loss,
            value_loss: stats.value_loss,
            entropy: stats.entropy,
            clip_frac: stats.clip_frac,
            approx_kl: stats.approx_kl,
            sigma: self.policy.sigma(),
        })
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub policy: GaussianPolicy,
    pub value: ValueNet,
    pub diagnostics: Vec<DiagnosticsRow>,
}

impl TrainOutcome {
    /// Mean of the per-iteration mean returns over the last `n` iterations.
    pub fn final_mean_return(&self, n: usize) -> f64 {
        let tail = &self.diagnostics[self.diagnostics.len().saturating_sub(n)..];
        tail.iter().map(|d| d.mean_return).sum::<f64>() / tail.len().max(1) as f64
    }
}

/// Files a training run writes under its output directory.
pub struct RunFiles {
    pub dir: PathBuf,
}

impl RunFiles {
    pub fn config(&self) -> PathBuf {
        self.dir.join("config.txt")
    }
    pub fn diagnostics(&self) -> PathBuf {
        self.dir.join("diagnostics.csv")
    }
    pub fn checkpoint(&self, iterations_done: usize) -> PathBuf {
        self.dir.join("checkpoints").join(format!("iter_{iterations_done:05}.pime"))
    }
    pub fn final_weights(&self) -> PathBuf {
        self.dir.join("policy.pime")
    }
}

/// Run the whole schedule. With `out`, the effective config, diagnostics,
/// checkpoints and final weights are written there; an error leaves the
/// last checkpoint and the diagnostics up to the failing iteration in place.
pub fn train(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<TrainOutcome> {
    let mut trainer = Trainer::new(cfg.clone())?;
    let files = out.map(|d| RunFiles { dir: d.to_path_buf() });
    let mut writer = match &files {
        Some(f) => {
            create_dir(&f.dir.join("checkpoints"))?;
            write_text(&f.config(), &cfg.to_text())?;
            Some(DiagnosticsWriter::create(&f.diagnostics())?)
        }
        None => None,
    };
    let mut diagnostics = Vec::with_capacity(cfg.iterations());
    for _ in 0..cfg.iterations() {
        let row = trainer.step()?;
        if let Some(w) = writer.as_mut() {
            w.write(&row)?;
        }
        diagnostics.push(row);
        if let Some(f) = &files {
            if trainer.iteration % cfg.checkpoint_every == 0 {
                save_weights(&f.checkpoint(trainer.iteration), &trainer.policy, &trainer.value)?;
            }
        }
    }
    if let Some(f) = &files {
        save_weights(&f.final_weights(), &trainer.policy, &trainer.value)?;
    }
    Ok(TrainOutcome { policy: trainer.policy, value: trainer.value, diagnostics })
}
