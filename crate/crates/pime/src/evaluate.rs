//! Deterministic evaluation on held-out ensemble draws.

use std::path::Path;

use pime_core::rng::StreamRng;
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::episode::{eval_setup, run_episode, Controller, EpisodeOutput, EpisodeSetup, Sampling};
use crate::error::Result;
use crate::io::{write_report, write_trajectories};
use crate::metrics::{trace_metrics, EvalReport};

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub report: EvalReport,
    /// One run per case, in case order.
    pub runs: Vec<(u64, EpisodeOutput)>,
}

impl Evaluation {
    /// `report.csv` and `trajectories.csv` under `dir`.
    pub fn write(&self, dir: &Path, seed: u64) -> Result<()> {
        crate::io::create_dir(dir)?;
        write_report(&dir.join("report.csv"), &self.report)?;
        write_trajectories(
            &dir.join("trajectories.csv"),
            seed,
            self.runs.iter().map(|(id, o)| (*id, o.trace.as_slice())),
        )
    }
}

/// `n_models` evaluation cases from the evaluation substreams of `eval_seed`.
pub fn eval_cases(cfg: &ExperimentConfig, eval_seed: u64, n_models: usize) -> Result<Vec<(EpisodeSetup, StreamRng)>> {
    (0..n_models).map(|k| eval_setup(cfg, eval_seed, k)).collect()
}

/// Run every case with the mean action and score it per segment.
pub fn evaluate_cases(
    cfg: &ExperimentConfig,
    ctrl: &Controller,
    cases: &[(EpisodeSetup, StreamRng)],
    label: &str,
) -> Result<Evaluation> {
    let runs: Vec<(u64, EpisodeOutput)> = cases
        .par_iter()
        .map(|(setup, noise)| {
            let mut noise = noise.clone();
            let out = run_episode(setup, ctrl, cfg.integrator, None, Sampling::Deterministic, &mut noise)?;
            Ok((setup.model_id, out))
        })
        .collect::<Result<_>>()?;
    let segments = runs
        .iter()
        .flat_map(|(id, o)| trace_metrics(*id, &o.trace, cfg.setpoint.segment_len, cfg.settle_band))
        .collect();
    Ok(Evaluation { report: EvalReport { label: label.to_string(), segments }, runs })
}

pub fn evaluate(
    cfg: &ExperimentConfig,
    ctrl: &Controller,
    n_models: usize,
    eval_seed: u64,
    label: &str,
) -> Result<Evaluation> {
    let cases = eval_cases(cfg, eval_seed, n_models)?;
    evaluate_cases(cfg, ctrl, &cases, label)
}

/// Mean |∂u/∂z| of the action mean over the states visited in `runs`, by
/// central differences with step `h`.
pub fn action_sensitivity(ctrl: &Controller, runs: &[(u64, EpisodeOutput)], h: f64) -> Result<f64> {
    let mut sum = 0.0;
    let mut n = 0usize;
    for (_, out) in runs {
        for tr in &out.episode.transitions {
            let (x, z) = (&tr.x_ext.x, tr.x_ext.z);
            let (_, up) = ctrl.mean(x, tr.y_ref, 0.0, z + h)?;
            let (_, dn) = ctrl.mean(x, tr.y_ref, 0.0, z - h)?;
            sum += ((up - dn) / (2.0 * h)).abs();
            n += 1;
        }
    }
    Ok(sum / n.max(1) as f64)
}
