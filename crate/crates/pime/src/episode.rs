//! Closed-loop episodes.
//!
//! Each step: observe, extend with the integrator, compose the action mean
//! from the prior and the network correction, sample (or take the mean),
//! saturate, step the plant, score the new output, then integrate the new
//! error.

use pime_core::control::{extend, saturate, IntegratorState, PriorController};
use pime_core::envsim::{
    reward, sample_initial_state, sample_model, sample_setpoint, PlantModel, PlantState,
};
use pime_core::neuralnet::{GaussianPolicy, ValueNet};
use pime_core::ppo::{Episode, TransitionRecord};
use pime_core::rng::{substream, tag, StreamRng};

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};

/// Action law: optional prior plus optional learned correction.
#[derive(Debug, Clone, Copy)]
pub struct Controller<'a> {
    pub prior: Option<PriorController>,
    pub policy: Option<&'a GaussianPolicy>,
}

impl<'a> Controller<'a> {
    /// The composed controller a config describes, honoring `disable_prior`.
    pub fn from_config(cfg: &ExperimentConfig, policy: Option<&'a GaussianPolicy>) -> Self {
        let prior = (!cfg.ablation.disable_prior).then_some(cfg.prior);
        Controller { prior, policy }
    }

    pub fn prior_only(prior: PriorController) -> Self {
        Controller { prior: Some(prior), policy: None }
    }

    /// Prior term and full action mean.
    pub fn mean(&self, obs: &[f64], y_ref: f64, eps: f64, z: f64) -> pime_core::Result<(f64, f64)> {
        let prior = self.prior.map_or(0.0, |p| p.action(eps, z));
        let g = match self.policy {
            Some(p) => p.mean_correction(obs, y_ref, z)?,
            None => 0.0,
        };
        Ok((prior, prior + g))
    }
}

/// One logged step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub t: usize,
    /// Output the action was computed from.
    pub y: f64,
    pub y_ref: f64,
    /// Applied (saturated) input.
    pub u: f64,
    pub z: f64,
    pub reward: f64,
}

/// Model, initial state and set-point schedule of one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeSetup {
    pub model_id: u64,
    pub model: PlantModel,
    pub x0: PlantState,
    pub setpoints: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeOutput {
    pub trace: Vec<TraceRow>,
    pub episode: Episode,
}

impl EpisodeOutput {
    pub fn total_reward(&self) -> f64 {
        self.episode.total_reward()
    }
}

/// Where actions come from.
pub enum Sampling<'r> {
    /// Draw from the Gaussian policy.
    Stochastic(&'r mut StreamRng),
    /// Use the mean action.
    Deterministic,
}

/// Run `setup.setpoints.len()` steps. `noise_rng` feeds process noise when
/// the model has any. Simulation faults report the failing step.
pub fn run_episode(
    setup: &EpisodeSetup,
    ctrl: &Controller,
    integrator_bounds: (f64, f64),
    value: Option<&ValueNet>,
    mut sampling: Sampling,
    noise_rng: &mut StreamRng,
) -> Result<EpisodeOutput> {
    let model = &setup.model;
    let n = setup.setpoints.len();
    let mut trace = Vec::with_capacity(n);
    let mut transitions = Vec::with_capacity(n);
    let mut state = setup.x0;
    let mut integ = IntegratorState::new(integrator_bounds);
    let at = |step: usize| move |source: pime_core::Error| HarnessError::Episode { step, source };

    let mut y = model.output(&state).map_err(at(0))?;
    let mut obs = model.observe(&state).map_err(at(0))?;
    for (t, &y_ref) in setup.setpoints.iter().enumerate() {
        let z = integ.z;
        let eps = y_ref - y;
        let (prior, mean) = ctrl.mean(&obs, y_ref, eps, z).map_err(at(t))?;
        let (u, log_prob) = match (&mut sampling, ctrl.policy) {
            (Sampling::Stochastic(rng), Some(p)) => p.sample_action(mean, *rng),
            (_, Some(p)) => (mean, p.log_prob(mean, mean)),
            (_, None) => (mean, 0.0),
        };
        let applied = saturate(u, model.u_range());
        let v = match value {
            Some(v) => v.value(&obs, y_ref, z).map_err(at(t))?,
            None => 0.0,
        };
        let noise = model.draw_noise(noise_rng);
        state = model.step(&state, applied, noise.as_deref()).map_err(at(t))?;
        let y_next = model.output(&state).map_err(at(t))?;
        let r = reward(y_next, y_ref);
        integ = integ.update(y_ref - y_next).map_err(at(t))?;

        trace.push(TraceRow { t, y, y_ref, u: applied, z, reward: r });
        transitions.push(TransitionRecord {
            x_ext: extend(&obs, z),
            y_ref,
            prior,
            u,
            log_prob_old: log_prob,
            reward: r,
            value_pred: v,
            done: t + 1 == n,
        });
        y = y_next;
        obs = model.observe(&state).map_err(at(t))?;
    }
    let bootstrap_value = match (value, setup.setpoints.last()) {
        (Some(v), Some(&y_ref)) => v.value(&obs, y_ref, integ.z).map_err(at(n))?,
        _ => 0.0,
    };
    Ok(EpisodeOutput { trace, episode: Episode { transitions, bootstrap_value } })
}

/// The single model used by the `fix_single_model` ablation.
pub fn fixed_model(cfg: &ExperimentConfig) -> Result<PlantModel> {
    Ok(sample_model(&cfg.ensemble, &mut substream(cfg.seed, &[tag::FIXED_MODEL]))?)
}

/// Training episode `m` of `iteration`: set-point, model and initial state
/// come from one substream, which is returned for process noise. The same
/// (seed, iteration, m) always yields the same episode, whatever controller
/// runs it.
pub fn training_setup(
    cfg: &ExperimentConfig,
    iteration: usize,
    m: usize,
    fixed: Option<&PlantModel>,
) -> Result<(EpisodeSetup, StreamRng)> {
    let mut rng = substream(cfg.seed, &[tag::ENV, iteration as u64, m as u64]);
    let y_ref = sample_setpoint(&cfg.setpoint, &mut rng);
    let (model_id, model) = match fixed {
        Some(model) => (0, model.clone()),
        None => (
            (iteration * cfg.episodes_per_iteration + m) as u64,
            sample_model(&cfg.ensemble, &mut rng)?,
        ),
    };
    let x0 = sample_initial_state(cfg.plant, &cfg.reset, &mut rng);
    let setup = EpisodeSetup { model_id, model, x0, setpoints: vec![y_ref; cfg.horizon] };
    Ok((setup, rng))
}

/// Evaluation case `k`: a model and initial state drawn from the evaluation
/// substream of `eval_seed`, tracking the configured level trace.
pub fn eval_setup(cfg: &ExperimentConfig, eval_seed: u64, k: usize) -> Result<(EpisodeSetup, StreamRng)> {
    let mut rng = substream(eval_seed, &[tag::EVAL, k as u64]);
    let model = sample_model(&cfg.ensemble, &mut rng)?;
    let x0 = sample_initial_state(cfg.plant, &cfg.reset, &mut rng);
    let setup = EpisodeSetup { model_id: k as u64, model, x0, setpoints: cfg.setpoint.eval_schedule() };
    Ok((setup, rng))
}
