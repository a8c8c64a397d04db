//! Experiment configuration.
//!
//! The file format is flat `key = value` text. Keys use dotted sections
//! (`ppo.gamma`), lists are whitespace separated, `#` starts a comment.
//! Keys that are absent take the per-plant defaults; unknown keys are an
//! error. [`ExperimentConfig::to_text`] writes every key, so its output is
//! a complete, re-loadable record of a run.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use pime_core::control::PriorController;
use pime_core::envsim::{EnsembleSpec, ParamRange, PlantKind, ResetSpec, SetpointSpec};
use pime_core::neuralnet::{FeatureScaling, GaussianPolicy, NetSizes, ValueNet};
use pime_core::ppo::PpoHyper;
use pime_core::rng::{substream, tag};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyConfig {
    pub sizes: NetSizes,
    /// Multiplier on the network correction.
    pub action_scale: f64,
    pub log_std_init: f64,
    pub log_std_bounds: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValueConfig {
    pub hidden: Vec<usize>,
    /// Multiplier on the value network output.
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Normalization {
    /// Expected range of each observed state component.
    pub state: Vec<(f64, f64)>,
    pub setpoint: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Ablation {
    /// Drop the prior controller from the action mean.
    pub disable_prior: bool,
    /// Train on one sampled model instead of a fresh draw per episode.
    pub fix_single_model: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub plant: PlantKind,
    pub seed: u64,
    /// Steps per episode.
    pub horizon: usize,
    pub episodes_per_iteration: usize,
    pub total_steps: usize,
    pub checkpoint_every: usize,
    pub out_dir: PathBuf,
    pub ensemble: EnsembleSpec,
    pub setpoint: SetpointSpec,
    pub reset: ResetSpec,
    pub prior: PriorController,
    pub integrator: (f64, f64),
    pub ppo: PpoHyper,
    pub policy: PolicyConfig,
    pub value: ValueConfig,
    pub normalization: Normalization,
    pub ablation: Ablation,
    /// Band around the set-point used for settling time.
    pub settle_band: f64,
}

impl ExperimentConfig {
    pub fn tanks() -> Self {
        ExperimentConfig {
            plant: PlantKind::CascadedTanks,
            seed: 0,
            horizon: 200,
            episodes_per_iteration: 5,
            total_steps: 400_000,
            checkpoint_every: 10,
            out_dir: PathBuf::from("runs/tanks"),
            ensemble: EnsembleSpec::tanks_default(),
            setpoint: SetpointSpec::tanks_default(),
            reset: ResetSpec::default_for(PlantKind::CascadedTanks),
            prior: PriorController::p(0.5),
            integrator: (-25.0, 25.0),
            ppo: PpoHyper::tanks(),
            policy: PolicyConfig {
                sizes: NetSizes::default(),
                action_scale: 5.0,
                log_std_init: (0.05f64 * 10.0).ln(),
                log_std_bounds: (-8.0, 1.0),
            },
            value: ValueConfig { hidden: vec![64, 64], scale: 1000.0 },
            normalization: Normalization { state: vec![(0.0, 25.0), (0.0, 25.0)], setpoint: (1.0, 12.0) },
            ablation: Ablation::default(),
            settle_band: 0.3,
        }
    }

    pub fn ph() -> Self {
        ExperimentConfig {
            plant: PlantKind::PhNeutralization,
            seed: 0,
            horizon: 50,
            episodes_per_iteration: 5,
            total_steps: 400_000,
            checkpoint_every: 10,
            out_dir: PathBuf::from("runs/ph"),
            ensemble: EnsembleSpec::ph_default(),
            setpoint: SetpointSpec::ph_default(),
            reset: ResetSpec::default_for(PlantKind::PhNeutralization),
            prior: PriorController::pi(-0.001, -0.00005),
            integrator: (-25.0, 25.0),
            ppo: PpoHyper::ph(),
            policy: PolicyConfig {
                sizes: NetSizes::default(),
                action_scale: 0.005,
                log_std_init: (0.05f64 * 0.01).ln(),
                log_std_bounds: (-8.0, 1.0),
            },
            value: ValueConfig { hidden: vec![64, 64], scale: 100.0 },
            normalization: Normalization { state: vec![(1.0, 13.0)], setpoint: (4.0, 10.0) },
            ablation: Ablation::default(),
            settle_band: 0.3,
        }
    }

    pub fn default_for(plant: PlantKind) -> Self {
        match plant {
            PlantKind::CascadedTanks => Self::tanks(),
            PlantKind::PhNeutralization => Self::ph(),
        }
    }

    pub fn steps_per_iteration(&self) -> usize {
        self.horizon * self.episodes_per_iteration
    }

    pub fn iterations(&self) -> usize {
        self.total_steps / self.steps_per_iteration()
    }

    pub fn scaling(&self) -> FeatureScaling {
        FeatureScaling {
            state: self.normalization.state.clone(),
            setpoint: self.normalization.setpoint,
            z_bound: self.integrator.0.abs().max(self.integrator.1.abs()),
        }
    }

    /// Fresh policy and value networks drawn from the run's init substream.
    pub fn build_networks(&self) -> Result<(GaussianPolicy, ValueNet)> {
        let mut rng = substream(self.seed, &[tag::INIT]);
        let p = &self.policy;
        let policy = GaussianPolicy::new(
            self.scaling(),
            &p.sizes,
            p.action_scale,
            p.log_std_init,
            p.log_std_bounds,
            &mut rng,
        )?;
        let value = ValueNet::new(self.scaling(), &self.value.hidden, self.value.scale, &mut rng)?;
        Ok((policy, value))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |d: String| Err(HarnessError::config("config", d));
        if self.horizon == 0 || self.episodes_per_iteration == 0 {
            return bad("horizon and episodes_per_iteration must be positive".into());
        }
        let block = self.steps_per_iteration();
        if self.total_steps == 0 || self.total_steps % block != 0 {
            return bad(format!(
                "total_steps = {} is not a positive multiple of horizon * episodes_per_iteration = {block}",
                self.total_steps
            ));
        }
        if self.checkpoint_every == 0 {
            return bad("checkpoint_every must be at least 1".into());
        }
        if self.ensemble.kind != self.plant {
            return bad("ensemble plant kind differs from `plant`".into());
        }
        self.ensemble.validate()?;
        self.setpoint.validate()?;
        self.prior.validate()?;
        self.ppo.validate()?;
        let (zlo, zhi) = self.integrator;
        if !(zlo.is_finite() && zhi.is_finite() && zlo <= 0.0 && 0.0 <= zhi && zlo < zhi) {
            return bad(format!("integrator bounds ({zlo}, {zhi}) must be finite and contain 0"));
        }
        if !(self.reset.lo <= self.reset.hi) {
            return bad(format!("reset interval [{}, {}] is empty", self.reset.lo, self.reset.hi));
        }
        if self.normalization.state.len() != self.plant.observation_dim() {
            return bad(format!(
                "normalization.state needs {} ranges for plant {}",
                self.plant.observation_dim(),
                self.plant
            ));
        }
        self.scaling().validate()?;
        let p = &self.policy;
        let (lo, hi) = p.log_std_bounds;
        if !(lo < hi && (lo..=hi).contains(&p.log_std_init)) {
            return bad(format!("log_std_init {} outside bounds [{lo}, {hi}]", p.log_std_init));
        }
        if !(p.action_scale > 0.0 && p.action_scale.is_finite()) {
            return bad("policy.action_scale must be positive".into());
        }
        if !(self.value.scale > 0.0 && self.value.scale.is_finite()) {
            return bad("value.scale must be positive".into());
        }
        if [&p.sizes.main, &p.sizes.z, &p.sizes.trunk, &self.value.hidden]
            .iter()
            .any(|s| s.is_empty() || s.contains(&0))
        {
            return bad("layer lists must be non-empty with positive widths".into());
        }
        if !(self.settle_band > 0.0) {
            return bad("eval.settle_band must be positive".into());
        }
        Ok(())
    }

    /// Every key with its current value, in file order.
    pub fn entries(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = Vec::new();
        let mut put = |k: &str, v: String| out.push((k.to_string(), v));
        put("plant", self.plant.to_string());
        put("seed", self.seed.to_string());
        put("horizon", self.horizon.to_string());
        put("episodes_per_iteration", self.episodes_per_iteration.to_string());
        put("total_steps", self.total_steps.to_string());
        put("checkpoint_every", self.checkpoint_every.to_string());
        put("out_dir", self.out_dir.display().to_string());
        put("plant.dt", self.ensemble.dt.to_string());
        put("plant.substeps", self.ensemble.substeps.to_string());
        put("plant.noise_std", join(&self.ensemble.noise_std));
        for &name in self.plant.param_names() {
            let v = if let Some(r) = self.ensemble.ranges.iter().find(|r| r.name == name) {
                format!("{} {}", r.lo, r.hi)
            } else if let Some((_, v)) = self.ensemble.fixed.iter().find(|(n, _)| n == name) {
                v.to_string()
            } else {
                continue;
            };
            put(&format!("ensemble.{name}"), v);
        }
        put("setpoint.lo", self.setpoint.lo.to_string());
        put("setpoint.hi", self.setpoint.hi.to_string());
        put("setpoint.eval_levels", join(&self.setpoint.eval_levels));
        put("setpoint.segment_len", self.setpoint.segment_len.to_string());
        put("reset.lo", self.reset.lo.to_string());
        put("reset.hi", self.reset.hi.to_string());
        put("prior.kp", self.prior.kp.to_string());
        put("prior.ki", self.prior.ki.to_string());
        put("integrator.min", self.integrator.0.to_string());
        put("integrator.max", self.integrator.1.to_string());
        let h = &self.ppo;
        put("ppo.clip", h.clip.to_string());
        put("ppo.gamma", h.gamma.to_string());
        put("ppo.lambda", h.lambda.to_string());
        put("ppo.c1", h.c1.to_string());
        put("ppo.c2", h.c2.to_string());
        put("ppo.epochs", h.epochs.to_string());
        put("ppo.minibatch", h.minibatch.to_string());
        put("ppo.stepsize", h.stepsize.to_string());
        let p = &self.policy;
        put("policy.main", join(&p.sizes.main));
        put("policy.z", join(&p.sizes.z));
        put("policy.trunk", join(&p.sizes.trunk));
        put("policy.action_scale", p.action_scale.to_string());
        put("policy.log_std_init", p.log_std_init.to_string());
        put("policy.log_std_min", p.log_std_bounds.0.to_string());
        put("policy.log_std_max", p.log_std_bounds.1.to_string());
        put("value.hidden", join(&self.value.hidden));
        put("value.scale", self.value.scale.to_string());
        let flat: Vec<f64> = self.normalization.state.iter().flat_map(|&(a, b)| [a, b]).collect();
        put("normalization.state", join(&flat));
        let (a, b) = self.normalization.setpoint;
        put("normalization.setpoint", format!("{a} {b}"));
        put("ablation.disable_prior", self.ablation.disable_prior.to_string());
        put("ablation.fix_single_model", self.ablation.fix_single_model.to_string());
        put("eval.settle_band", self.settle_band.to_string());
        out
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.entries() {
            s.push_str(&format!("{k} = {v}\n"));
        }
        s
    }

    /// Apply one key. `Ok(false)` means the key is unknown.
    fn set(&mut self, key: &str, v: &str) -> std::result::Result<bool, String> {
        match key {
            "plant" => {
                // Read up front by `parse`; only checked here.
                let _: PlantKind = one(v)?;
            }
            "seed" => self.seed = one(v)?,
            "horizon" => self.horizon = one(v)?,
            "episodes_per_iteration" => self.episodes_per_iteration = one(v)?,
            "total_steps" => self.total_steps = one(v)?,
            "checkpoint_every" => self.checkpoint_every = one(v)?,
            "out_dir" => self.out_dir = PathBuf::from(v),
            "plant.dt" => self.ensemble.dt = one(v)?,
            "plant.substeps" => self.ensemble.substeps = one(v)?,
            "plant.noise_std" => self.ensemble.noise_std = list(v)?,
            "setpoint.lo" => self.setpoint.lo = one(v)?,
            "setpoint.hi" => self.setpoint.hi = one(v)?,
            "setpoint.eval_levels" => self.setpoint.eval_levels = list(v)?,
            "setpoint.segment_len" => self.setpoint.segment_len = one(v)?,
            "reset.lo" => self.reset.lo = one(v)?,
            "reset.hi" => self.reset.hi = one(v)?,
            "prior.kp" => self.prior = PriorController::from_gains(one(v)?, self.prior.ki).map_err(|e| e.to_string())?,
            "prior.ki" => self.prior = PriorController::from_gains(self.prior.kp, one(v)?).map_err(|e| e.to_string())?,
            "integrator.min" => self.integrator.0 = one(v)?,
            "integrator.max" => self.integrator.1 = one(v)?,
            "ppo.clip" => self.ppo.clip = one(v)?,
            "ppo.gamma" => self.ppo.gamma = one(v)?,
            "ppo.lambda" => self.ppo.lambda = one(v)?,
            "ppo.c1" => self.ppo.c1 = one(v)?,
            "ppo.c2" => self.ppo.c2 = one(v)?,
            "ppo.epochs" => self.ppo.epochs = one(v)?,
            "ppo.minibatch" => self.ppo.minibatch = one(v)?,
            "ppo.stepsize" => self.ppo.stepsize = one(v)?,
            "policy.main" => self.policy.sizes.main = list(v)?,
            "policy.z" => self.policy.sizes.z = list(v)?,
            "policy.trunk" => self.policy.sizes.trunk = list(v)?,
            "policy.action_scale" => self.policy.action_scale = one(v)?,
            "policy.log_std_init" => self.policy.log_std_init = one(v)?,
            "policy.log_std_min" => self.policy.log_std_bounds.0 = one(v)?,
            "policy.log_std_max" => self.policy.log_std_bounds.1 = one(v)?,
            "value.hidden" => self.value.hidden = list(v)?,
            "value.scale" => self.value.scale = one(v)?,
            "normalization.state" => {
                let flat: Vec<f64> = list(v)?;
                if flat.len() % 2 != 0 {
                    return Err("expected lo/hi pairs".into());
                }
                self.normalization.state = flat.chunks_exact(2).map(|c| (c[0], c[1])).collect();
            }
            "normalization.setpoint" => self.normalization.setpoint = pair(v)?,
            "ablation.disable_prior" => self.ablation.disable_prior = one(v)?,
            "ablation.fix_single_model" => self.ablation.fix_single_model = one(v)?,
            "eval.settle_band" => self.settle_band = one(v)?,
            _ => {
                let Some(name) = key.strip_prefix("ensemble.") else { return Ok(false) };
                if !self.plant.param_names().contains(&name) {
                    return Ok(false);
                }
                self.set_ensemble_param(name, v)?;
            }
        }
        Ok(true)
    }

    fn set_ensemble_param(&mut self, name: &str, v: &str) -> std::result::Result<(), String> {
        let e = &mut self.ensemble;
        e.ranges.retain(|r| r.name != name);
        e.fixed.retain(|(n, _)| n != name);
        let vals: Vec<f64> = list(v)?;
        match vals[..] {
            [x] => e.fixed.push((name.to_string(), x)),
            [lo, hi] => e.ranges.push(ParamRange { name: name.to_string(), lo, hi }),
            _ => return Err("expected a value or a `lo hi` range".into()),
        }
        let order = |n: &str| self.plant.param_names().iter().position(|p| *p == n);
        e.ranges.sort_by_key(|r| order(&r.name));
        e.fixed.sort_by_key(|(n, _)| order(n));
        Ok(())
    }

    /// Parse config text. `origin` names the source in error messages.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut entries: Vec<(usize, &str, &str)> = Vec::new();
        let mut seen = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(HarnessError::config(origin, format!("line {}: expected `key = value`", i + 1)));
            };
            let (k, v) = (k.trim(), v.trim());
            if let Some(prev) = seen.insert(k, i + 1) {
                return Err(HarnessError::config(
                    origin,
                    format!("line {}: `{k}` already set on line {prev}", i + 1),
                ));
            }
            entries.push((i + 1, k, v));
        }
        let plant = match entries.iter().find(|(_, k, _)| *k == "plant") {
            Some((line, _, v)) => v
                .parse::<PlantKind>()
                .map_err(|e| HarnessError::config(origin, format!("line {line}: {e}")))?,
            None => PlantKind::CascadedTanks,
        };
        let mut cfg = Self::default_for(plant);
        let mut unknown = Vec::new();
        for (line, k, v) in entries {
            match cfg.set(k, v) {
                Ok(true) => {}
                Ok(false) => unknown.push(k.to_string()),
                Err(e) => return Err(HarnessError::config(origin, format!("line {line}: `{k}`: {e}"))),
            }
        }
        if !unknown.is_empty() {
            return Err(HarnessError::config(origin, format!("unknown keys: {}", unknown.join(", "))));
        }
        cfg.validate().map_err(|e| match e {
            HarnessError::Config { detail, .. } => HarnessError::config(origin, detail),
            other => HarnessError::config(origin, other.to_string()),
        })?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }
}

fn one<T: FromStr>(v: &str) -> std::result::Result<T, String>
where
    T::Err: Display,
{
    v.parse::<T>().map_err(|e| format!("bad value `{v}`: {e}"))
}

fn list<T: FromStr>(v: &str) -> std::result::Result<Vec<T>, String>
where
    T::Err: Display,
{
    v.split_whitespace().map(one).collect()
}

fn pair(v: &str) -> std::result::Result<(f64, f64), String> {
    match list::<f64>(v)?[..] {
        [a, b] => Ok((a, b)),
        _ => Err("expected two values".into()),
    }
}

fn join<T: Display>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}
