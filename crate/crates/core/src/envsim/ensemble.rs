use alloc::string::String;
use alloc::vec::Vec;
use rand::Rng;

use super::{PlantKind, PlantModel, PlantParams, PlantState};
use crate::{Error, Result};

/// Uniform interval for one randomized dynamics parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamRange {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
}

/// Distribution over plant models: independent uniform draws for the
/// randomized parameters, fixed values for the rest.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSpec {
    pub kind: PlantKind,
    pub ranges: Vec<ParamRange>,
    pub fixed: Vec<(String, f64)>,
    pub dt: f64,
    pub substeps: usize,
    pub noise_std: Vec<f64>,
}

impl EnsembleSpec {
    pub fn tanks_default() -> Self {
        let range = |name: &str, lo, hi| ParamRange { name: name.into(), lo, hi };
        EnsembleSpec {
            kind: PlantKind::CascadedTanks,
            ranges: alloc::vec![
                range("p1", 0.0015, 0.0024),
                range("p2", 0.0015, 0.0024),
                range("p3", 0.07, 0.17),
            ],
            fixed: alloc::vec![
                ("g".into(), 981.0),
                ("l_max".into(), 25.0),
                ("u_min".into(), 0.0),
                ("u_max".into(), 10.0),
            ],
            dt: 2.0,
            substeps: 1,
            noise_std: alloc::vec![0.0; 2],
        }
    }

    pub fn ph_default() -> Self {
        let range = |name: &str, lo, hi| ParamRange { name: name.into(), lo, hi };
        EnsembleSpec {
            kind: PlantKind::PhNeutralization,
            ranges: alloc::vec![range("p1", 0.005, 0.015), range("p2", 0.0015, 0.0025)],
            fixed: alloc::vec![
                ("nh3".into(), 0.01),
                ("naoh".into(), 0.01),
                ("k_eq".into(), 5.62e-10),
                ("kw".into(), 1e-14),
                ("hcl_max".into(), 0.05),
                ("u_min".into(), 0.0),
                ("u_max".into(), 0.01),
            ],
            dt: 20.0,
            substeps: 1,
            noise_std: alloc::vec![0.0; 1],
        }
    }

    pub fn default_for(kind: PlantKind) -> Self {
        match kind {
            PlantKind::CascadedTanks => Self::tanks_default(),
            PlantKind::PhNeutralization => Self::ph_default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for r in &self.ranges {
            if !(r.lo < r.hi) || !r.lo.is_finite() || !r.hi.is_finite() {
                return Err(Error::InvalidSpec(alloc::format!(
                    "range for `{}` must satisfy lower < upper, got [{}, {}]",
                    r.name, r.lo, r.hi
                )));
            }
        }
        for name in self.kind.param_names() {
            let n = self.ranges.iter().filter(|r| r.name == *name).count()
                + self.fixed.iter().filter(|(f, _)| f == name).count();
            if n != 1 {
                return Err(Error::InvalidSpec(alloc::format!(
                    "parameter `{name}` must be either ranged or fixed exactly once (found {n})"
                )));
            }
        }
        let known = |n: &str| self.kind.param_names().contains(&n);
        if let Some(r) = self.ranges.iter().find(|r| !known(&r.name)) {
            return Err(Error::InvalidSpec(alloc::format!("unknown parameter `{}`", r.name)));
        }
        if let Some((n, _)) = self.fixed.iter().find(|(n, _)| !known(n)) {
            return Err(Error::InvalidSpec(alloc::format!("unknown parameter `{n}`")));
        }
        // Check the model built from range midpoints.
        let mid: Vec<(&str, f64)> = self.values_with(|r| 0.5 * (r.lo + r.hi));
        let params = PlantParams::from_values(self.kind, &mid)?;
        self.model_from(params).validate()
    }

    /// The deterministic model at the centre of every range.
    pub fn nominal(&self) -> Result<PlantModel> {
        let mid = self.values_with(|r| 0.5 * (r.lo + r.hi));
        Ok(self.model_from(PlantParams::from_values(self.kind, &mid)?))
    }

    fn values_with(&self, mut pick: impl FnMut(&ParamRange) -> f64) -> Vec<(&str, f64)> {
        self.kind
            .param_names()
            .iter()
            .filter_map(|name| {
                if let Some(r) = self.ranges.iter().find(|r| r.name == *name) {
                    Some((*name, pick(r)))
                } else {
                    self.fixed.iter().find(|(f, _)| f == name).map(|&(_, v)| (*name, v))
                }
            })
            .collect()
    }

    fn model_from(&self, params: PlantParams) -> PlantModel {
        PlantModel {
            params,
            dt: self.dt,
            substeps: self.substeps,
            noise_std: self.noise_std.clone(),
        }
    }
}

/// Draw one ensemble member. Randomized parameters are drawn independently in
/// canonical parameter order, so the same generator state reproduces the same
/// model.
pub fn sample_model<R: Rng + ?Sized>(spec: &EnsembleSpec, rng: &mut R) -> Result<PlantModel> {
    let values = spec.values_with(|r| r.lo + (r.hi - r.lo) * rng.random::<f64>());
    Ok(spec.model_from(PlantParams::from_values(spec.kind, &values)?))
}

/// Training set-point distribution and evaluation trace.
#[derive(Debug, Clone, PartialEq)]
pub struct SetpointSpec {
    pub lo: f64,
    pub hi: f64,
    /// Piecewise-constant levels of the evaluation trace, in order.
    pub eval_levels: Vec<f64>,
    /// Steps per evaluation level.
    pub segment_len: usize,
}

impl SetpointSpec {
    /// `n` levels evenly spaced strictly inside `[lo, hi]`.
    pub fn interior_levels(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (1..=n)
            .map(|k| lo + (hi - lo) * k as f64 / (n + 1) as f64)
            .collect()
    }

    pub fn tanks_default() -> Self {
        SetpointSpec {
            lo: 1.0,
            hi: 12.0,
            eval_levels: Self::interior_levels(1.0, 12.0, 5),
            segment_len: 100,
        }
    }

    pub fn ph_default() -> Self {
        SetpointSpec {
            lo: 4.0,
            hi: 10.0,
            eval_levels: Self::interior_levels(4.0, 10.0, 5),
            segment_len: 50,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo <= self.hi) || !self.lo.is_finite() || !self.hi.is_finite() {
            return Err(Error::InvalidSpec(alloc::format!(
                "set-point interval [{}, {}] is empty",
                self.lo, self.hi
            )));
        }
        if self.segment_len == 0 {
            return Err(Error::InvalidSpec("segment_len must be at least 1".into()));
        }
        if let Some(l) = self.eval_levels.iter().find(|&&l| !(l >= self.lo && l <= self.hi)) {
            return Err(Error::InvalidSpec(alloc::format!(
                "evaluation level {l} outside [{}, {}]",
                self.lo, self.hi
            )));
        }
        Ok(())
    }

    /// The evaluation trace expanded to one set-point per step.
    pub fn eval_schedule(&self) -> Vec<f64> {
        self.eval_levels
            .iter()
            .flat_map(|&l| core::iter::repeat(l).take(self.segment_len))
            .collect()
    }
}

pub fn sample_setpoint<R: Rng + ?Sized>(spec: &SetpointSpec, rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    (spec.lo + (spec.hi - spec.lo) * u).clamp(spec.lo, spec.hi)
}

/// Box of initial states: every state component uniform in `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResetSpec {
    pub lo: f64,
    pub hi: f64,
}

impl ResetSpec {
    pub fn default_for(kind: PlantKind) -> Self {
        match kind {
            PlantKind::CascadedTanks => ResetSpec { lo: 0.0, hi: 15.0 },
            PlantKind::PhNeutralization => ResetSpec { lo: 0.0, hi: 0.04 },
        }
    }
}

pub fn sample_initial_state<R: Rng + ?Sized>(
    kind: PlantKind,
    reset: &ResetSpec,
    rng: &mut R,
) -> PlantState {
    let mut draw = || reset.lo + (reset.hi - reset.lo) * rng.random::<f64>();
    match kind {
        PlantKind::CascadedTanks => {
            let l1 = draw();
            let l2 = draw();
            PlantState::Tanks { l1, l2 }
        }
        PlantKind::PhNeutralization => PlantState::Ph { hcl: draw() },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envsim::PlantParams;
    use crate::rng::substream;

    #[test]
    fn tank_draws_stay_in_ranges() {
        let spec = EnsembleSpec::tanks_default();
        spec.validate().unwrap();
        let mut rng = substream(0, &[]);
        for _ in 0..1000 {
            let m = sample_model(&spec, &mut rng).unwrap();
            let PlantParams::Tanks(p) = m.params else { panic!() };
            assert!((0.0015..=0.0024).contains(&p.p1));
            assert!((0.0015..=0.0024).contains(&p.p2));
            assert!((0.07..=0.17).contains(&p.p3));
            assert_eq!(p.g, 981.0);
        }
    }

    #[test]
    fn p3_mean_within_three_standard_errors() {
        let spec = EnsembleSpec::tanks_default();
        let mut rng = substream(1, &[]);
        let n = 10_000;
        let mean = (0..n)
            .map(|_| match sample_model(&spec, &mut rng).unwrap().params {
                PlantParams::Tanks(p) => p.p3,
                _ => unreachable!(),
            })
            .sum::<f64>()
            / n as f64;
        // Uniform on [0.07, 0.17]: sd = 0.1/sqrt(12).
        let se = 0.1 / 12f64.sqrt() / (n as f64).sqrt();
        assert!((mean - 0.12).abs() < 3.0 * se, "mean {mean}");
    }

    #[test]
    fn degenerate_range_is_near_constant() {
        let mut spec = EnsembleSpec::tanks_default();
        spec.ranges[2] = ParamRange { name: "p3".into(), lo: 0.1, hi: 0.1 + 1e-12 };
        spec.validate().unwrap();
        let mut rng = substream(2, &[]);
        let PlantParams::Tanks(p) = sample_model(&spec, &mut rng).unwrap().params else {
            panic!()
        };
        assert!((p.p3 - 0.1).abs() <= 1e-12);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let mut spec = EnsembleSpec::tanks_default();
        spec.ranges[0].hi = spec.ranges[0].lo;
        assert!(spec.validate().is_err());

        let mut spec = EnsembleSpec::tanks_default();
        spec.fixed.push(("p1".into(), 0.002));
        assert!(spec.validate().is_err());

        let mut spec = EnsembleSpec::ph_default();
        spec.fixed.retain(|(n, _)| n != "kw");
        assert!(spec.validate().is_err());

        let mut spec = EnsembleSpec::ph_default();
        spec.fixed.push(("viscosity".into(), 1.0));
        assert!(spec.validate().is_err());
    }

    #[test]
    fn same_stream_same_model() {
        let spec = EnsembleSpec::ph_default();
        let a = sample_model(&spec, &mut substream(9, &[4])).unwrap();
        let b = sample_model(&spec, &mut substream(9, &[4])).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn setpoint_sampling() {
        let point = SetpointSpec { lo: 5.0, hi: 5.0, eval_levels: alloc::vec![5.0], segment_len: 1 };
        assert_eq!(sample_setpoint(&point, &mut substream(0, &[])), 5.0);

        let spec = SetpointSpec::tanks_default();
        let mut rng = substream(3, &[]);
        let n = 10_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let y = sample_setpoint(&spec, &mut rng);
            assert!((spec.lo..=spec.hi).contains(&y));
            sum += y;
        }
        let se = (spec.hi - spec.lo) / 12f64.sqrt() / (n as f64).sqrt();
        assert!((sum / n as f64 - 6.5).abs() < 3.0 * se);
    }

    #[test]
    fn default_levels_lie_inside_interval() {
        for s in [SetpointSpec::tanks_default(), SetpointSpec::ph_default()] {
            s.validate().unwrap();
            assert_eq!(s.eval_levels.len(), 5);
            assert_eq!(s.eval_schedule().len(), 5 * s.segment_len);
        }
    }
}
