//! Nonlinear plant simulators under forward-Euler discretization.
//!
//! Two plants are provided: a cascaded pair of gravity-drained tanks driven by
//! a pump, and a continuous pH-neutralization reactor in which hydrochloric
//! acid titrates a mixture of ammonia and sodium hydroxide.

mod ensemble;
mod ph;
mod tanks;

pub use ensemble::{
    sample_initial_state, sample_model, sample_setpoint, EnsembleSpec, ParamRange, ResetSpec,
    SetpointSpec,
};
pub use ph::{ph_of_hplus, solve_hplus, step_ph, Cubic, PhParams};
pub use tanks::{step_tank, tank_derivative, TankParams};

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PlantKind {
    CascadedTanks,
    PhNeutralization,
}

impl PlantKind {
    /// Dynamics parameter names, in the canonical sampling order.
    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            PlantKind::CascadedTanks => TankParams::NAMES,
            PlantKind::PhNeutralization => PhParams::NAMES,
        }
    }

    /// Dimension of the simulation state.
    pub fn state_dim(self) -> usize {
        match self {
            PlantKind::CascadedTanks => 2,
            PlantKind::PhNeutralization => 1,
        }
    }

    /// Dimension of the state vector handed to controllers (see
    /// [`PlantModel::observe`]).
    pub fn observation_dim(self) -> usize {
        1 + (self == PlantKind::CascadedTanks) as usize
    }
}

impl fmt::Display for PlantKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PlantKind::CascadedTanks => "tanks",
            PlantKind::PhNeutralization => "ph",
        })
    }
}

impl FromStr for PlantKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tanks" => Ok(PlantKind::CascadedTanks),
            "ph" => Ok(PlantKind::PhNeutralization),
            other => Err(Error::InvalidSpec(alloc::format!(
                "unknown plant `{other}` (expected tanks or ph)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PlantParams {
    Tanks(TankParams),
    Ph(PhParams),
}

impl PlantParams {
    pub fn kind(&self) -> PlantKind {
        match self {
            PlantParams::Tanks(_) => PlantKind::CascadedTanks,
            PlantParams::Ph(_) => PlantKind::PhNeutralization,
        }
    }

    pub fn u_range(&self) -> (f64, f64) {
        match self {
            PlantParams::Tanks(p) => p.u_range,
            PlantParams::Ph(p) => p.u_range,
        }
    }

    /// Build from `(name, value)` pairs; every name of the kind must be
    /// present exactly once.
    pub fn from_values(kind: PlantKind, values: &[(&str, f64)]) -> Result<Self> {
        let get = |name: &str| -> Result<f64> {
            let mut hits = values.iter().filter(|(n, _)| *n == name);
            match (hits.next(), hits.next()) {
                (Some(&(_, v)), None) => Ok(v),
                (None, _) => Err(Error::InvalidSpec(alloc::format!(
                    "missing parameter `{name}`"
                ))),
                _ => Err(Error::InvalidSpec(alloc::format!(
                    "parameter `{name}` given more than once"
                ))),
            }
        };
        if let Some((n, _)) = values.iter().find(|(n, _)| !kind.param_names().contains(n)) {
            return Err(Error::InvalidSpec(alloc::format!(
                "unknown {kind} parameter `{n}`"
            )));
        }
        let params = match kind {
            PlantKind::CascadedTanks => PlantParams::Tanks(TankParams {
                p1: get("p1")?,
                p2: get("p2")?,
                p3: get("p3")?,
                g: get("g")?,
                l_max: get("l_max")?,
                u_range: (get("u_min")?, get("u_max")?),
            }),
            PlantKind::PhNeutralization => PlantParams::Ph(PhParams {
                p1: get("p1")?,
                p2: get("p2")?,
                nh3: get("nh3")?,
                naoh: get("naoh")?,
                k_eq: get("k_eq")?,
                kw: get("kw")?,
                hcl_max: get("hcl_max")?,
                u_range: (get("u_min")?, get("u_max")?),
            }),
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PlantParams::Tanks(p) => p.validate(),
            PlantParams::Ph(p) => p.validate(),
        }
    }
}

/// Simulation state of either plant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PlantState {
    /// Upper and lower tank levels, cm.
    Tanks { l1: f64, l2: f64 },
    /// Acid concentration after mixing, mol/dm³.
    Ph { hcl: f64 },
}

impl PlantState {
    pub fn to_vec(&self) -> Vec<f64> {
        match *self {
            PlantState::Tanks { l1, l2 } => vec![l1, l2],
            PlantState::Ph { hcl } => vec![hcl],
        }
    }

    pub fn from_slice(kind: PlantKind, values: &[f64]) -> Result<Self> {
        match (kind, values) {
            (PlantKind::CascadedTanks, &[l1, l2]) => Ok(PlantState::Tanks { l1, l2 }),
            (PlantKind::PhNeutralization, &[hcl]) => Ok(PlantState::Ph { hcl }),
            _ => Err(Error::Structural(alloc::format!(
                "{kind} state needs {} values, got {}",
                kind.state_dim(),
                values.len()
            ))),
        }
    }
}

/// One ensemble member: parameters plus discretization settings.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantModel {
    pub params: PlantParams,
    /// Sampling period, seconds.
    pub dt: f64,
    /// Euler substeps per sampling period.
    pub substeps: usize,
    /// Standard deviation of additive Gaussian state noise, per state.
    pub noise_std: Vec<f64>,
}

impl PlantModel {
    /// Noise-free model with one Euler step per period.
    pub fn new(params: PlantParams, dt: f64) -> Self {
        let n = params.kind().state_dim();
        PlantModel {
            params,
            dt,
            substeps: 1,
            noise_std: vec![0.0; n],
        }
    }

    pub fn kind(&self) -> PlantKind {
        self.params.kind()
    }

    pub fn u_range(&self) -> (f64, f64) {
        self.params.u_range()
    }

    pub fn has_noise(&self) -> bool {
        self.noise_std.iter().any(|&s| s > 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidSpec(alloc::format!("dt must be positive, got {}", self.dt)));
        }
        if self.substeps == 0 {
            return Err(Error::InvalidSpec("substeps must be at least 1".into()));
        }
        if self.noise_std.len() != self.kind().state_dim() {
            return Err(Error::InvalidSpec(alloc::format!(
                "noise_std needs {} entries",
                self.kind().state_dim()
            )));
        }
        if self.noise_std.iter().any(|s| !(*s >= 0.0)) {
            return Err(Error::InvalidSpec("noise_std must be non-negative".into()));
        }
        Ok(())
    }

    /// Standard-normal draws for one step, or `None` for a noise-free model.
    pub fn draw_noise<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Option<Vec<f64>> {
        self.has_noise()
            .then(|| self.noise_std.iter().map(|_| rng.sample(rand_distr::StandardNormal)).collect())
    }

    /// Advance one sampling period. `noise` holds standard-normal draws, one
    /// per state, scaled here by `noise_std`.
    pub fn step(&self, state: &PlantState, u: f64, noise: Option<&[f64]>) -> Result<PlantState> {
        let (lo, hi) = self.u_range();
        let u = u.clamp(lo, hi);
        let scaled = |i: usize| noise.map_or(0.0, |n| n[i] * self.noise_std[i]);
        match (&self.params, *state) {
            (PlantParams::Tanks(p), PlantState::Tanks { l1, l2 }) => {
                let w = [scaled(0), scaled(1)];
                let (l1, l2) = step_tank((l1, l2), u, p, self.dt, self.substeps, w)?;
                Ok(PlantState::Tanks { l1, l2 })
            }
            (PlantParams::Ph(p), PlantState::Ph { hcl }) => {
                let hcl = step_ph(hcl, u, p, self.dt, self.substeps, scaled(0))?;
                Ok(PlantState::Ph { hcl })
            }
            _ => Err(Error::Structural("plant state does not match model kind".into())),
        }
    }

    /// Controlled output: lower-tank level (cm) or pH.
    pub fn output(&self, state: &PlantState) -> Result<f64> {
        match (&self.params, *state) {
            (PlantParams::Tanks(_), PlantState::Tanks { l2, .. }) => Ok(l2),
            (PlantParams::Ph(p), PlantState::Ph { hcl }) => p.ph(hcl),
            _ => Err(Error::Structural("plant state does not match model kind".into())),
        }
    }

    /// State vector seen by controllers. For the tanks this is both levels;
    /// for the reactor it is the measured pH rather than the hidden acid
    /// concentration.
    pub fn observe(&self, state: &PlantState) -> Result<Vec<f64>> {
        match *state {
            PlantState::Tanks { l1, l2 } => Ok(vec![l1, l2]),
            PlantState::Ph { .. } => Ok(vec![self.output(state)?]),
        }
    }
}

/// Negative squared tracking error.
#[inline]
pub fn reward(y: f64, y_ref: f64) -> f64 {
    let e = y - y_ref;
    -(e * e)
}

pub(crate) fn check_finite(values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::SimulationFault {
            values: values.to_vec(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reward_examples() {
        assert_eq!(reward(5.0, 5.0), 0.0);
        assert_eq!(reward(4.0, 6.0), -4.0);
        assert_eq!(reward(7.5, 7.0), -0.25);
    }

    #[test]
    fn kind_round_trips_through_str() {
        for k in [PlantKind::CascadedTanks, PlantKind::PhNeutralization] {
            assert_eq!(alloc::format!("{k}").parse::<PlantKind>().unwrap(), k);
        }
        assert!("boiler".parse::<PlantKind>().is_err());
    }

    #[test]
    fn from_values_rejects_unknown_and_missing() {
        let mut vals: Vec<(&str, f64)> = TankParams::nominal()
            .values()
            .iter()
            .map(|&(n, v)| (n, v))
            .collect();
        assert!(PlantParams::from_values(PlantKind::CascadedTanks, &vals).is_ok());
        vals.push(("bogus", 1.0));
        assert!(PlantParams::from_values(PlantKind::CascadedTanks, &vals).is_err());
        vals.pop();
        vals.pop();
        assert!(PlantParams::from_values(PlantKind::CascadedTanks, &vals).is_err());
    }

    #[test]
    fn mismatched_state_is_structural() {
        let m = PlantModel::new(PlantParams::Tanks(TankParams::nominal()), 2.0);
        let err = m.step(&PlantState::Ph { hcl: 0.0 }, 0.0, None).unwrap_err();
        assert!(matches!(err, Error::Structural(_)));
    }
}
