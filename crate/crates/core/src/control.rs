//! Integrated control error, extended state and the fixed prior controller.
//!
//! The control error is `ε = y_ref − y`. The integrator accumulates the raw
//! error once per sampling period and is clamped to its bounds, which keeps
//! it from winding up while the actuator saturates.

use alloc::vec::Vec;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorState {
    pub z: f64,
    pub bounds: (f64, f64),
}

impl Default for IntegratorState {
    fn default() -> Self {
        IntegratorState::new((-25.0, 25.0))
    }
}

impl IntegratorState {
    /// Zeroed integrator with the given clamp interval.
    pub fn new(bounds: (f64, f64)) -> Self {
        IntegratorState { z: 0.0, bounds }
    }

    /// `z' = clamp(z + eps, z_min, z_max)`.
    pub fn update(self, eps: f64) -> Result<Self> {
        if !eps.is_finite() {
            return Err(Error::Domain {
                op: "update_integrator",
                detail: alloc::format!("control error {eps}"),
            });
        }
        Ok(IntegratorState {
            z: (self.z + eps).clamp(self.bounds.0, self.bounds.1),
            ..self
        })
    }

    /// Largest absolute value the integrator can take.
    pub fn magnitude_bound(&self) -> f64 {
        self.bounds.0.abs().max(self.bounds.1.abs())
    }
}

/// Plant state with the integrator value appended.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedState {
    pub x: Vec<f64>,
    pub z: f64,
}

impl ExtendedState {
    pub fn dim(&self) -> usize {
        self.x.len() + 1
    }

    /// `[x..., z]`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = self.x.clone();
        v.push(self.z);
        v
    }

    pub fn from_slice(v: &[f64]) -> Result<Self> {
        match v.split_last() {
            Some((&z, x)) => Ok(ExtendedState { x: x.to_vec(), z }),
            None => Err(Error::Structural("empty extended state".into())),
        }
    }
}

pub fn extend(x: &[f64], z: f64) -> ExtendedState {
    ExtendedState { x: x.to_vec(), z }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PriorKind {
    P,
    PI,
}

/// Fixed, untuned P or PI law: `u = kp·ε + ki·z`. Output is not saturated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorController {
    pub kp: f64,
    pub ki: f64,
    pub kind: PriorKind,
}

impl PriorController {
    pub fn p(kp: f64) -> Self {
        PriorController { kp, ki: 0.0, kind: PriorKind::P }
    }

    pub fn pi(kp: f64, ki: f64) -> Self {
        PriorController { kp, ki, kind: PriorKind::PI }
    }

    /// P when `ki == 0`, PI otherwise.
    pub fn from_gains(kp: f64, ki: f64) -> Result<Self> {
        let c = if ki == 0.0 { Self::p(kp) } else { Self::pi(kp, ki) };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.kp.is_finite() || !self.ki.is_finite() {
            return Err(Error::InvalidSpec("prior gains must be finite".into()));
        }
        if self.kind == PriorKind::P && self.ki != 0.0 {
            return Err(Error::InvalidSpec("a P prior must have ki = 0".into()));
        }
        Ok(())
    }

    #[inline]
    pub fn action(&self, eps: f64, z: f64) -> f64 {
        self.kp * eps + self.ki * z
    }
}

#[inline]
pub fn saturate(u: f64, (lo, hi): (f64, f64)) -> f64 {
    u.clamp(lo, hi)
}
