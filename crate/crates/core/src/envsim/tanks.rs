use super::check_finite;
use crate::math::sqrt;
use crate::{Error, Result};

/// Cascaded-tank parameters. Levels are in cm and `g` in cm/s².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TankParams {
    /// Upper outlet area over upper tank cross-section.
    pub p1: f64,
    /// Lower outlet area over lower tank cross-section.
    pub p2: f64,
    /// Pump constant over upper tank cross-section, cm/(V·s).
    pub p3: f64,
    pub g: f64,
    /// Tank height; levels are clamped to `[0, l_max]`.
    pub l_max: f64,
    /// Pump voltage bounds.
    pub u_range: (f64, f64),
}

impl TankParams {
    pub const NAMES: &'static [&'static str] = &["p1", "p2", "p3", "g", "l_max", "u_min", "u_max"];

    /// Centre of the default ensemble.
    pub fn nominal() -> Self {
        TankParams {
            p1: 0.001_95,
            p2: 0.001_95,
            p3: 0.12,
            g: 981.0,
            l_max: 25.0,
            u_range: (0.0, 10.0),
        }
    }

    pub fn values(&self) -> [(&'static str, f64); 7] {
        [
            ("p1", self.p1),
            ("p2", self.p2),
            ("p3", self.p3),
            ("g", self.g),
            ("l_max", self.l_max),
            ("u_min", self.u_range.0),
            ("u_max", self.u_range.1),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        let ok = [self.p1, self.p2, self.p3, self.g, self.l_max]
            .iter()
            .all(|v| v.is_finite())
            && self.p1 >= 0.0
            && self.p2 >= 0.0
            && self.g > 0.0
            && self.l_max > 0.0
            && self.u_range.0 >= 0.0
            && self.u_range.0 <= self.u_range.1;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidSpec(alloc::format!("invalid tank parameters {self:?}")))
        }
    }
}

/// Level derivatives from Torricelli outflow and a linear pump.
pub fn tank_derivative(l1: f64, l2: f64, u: f64, p: &TankParams) -> Result<(f64, f64)> {
    if !(l1 >= 0.0 && l2 >= 0.0) {
        return Err(Error::Domain {
            op: "tank_derivative",
            detail: alloc::format!("negative level ({l1}, {l2})"),
        });
    }
    let q1 = p.p1 * sqrt(2.0 * p.g * l1);
    let q2 = p.p2 * sqrt(2.0 * p.g * l2);
    Ok((-q1 + p.p3 * u, q1 - q2))
}

/// One sampling period of forward Euler, split into `substeps` equal steps.
/// Levels are clamped to `[0, l_max]` after every substep; `noise` is added
/// once at the end, before the final clamp.
pub fn step_tank(
    (mut l1, mut l2): (f64, f64),
    u: f64,
    p: &TankParams,
    dt: f64,
    substeps: usize,
    noise: [f64; 2],
) -> Result<(f64, f64)> {
    check_finite(&[l1, l2, u])?;
    let h = dt / substeps as f64;
    for _ in 0..substeps {
        let (d1, d2) = tank_derivative(l1, l2, u, p)?;
        l1 = (l1 + h * d1).clamp(0.0, p.l_max);
        l2 = (l2 + h * d2).clamp(0.0, p.l_max);
    }
    let (l1, l2) = (l1 + noise[0], l2 + noise[1]);
    check_finite(&[l1, l2])?;
    Ok((l1.clamp(0.0, p.l_max), l2.clamp(0.0, p.l_max)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example_params() -> TankParams {
        TankParams {
            p1: 0.002,
            p2: 0.002,
            p3: 0.1,
            ..TankParams::nominal()
        }
    }

    #[test]
    fn empty_tanks_have_no_flow() {
        assert_eq!(tank_derivative(0.0, 0.0, 0.0, &example_params()).unwrap(), (0.0, 0.0));
        assert_eq!(step_tank((0.0, 0.0), 0.0, &example_params(), 2.0, 1, [0.0; 2]).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn equal_levels_balance_lower_tank() {
        for u in [0.0, 1.0, 7.5] {
            let (_, d2) = tank_derivative(4.0, 4.0, u, &example_params()).unwrap();
            assert_eq!(d2, 0.0);
        }
    }

    #[test]
    fn equilibrium_voltage() {
        // Algebraic: p3·u = p1·sqrt(2·g·l1).
        let p = example_params();
        let u_star = 0.002 * (2.0f64 * 981.0 * 4.0).sqrt() / 0.1;
        assert!((u_star - 1.7718).abs() < 1e-4);
        let (d1, d2) = tank_derivative(4.0, 4.0, u_star, &p).unwrap();
        assert!(d1.abs() < 1e-12 && d2.abs() < 1e-12);
        let (l1, l2) = step_tank((4.0, 4.0), u_star, &p, 2.0, 1, [0.0; 2]).unwrap();
        assert!((l1 - 4.0).abs() < 1e-6 && (l2 - 4.0).abs() < 1e-6);

        // Long-horizon integration from empty settles at the same level.
        let mut s = (0.0, 0.0);
        for _ in 0..5000 {
            s = step_tank(s, u_star, &p, 2.0, 1, [0.0; 2]).unwrap();
        }
        assert!((s.0 - 4.0).abs() < 1e-6, "{s:?}");
        assert!((s.1 - 4.0).abs() < 1e-6, "{s:?}");
    }

    #[test]
    fn overflow_is_clamped() {
        let p = example_params();
        let (l1, l2) = step_tank((p.l_max, p.l_max), 1e3, &p, 2.0, 1, [0.0; 2]).unwrap();
        assert_eq!(l1, p.l_max);
        assert!(l2 <= p.l_max);
    }

    #[test]
    fn negative_level_is_rejected() {
        assert!(matches!(
            tank_derivative(-1e-9, 0.0, 0.0, &example_params()),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn nan_input_is_a_simulation_fault() {
        let err = step_tank((f64::NAN, 1.0), 0.0, &example_params(), 2.0, 1, [0.0; 2]).unwrap_err();
        assert!(matches!(err, Error::SimulationFault { .. }));
    }

    #[test]
    fn substeps_agree_with_fine_single_steps() {
        let p = example_params();
        let a = step_tank((3.0, 1.0), 2.0, &p, 2.0, 4, [0.0; 2]).unwrap();
        let mut b = (3.0, 1.0);
        for _ in 0..4 {
            b = step_tank(b, 2.0, &p, 0.5, 1, [0.0; 2]).unwrap();
        }
        assert_eq!(a, b);
    }
}
