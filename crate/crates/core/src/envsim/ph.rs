use super::check_finite;
use crate::math::{log10, sqrt};
use crate::{Error, Result};

/// pH-neutralization reactor parameters. Concentrations in mol/dm³.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhParams {
    /// Control-acid gain `[HCl,C]·q / V`.
    pub p1: f64,
    /// Dilution rate `q_ww / V`, s⁻¹.
    pub p2: f64,
    /// Total ammonia.
    pub nh3: f64,
    /// Total sodium hydroxide.
    pub naoh: f64,
    /// Ammonium dissociation constant.
    pub k_eq: f64,
    /// Water ion product.
    pub kw: f64,
    /// Acid concentration is clamped to `[0, hcl_max]`.
    pub hcl_max: f64,
    /// Relative control-flow bounds.
    pub u_range: (f64, f64),
}

impl PhParams {
    pub const NAMES: &'static [&'static str] = &[
        "p1", "p2", "nh3", "naoh", "k_eq", "kw", "hcl_max", "u_min", "u_max",
    ];

    /// Centre of the default ensemble.
    pub fn nominal() -> Self {
        PhParams {
            p1: 0.01,
            p2: 0.002,
            nh3: 0.01,
            naoh: 0.01,
            k_eq: 5.62e-10,
            kw: 1e-14,
            hcl_max: 0.05,
            u_range: (0.0, 0.01),
        }
    }

    pub fn values(&self) -> [(&'static str, f64); 9] {
        [
            ("p1", self.p1),
            ("p2", self.p2),
            ("nh3", self.nh3),
            ("naoh", self.naoh),
            ("k_eq", self.k_eq),
            ("kw", self.kw),
            ("hcl_max", self.hcl_max),
            ("u_min", self.u_range.0),
            ("u_max", self.u_range.1),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        let ok = [self.p1, self.p2, self.nh3, self.naoh, self.k_eq, self.kw, self.hcl_max]
            .iter()
            .all(|v| v.is_finite())
            && self.p2 >= 0.0
            && self.nh3 >= 0.0
            && self.naoh >= 0.0
            && self.k_eq > 0.0
            && self.kw > 0.0
            && self.hcl_max > 0.0
            && self.u_range.0 <= self.u_range.1;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidSpec(alloc::format!("invalid pH parameters {self:?}")))
        }
    }

    /// pH of the reactor contents at acid concentration `hcl`.
    pub fn ph(&self, hcl: f64) -> Result<f64> {
        ph_of_hplus(solve_hplus(self.nh3, self.naoh, hcl, self.k_eq, self.kw)?)
    }
}

/// Cubic `c3·h³ + c2·h² + c1·h + c0` in the hydrogen-ion concentration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cubic {
    pub c3: f64,
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
}

impl Cubic {
    const BRACKET: (f64, f64) = (1e-16, 1.0);
    const MAX_ITER: usize = 200;

    /// Charge balance `[H⁺] + [Na⁺] + [NH₄⁺] = [OH⁻] + [Cl⁻]` with the
    /// ammonium and water equilibria substituted, multiplied through by
    /// `[H⁺]([H⁺] + K)`. Exactly one positive root for admissible inputs.
    pub fn charge_balance(nh3: f64, naoh: f64, hcl: f64, k_eq: f64, kw: f64) -> Self {
        Cubic {
            c3: 1.0,
            c2: nh3 + naoh - hcl + k_eq,
            c1: k_eq * naoh - k_eq * hcl - kw,
            c0: -k_eq * kw,
        }
    }

    /// The form with no first-degree term and constant `K·[NaOH] − K·[HCl] − K·K_w`.
    /// Has no positive root whenever the base exceeds the acid; kept for
    /// comparison against [`Cubic::charge_balance`].
    pub fn without_linear_term(nh3: f64, naoh: f64, hcl: f64, k_eq: f64, kw: f64) -> Self {
        Cubic {
            c3: 1.0,
            c2: nh3 - hcl + naoh + k_eq,
            c1: 0.0,
            c0: k_eq * naoh - k_eq * hcl - k_eq * kw,
        }
    }

    #[inline]
    pub fn eval(&self, h: f64) -> f64 {
        ((self.c3 * h + self.c2) * h + self.c1) * h + self.c0
    }

    #[inline]
    fn slope(&self, h: f64) -> f64 {
        (3.0 * self.c3 * h + 2.0 * self.c2) * h + self.c1
    }

    /// Root in `[1e-16, 1]` by safeguarded Newton iteration: any step that
    /// leaves the current sign-change bracket is replaced by a geometric
    /// bisection.
    pub fn positive_root(&self) -> Result<f64> {
        let (mut lo, mut hi) = Self::BRACKET;
        let (f_lo, f_hi) = (self.eval(lo), self.eval(hi));
        if f_lo == 0.0 {
            return Ok(lo);
        }
        if f_hi == 0.0 {
            return Ok(hi);
        }
        if !(f_lo.is_finite() && f_hi.is_finite()) || (f_lo < 0.0) == (f_hi < 0.0) {
            return Err(Error::NoRoot { lo, hi });
        }
        // Orient so that the function is negative at `lo`.
        let sign = if f_lo < 0.0 { 1.0 } else { -1.0 };
        let mut h = sqrt(lo * hi);
        for _ in 0..Self::MAX_ITER {
            let f = sign * self.eval(h);
            if f == 0.0 {
                return Ok(h);
            }
            if f < 0.0 {
                lo = h;
            } else {
                hi = h;
            }
            let df = sign * self.slope(h);
            let newton = h - f / df;
            let next = if df > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                sqrt(lo * hi)
            };
            if (next - h).abs() <= 4.0 * f64::EPSILON * h || hi - lo <= 4.0 * f64::EPSILON * hi {
                return Ok(next);
            }
            h = next;
        }
        Err(Error::NoConvergence {
            solver: "hydrogen-ion cubic",
            iterations: Self::MAX_ITER,
        })
    }
}

/// Hydrogen-ion concentration of the titrated mixture.
pub fn solve_hplus(nh3: f64, naoh: f64, hcl: f64, k_eq: f64, kw: f64) -> Result<f64> {
    if !(nh3 >= 0.0 && naoh >= 0.0 && hcl >= 0.0 && k_eq > 0.0 && kw > 0.0) {
        return Err(Error::Domain {
            op: "solve_hplus",
            detail: alloc::format!(
                "nh3={nh3}, naoh={naoh}, hcl={hcl}, k_eq={k_eq}, kw={kw}"
            ),
        });
    }
    Cubic::charge_balance(nh3, naoh, hcl, k_eq, kw).positive_root()
}

pub fn ph_of_hplus(hplus: f64) -> Result<f64> {
    if hplus > 0.0 && hplus.is_finite() {
        Ok(-log10(hplus))
    } else {
        Err(Error::Domain {
            op: "ph_of_hplus",
            detail: alloc::format!("[H+] = {hplus}"),
        })
    }
}

/// One sampling period of the acid mixing balance under forward Euler,
/// clamped to `[0, hcl_max]` after every substep.
pub fn step_ph(
    mut hcl: f64,
    u: f64,
    p: &PhParams,
    dt: f64,
    substeps: usize,
    noise: f64,
) -> Result<f64> {
    check_finite(&[hcl, u])?;
    let h = dt / substeps as f64;
    for _ in 0..substeps {
        hcl = (hcl + h * (-p.p2 * hcl + p.p1 * u)).clamp(0.0, p.hcl_max);
    }
    let hcl = hcl + noise;
    check_finite(&[hcl])?;
    Ok(hcl.clamp(0.0, p.hcl_max))
}
