//! Isentropic closure `p = ρ^γ`, viscosity `μ_ε = ρ^α + ερ^θ` and the
//! associated wave algebra.
//!
//! Gas constants are normalized to one. The checked operations reject
//! negative or non-finite densities; the `*_raw` helpers skip validation and
//! are meant for inner loops that already guarantee `ρ ≥ 0`.

use crate::error::{domain, Result};
use serde::{Deserialize, Serialize};

/// Characteristic family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    First,
    Second,
}

impl Family {
    pub fn from_index(i: u8) -> Result<Self> {
        match i {
            1 => Ok(Family::First),
            2 => Ok(Family::Second),
            _ => Err(domain(format!("characteristic family must be 1 or 2, got {i}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GasParams {
    pub gamma: f64,
    pub alpha: f64,
    #[serde(default = "default_theta")]
    pub theta: f64,
    #[serde(default)]
    pub eps: f64,
}

fn default_theta() -> f64 {
    1.0 / 3.0
}

impl Default for GasParams {
    fn default() -> Self {
        Self {
            gamma: 2.0,
            alpha: 1.0,
            theta: default_theta(),
            eps: 0.0,
        }
    }
}

impl GasParams {
    pub fn new(gamma: f64, alpha: f64, theta: f64, eps: f64) -> Result<Self> {
        let g = Self {
            gamma,
            alpha,
            theta,
            eps,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let Self {
            gamma,
            alpha,
            theta,
            eps,
        } = *self;
        if !(gamma.is_finite() && gamma > 1.0) {
            return Err(domain(format!("gamma must be finite and > 1, got {gamma}")));
        }
        if !(alpha.is_finite() && alpha > 0.5) {
            return Err(domain(format!("alpha must be finite and > 1/2, got {alpha}")));
        }
        if !(theta > 0.0 && theta < 0.5) {
            return Err(domain(format!("theta must lie in (0, 1/2), got {theta}")));
        }
        if !(eps.is_finite() && eps >= 0.0) {
            return Err(domain(format!("eps must be finite and >= 0, got {eps}")));
        }
        Ok(())
    }

    /// True iff `1/2 < α ≤ (γ+1)/2`, the range where the energy estimates hold.
    pub fn estimate_regime(&self) -> bool {
        self.alpha > 0.5 && self.alpha <= 0.5 * (self.gamma + 1.0)
    }

    pub fn pressure(&self, rho: f64) -> Result<f64> {
        check_density(rho)?;
        Ok(self.pressure_raw(rho))
    }

    #[inline]
    pub fn pressure_raw(&self, rho: f64) -> f64 {
        rho.powf(self.gamma)
    }

    pub fn viscosity_eps(&self, rho: f64) -> Result<f64> {
        check_density(rho)?;
        Ok(self.viscosity_raw(rho))
    }

    #[inline]
    pub fn viscosity_raw(&self, rho: f64) -> f64 {
        if rho <= 0.0 {
            return 0.0;
        }
        let mut mu = rho.powf(self.alpha);
        if self.eps > 0.0 {
            mu += self.eps * rho.powf(self.theta);
        }
        mu
    }

    /// `√p'(ρ) = √γ ρ^{(γ-1)/2}`.
    #[inline]
    pub fn sound_speed_raw(&self, rho: f64) -> f64 {
        if rho <= 0.0 {
            return 0.0;
        }
        self.gamma.sqrt() * rho.powf(0.5 * (self.gamma - 1.0))
    }

    /// Characteristic speeds `λ₁ = u − √p'(ρ)`, `λ₂ = u + √p'(ρ)`.
    pub fn lambda(&self, family: Family, rho: f64, u: f64) -> Result<f64> {
        if !(rho.is_finite() && rho > 0.0) {
            return Err(domain(format!(
                "characteristic speeds need a positive density, got {rho}"
            )));
        }
        let c = self.sound_speed_raw(rho);
        Ok(match family {
            Family::First => u - c,
            Family::Second => u + c,
        })
    }

    /// Riemann invariants, normalized so that both equal `u` at vacuum.
    ///
    /// `Σ₁ = u + 2c/(γ−1)` and `Σ₂ = u − 2c/(γ−1)` with `c = √p'(ρ)`. With
    /// this orientation `∇Σ_i · r_i = 0`, so `Σ₂` is the invariant that stays
    /// constant through a 2-rarefaction fan.
    pub fn riemann_invariant(&self, family: Family, rho: f64, u: f64) -> Result<f64> {
        check_density(rho)?;
        let k = 2.0 * self.sound_speed_raw(rho) / (self.gamma - 1.0);
        Ok(match family {
            Family::First => u + k,
            Family::Second => u - k,
        })
    }

    /// Relative entropy per unit mass `Ψ(ρ, ρ̄) = ∫_{ρ̄}^{ρ} (p(s) − p(ρ̄))/s² ds`.
    ///
    /// Returns `+∞` at `ρ = 0`, where only `ρΨ` stays finite.
    pub fn psi(&self, rho: f64, rhobar: f64) -> Result<f64> {
        let rp = self.rho_psi(rho, rhobar)?;
        if rho == 0.0 {
            return Ok(f64::INFINITY);
        }
        Ok(rp / rho)
    }

    /// `ρΨ(ρ, ρ̄) = [ρ^γ − ρ̄^γ − γρ̄^{γ−1}(ρ − ρ̄)]/(γ − 1)`, equal to `ρ̄^γ` at `ρ = 0`.
    pub fn rho_psi(&self, rho: f64, rhobar: f64) -> Result<f64> {
        check_density(rho)?;
        if !(rhobar.is_finite() && rhobar > 0.0) {
            return Err(domain(format!(
                "reference density must be positive, got {rhobar}"
            )));
        }
        Ok(self.rho_psi_raw(rho, rhobar))
    }

    pub fn rho_psi_raw(&self, rho: f64, rhobar: f64) -> f64 {
        let g = self.gamma;
        let scale = rhobar.powf(g);
        if rho <= 0.0 {
            return scale;
        }
        let d = rho / rhobar - 1.0;
        // Near ρ = ρ̄ the closed form cancels catastrophically; sum the
        // binomial series of (1+d)^γ − 1 − γd instead.
        let tail = if d.abs() < 0.125 {
            let mut coef = g * (g - 1.0) / 2.0;
            let mut pow = d * d;
            let mut sum = 0.0;
            for k in 2..40 {
                let term = coef * pow;
                sum += term;
                if term.abs() <= 1e-18 * sum.abs() {
                    break;
                }
                coef *= (g - k as f64) / (k as f64 + 1.0);
                pow *= d;
            }
            sum
        } else {
            (1.0 + d).powf(g) - 1.0 - g * d
        };
        (scale * tail / (g - 1.0)).max(0.0)
    }

    /// BD potential `φ_ε(ρ) = ρ^{α−1}/(α−1) + ερ^{θ−1}/(θ−1)`, with `ln ρ`
    /// replacing the first term when `α == 1` exactly.
    pub fn phi_eps(&self, rho: f64) -> Result<f64> {
        if !(rho.is_finite() && rho > 0.0) {
            return Err(domain(format!("BD potential needs a positive density, got {rho}")));
        }
        Ok(self.phi_eps_raw(rho))
    }

    #[inline]
    pub fn phi_eps_raw(&self, rho: f64) -> f64 {
        let a = self.alpha;
        let head = if a == 1.0 {
            rho.ln()
        } else {
            rho.powf(a - 1.0) / (a - 1.0)
        };
        if self.eps > 0.0 {
            let t = self.theta;
            head + self.eps * rho.powf(t - 1.0) / (t - 1.0)
        } else {
            head
        }
    }

    /// `dφ_ε/dρ = ρ^{α−2} + ερ^{θ−2}`.
    #[inline]
    pub fn phi_eps_prime_raw(&self, rho: f64) -> f64 {
        let mut d = rho.powf(self.alpha - 2.0);
        if self.eps > 0.0 {
            d += self.eps * rho.powf(self.theta - 2.0);
        }
        d
    }
}

fn check_density(rho: f64) -> Result<()> {
    if rho.is_finite() && rho >= 0.0 {
        Ok(())
    } else {
        Err(domain(format!("density must be finite and >= 0, got {rho}")))
    }
}
