//! Conservative finite-volume solver for
//! `ρ_t + (ρu)_x = 0`, `(ρu)_t + (ρu² + p)_x = (μ_ε(ρ)u_x)_x`
//! on a truncated domain with far-field ghost cells from a reference state.

mod flux;
mod mms;
mod run;
mod scheme;
pub mod tridiag;

pub use flux::{face_viscosity, flux_hyperbolic, rusanov, viscous_flux, Conserved};
pub use mms::{Manufactured, Source};
pub use run::{run, MassLedger, NullObserver, Observer, RunOutcome};
pub use scheme::{StepReport, Stepper};

use crate::background::Background;
use crate::error::{config, domain, Result};
use crate::grid::Grid1D;
use crate::initdata::{InitialData, RegularizedData};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViscousMode {
    Explicit,
    SemiImplicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Limiter {
    None,
    Minmod,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchemeConfig {
    pub cfl: f64,
    pub viscous_mode: ViscousMode,
    /// Density below which velocity is not reconstructed; defaults to
    /// `1e-10 · sup ρ̄` when absent.
    pub u_floor: Option<f64>,
    pub limiter: Limiter,
    pub t_final: f64,
    /// Interval between functional records; steps land on these times exactly.
    pub record_dt: f64,
    /// Per-step clipped mass, relative to total mass, that triggers a warning.
    pub clip_warn: f64,
    /// Per-step clipped mass, relative to total mass, that aborts the run.
    pub clip_error: f64,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        Self {
            cfl: 0.4,
            viscous_mode: ViscousMode::SemiImplicit,
            u_floor: None,
            limiter: Limiter::None,
            t_final: 200.0,
            record_dt: 0.1,
            clip_warn: 1e-12,
            clip_error: 1e-6,
        }
    }
}

impl SchemeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return Err(config(format!("cfl must lie in (0, 1), got {}", self.cfl)));
        }
        if let Some(f) = self.u_floor {
            if !(f > 0.0 && f.is_finite()) {
                return Err(config(format!("u_floor must be positive, got {f}")));
            }
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(config(format!("t_final must be >= 0, got {}", self.t_final)));
        }
        if !(self.record_dt > 0.0 && self.record_dt.is_finite()) {
            return Err(config(format!("record_dt must be positive, got {}", self.record_dt)));
        }
        if !(self.clip_warn > 0.0 && self.clip_error >= self.clip_warn) {
            return Err(config("clip thresholds must satisfy 0 < clip_warn <= clip_error"));
        }
        Ok(())
    }

    pub fn resolved_u_floor(&self, bg: &dyn Background) -> f64 {
        self.u_floor.unwrap_or(1e-10 * bg.rho_sup())
    }
}

/// Cell averages of density and momentum at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub rho: Vec<f64>,
    pub m: Vec<f64>,
}

impl SimState {
    pub fn from_initial(data: &InitialData) -> Self {
        Self {
            t: 0.0,
            rho: data.rho0.clone(),
            m: data.m0.clone(),
        }
    }

    pub fn from_regularized(data: &RegularizedData) -> Self {
        Self {
            t: 0.0,
            rho: data.rho0_eps.clone(),
            m: data.m0_eps.clone(),
        }
    }

    pub fn mass(&self, dx: f64) -> f64 {
        self.rho.iter().sum::<f64>() * dx
    }

    /// Dynamic velocity: `m/ρ` above the floor, 0 otherwise.
    pub fn velocity(&self, u_floor: f64) -> Vec<f64> {
        self.rho
            .iter()
            .zip(&self.m)
            .map(|(&r, &m)| if r > u_floor { m / r } else { 0.0 })
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.rho.iter().chain(&self.m).all(|v| v.is_finite())
    }
}

/// `√ε · ln(1+T) ≤ ε^{1/4}`, the admissible pairing of regularization and horizon.
pub fn eps_compat(eps: f64, t_final: f64) -> Result<bool> {
    if !(eps > 0.0) {
        return Err(domain(format!("eps_compat needs eps > 0, got {eps}")));
    }
    Ok(eps.sqrt() * t_final.ln_1p() <= eps.powf(0.25))
}

/// Checks that the domain holds the fan at `t_final` and the initial
/// perturbation `support`, each widened by the distance the fastest reference
/// characteristic covers, so boundaries stay out of the dynamics.
pub fn check_domain_margin(
    grid: &Grid1D,
    bg: &dyn Background,
    t_final: f64,
    support: Option<(f64, f64)>,
) -> Result<()> {
    let (fa, fb) = bg.extent(t_final);
    // a constant reference has no fan to hold
    let fan = (fb > fa).then_some((fa.min(0.0), fb.max(0.0)));
    let (a, b) = match (fan, support) {
        (None, None) => return Ok(()),
        (Some(f), None) | (None, Some(f)) => f,
        (Some(f), Some(s)) => (f.0.min(s.0), f.1.max(s.1)),
    };
    let pad = bg.max_speed() * t_final;
    let (lo, hi) = (a - pad, b + pad);
    if !grid.contains(lo, hi) {
        return Err(config(format!(
            "domain [{}, {}] must contain [{lo:.3}, {hi:.3}] (wave fan and initial perturbation \
             plus max|λ|·t_final) to keep the boundaries out of the dynamics",
            grid.x_left, grid.x_right
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eps_compat_cases() {
        assert!(eps_compat(1e-4, 100.0).unwrap());
        assert!(!eps_compat(0.01, 1e6).unwrap());
        assert!(eps_compat(1e-8, 1e3).unwrap());
        assert!(eps_compat(0.0, 1.0).is_err());
    }

    #[test]
    fn domain_margin_counts_wave_and_perturbation() {
        use crate::gas::GasParams;
        use crate::rarefaction::{sonic_left_velocity, WaveProfile};
        let gas = GasParams::default();
        let wp = WaveProfile::new(gas, 1.0, 2.0, sonic_left_velocity(&gas, 1.0), None, 2.0, 0.1)
            .unwrap();
        let grid = Grid1D::new(-600.0, 940.0, 2000).unwrap();
        assert!(check_domain_margin(&grid, &wp, 200.0, Some((-13.0, 25.0))).is_ok());
        assert!(check_domain_margin(&grid, &wp, 200.0, Some((-40.0, 25.0))).is_err());
        assert!(check_domain_margin(&grid, &wp, 260.0, None).is_err());
        let c = crate::background::ConstantState::new(1.0, 0.0, gas).unwrap();
        let small = Grid1D::new(0.0, 1.0, 20).unwrap();
        assert!(check_domain_margin(&small, &c, 100.0, None).is_ok());
        assert!(check_domain_margin(&small, &c, 100.0, Some((0.4, 0.6))).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(SchemeConfig::default().validate().is_ok());
        let bad = SchemeConfig {
            cfl: 1.0,
            ..SchemeConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = SchemeConfig {
            u_floor: Some(0.0),
            ..SchemeConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
