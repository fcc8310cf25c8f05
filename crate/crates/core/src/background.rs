//! Reference states `(ρ̄, ū)` against which solutions are measured and from
//! which far-field boundary values are taken.

use crate::error::{domain, Result};
use crate::gas::GasParams;
use crate::rarefaction::{WavePoint, WaveProfile};

pub trait Background: Send + Sync {
    /// Reference state and derivatives at ascending positions `xs`.
    fn field(&self, t: f64, xs: &[f64]) -> Result<Vec<WavePoint>>;

    fn point(&self, t: f64, x: f64) -> Result<WavePoint> {
        Ok(self.field(t, &[x])?[0])
    }

    /// Infimum of `ρ̄` over space-time.
    fn rho_inf(&self) -> f64;

    /// Supremum of `ρ̄` over space-time.
    fn rho_sup(&self) -> f64;

    /// Bound on `|λ|` over the reference states.
    fn max_speed(&self) -> f64;

    /// Interval outside which the reference is (numerically) constant at time `t`.
    fn extent(&self, t: f64) -> (f64, f64);
}

impl Background for WaveProfile {
    fn field(&self, t: f64, xs: &[f64]) -> Result<Vec<WavePoint>> {
        self.wave_field(t, xs)
    }

    fn rho_inf(&self) -> f64 {
        self.rho_minus
    }

    fn rho_sup(&self) -> f64 {
        self.rho_plus
    }

    fn max_speed(&self) -> f64 {
        let g = &self.gas;
        [
            (self.rho_minus, self.u_minus),
            (self.rho_plus, self.u_plus),
        ]
        .iter()
        .map(|&(r, u)| u.abs() + g.sound_speed_raw(r))
        .fold(0.0, f64::max)
    }

    fn extent(&self, t: f64) -> (f64, f64) {
        self.fan_extent(t, 0.0)
    }
}

/// Spatially uniform reference state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantState {
    pub rho: f64,
    pub u: f64,
    pub gas: GasParams,
}

impl ConstantState {
    pub fn new(rho: f64, u: f64, gas: GasParams) -> Result<Self> {
        if !(rho.is_finite() && rho > 0.0 && u.is_finite()) {
            return Err(domain(format!(
                "constant reference needs finite rho > 0 and u, got ({rho}, {u})"
            )));
        }
        Ok(Self { rho, u, gas })
    }
}

impl Background for ConstantState {
    fn field(&self, _t: f64, xs: &[f64]) -> Result<Vec<WavePoint>> {
        Ok(vec![
            WavePoint {
                rho: self.rho,
                u: self.u,
                ..WavePoint::default()
            };
            xs.len()
        ])
    }

    fn rho_inf(&self) -> f64 {
        self.rho
    }

    fn rho_sup(&self) -> f64 {
        self.rho
    }

    fn max_speed(&self) -> f64 {
        self.u.abs() + self.gas.sound_speed_raw(self.rho)
    }

    fn extent(&self, _t: f64) -> (f64, f64) {
        (0.0, 0.0)
    }
}
