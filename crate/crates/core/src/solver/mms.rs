//! Manufactured solutions and the source terms that make them exact.

use super::SimState;
use crate::background::Background;
use crate::error::Result;
use crate::gas::GasParams;
use crate::grid::Grid1D;
use crate::rarefaction::WavePoint;

/// Extra forcing `(S_ρ, S_m)` added to the conservation laws.
pub trait Source: Sync {
    fn source(&self, t: f64, x: f64) -> [f64; 2];
}

/// `ρ* = a + b sin(x − ct)`, `u* = u₀ + d sin(x + t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Manufactured {
    pub gas: GasParams,
    pub rho_mean: f64,
    pub rho_amp: f64,
    pub speed: f64,
    pub u_mean: f64,
    pub u_amp: f64,
}

impl Manufactured {
    pub fn new(
        gas: GasParams,
        rho_mean: f64,
        rho_amp: f64,
        speed: f64,
        u_mean: f64,
        u_amp: f64,
    ) -> Self {
        Self {
            gas,
            rho_mean,
            rho_amp,
            speed,
            u_mean,
            u_amp,
        }
    }

    pub fn exact(&self, t: f64, x: f64) -> WavePoint {
        let xi = x - self.speed * t;
        let zeta = x + t;
        let (sx, cx) = xi.sin_cos();
        let (sz, cz) = zeta.sin_cos();
        WavePoint {
            rho: self.rho_mean + self.rho_amp * sx,
            u: self.u_mean + self.u_amp * sz,
            rho_x: self.rho_amp * cx,
            u_x: self.u_amp * cz,
            rho_xx: -self.rho_amp * sx,
            u_xx: -self.u_amp * sz,
            rho_t: -self.speed * self.rho_amp * cx,
            u_t: self.u_amp * cz,
        }
    }

    /// Point values at the cell centers.
    pub fn state(&self, t: f64, grid: &Grid1D) -> SimState {
        let pts: Vec<WavePoint> = grid.centers().iter().map(|&x| self.exact(t, x)).collect();
        SimState {
            t,
            rho: pts.iter().map(|p| p.rho).collect(),
            m: pts.iter().map(|p| p.rho * p.u).collect(),
        }
    }
}

impl Source for Manufactured {
    fn source(&self, t: f64, x: f64) -> [f64; 2] {
        let p = self.exact(t, x);
        let g = &self.gas;
        let (r, u) = (p.rho, p.u);
        let dp = g.gamma * r.powf(g.gamma - 1.0);
        let mu = g.viscosity_raw(r);
        let dmu = g.alpha * r.powf(g.alpha - 1.0) + g.eps * g.theta * r.powf(g.theta - 1.0);
        let s_rho = p.rho_t + p.rho_x * u + r * p.u_x;
        let s_m = p.rho_t * u + r * p.u_t + p.rho_x * u * u + 2.0 * r * u * p.u_x + dp * p.rho_x
            - (dmu * p.rho_x * p.u_x + mu * p.u_xx);
        [s_rho, s_m]
    }
}

impl Background for Manufactured {
    fn field(&self, t: f64, xs: &[f64]) -> Result<Vec<WavePoint>> {
        Ok(xs.iter().map(|&x| self.exact(t, x)).collect())
    }

    fn rho_inf(&self) -> f64 {
        self.rho_mean - self.rho_amp.abs()
    }

    fn rho_sup(&self) -> f64 {
        self.rho_mean + self.rho_amp.abs()
    }

    fn max_speed(&self) -> f64 {
        self.u_mean.abs() + self.u_amp.abs() + self.gas.sound_speed_raw(self.rho_sup())
    }

    fn extent(&self, _t: f64) -> (f64, f64) {
        (0.0, 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn source_matches_finite_difference_residual() {
        let gas = GasParams::new(2.0, 1.0, 1.0 / 3.0, 0.02).unwrap();
        let mm = Manufactured::new(gas, 2.0, 0.5, 1.0, 0.3, 0.4);
        let (t, x, h) = (0.7, 1.3, 1e-4);
        let e = |t: f64, x: f64| mm.exact(t, x);
        let q = |t: f64, x: f64| {
            let p = e(t, x);
            (p.rho, p.rho * p.u)
        };
        let f = |t: f64, x: f64| {
            let p = e(t, x);
            (p.rho * p.u, p.rho * p.u * p.u + p.rho.powi(2))
        };
        let stress = |x: f64| {
            let p = e(t, x);
            gas.viscosity_raw(p.rho) * p.u_x
        };
        let dt0 = (q(t + h, x).0 - q(t - h, x).0) / (2.0 * h);
        let dt1 = (q(t + h, x).1 - q(t - h, x).1) / (2.0 * h);
        let dx0 = (f(t, x + h).0 - f(t, x - h).0) / (2.0 * h);
        let dx1 = (f(t, x + h).1 - f(t, x - h).1) / (2.0 * h);
        let ds = (stress(x + h) - stress(x - h)) / (2.0 * h);
        let s = mm.source(t, x);
        assert!((s[0] - (dt0 + dx0)).abs() < 1e-7);
        assert!((s[1] - (dt1 + dx1 - ds)).abs() < 1e-7);
    }
}
