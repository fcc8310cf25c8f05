//! Particle paths through stored velocity snapshots and the transport
//! identity `ρ(x,t) = ρ(X(s),s) exp(−∫_s^t u_x(X(τ),τ) dτ)`.

use super::functionals::Frame;
use crate::background::Background;
use crate::error::{domain, Result};
use crate::gas::GasParams;
use crate::grid::Grid1D;
use crate::initdata::gradient;
use crate::solver::SimState;
use serde::Serialize;

/// `ρ`, `u` and `u_x` on every snapshot, ready for space-time interpolation.
#[derive(Debug, Clone)]
pub struct VelocityTable {
    grid: Grid1D,
    t: Vec<f64>,
    rho: Vec<Vec<f64>>,
    u: Vec<Vec<f64>>,
    u_x: Vec<Vec<f64>>,
    floor: f64,
}

impl VelocityTable {
    /// Snapshots must be sorted in time; velocity on vacuum cells is `ū`.
    pub fn new(
        grid: Grid1D,
        snaps: &[SimState],
        bg: &dyn Background,
        gas: GasParams,
        u_floor: f64,
    ) -> Result<Self> {
        if snaps.is_empty() {
            return Err(domain("no snapshots to build a velocity table from"));
        }
        if snaps.windows(2).any(|w| !(w[1].t > w[0].t)) {
            return Err(domain("snapshot times must be strictly increasing"));
        }
        let xs = grid.centers();
        let dx = grid.dx();
        let mut table = Self {
            grid,
            t: Vec::with_capacity(snaps.len()),
            rho: Vec::with_capacity(snaps.len()),
            u: Vec::with_capacity(snaps.len()),
            u_x: Vec::with_capacity(snaps.len()),
            floor: u_floor,
        };
        for s in snaps {
            if s.rho.len() != grid.n {
                return Err(domain(format!(
                    "snapshot at t = {} has {} cells, grid has {}",
                    s.t,
                    s.rho.len(),
                    grid.n
                )));
            }
            let wave = bg.field(s.t, &xs)?;
            let f = Frame::new(&xs, dx, &s.rho, &s.m, &wave, gas, u_floor)?;
            table.t.push(s.t);
            table.u_x.push(gradient(&f.u, dx));
            table.u.push(f.u);
            table.rho.push(s.rho.clone());
        }
        Ok(table)
    }

    pub fn time_range(&self) -> (f64, f64) {
        (self.t[0], self.t[self.t.len() - 1])
    }

    /// Linear interpolation of `field` at `(x, s)`; `None` outside the
    /// convex hull of the cell centers.
    fn sample(&self, field: &[Vec<f64>], x: f64, s: f64) -> Option<f64> {
        let n = self.grid.n;
        let dx = self.grid.dx();
        let x0 = self.grid.center(0);
        let p = (x - x0) / dx;
        if !(p >= 0.0 && p <= (n - 1) as f64) {
            return None;
        }
        let i = (p.floor() as usize).min(n - 2);
        let a = p - i as f64;
        let at = |k: usize| (1.0 - a) * field[k][i] + a * field[k][i + 1];
        let m = self.t.len();
        if m == 1 {
            return Some(at(0));
        }
        let k = self.t.partition_point(|&tk| tk <= s).clamp(1, m - 1) - 1;
        let b = ((s - self.t[k]) / (self.t[k + 1] - self.t[k])).clamp(0.0, 1.0);
        Some((1.0 - b) * at(k) + b * at(k + 1))
    }

    pub fn rho(&self, x: f64, s: f64) -> Option<f64> {
        self.sample(&self.rho, x, s)
    }

    pub fn velocity(&self, x: f64, s: f64) -> Option<(f64, f64)> {
        Some((self.sample(&self.u, x, s)?, self.sample(&self.u_x, x, s)?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathResult {
    pub x_seed: f64,
    pub t_from: f64,
    pub t_to: f64,
    /// `(s, X(s))` from `t_to` back to `t_from`.
    pub trajectory: Vec<(f64, f64)>,
    /// `∫_{t_from}^{t_to} u_x(X(s),s) ds`.
    pub stretch: f64,
    pub rho_seed: f64,
    pub rho_foot: f64,
    /// `|ρ(x,t) − ρ(X(t_from),t_from) e^{−stretch}| / max(ρ(x,t), floor)`.
    pub defect: f64,
    /// The path left the grid before reaching `t_from`.
    pub truncated: bool,
}

/// Traces the particle through `(x_seed, t_to)` back to `t_from` with the
/// classical four-stage Runge-Kutta method, `substeps` steps per snapshot
/// interval, integrating `u_x` along the way.
pub fn particle_path(
    table: &VelocityTable,
    x_seed: f64,
    t_from: f64,
    t_to: f64,
    substeps: usize,
) -> Result<PathResult> {
    let (lo, hi) = table.time_range();
    let tol = 1e-9 * hi.abs().max(1.0);
    if !(t_from >= lo - tol && t_to <= hi + tol && t_from <= t_to) {
        return Err(domain(format!(
            "path interval [{t_from}, {t_to}] outside stored snapshots [{lo}, {hi}]"
        )));
    }
    let rho_seed = table
        .rho(x_seed, t_to)
        .ok_or_else(|| domain(format!("seed {x_seed} lies outside the grid")))?;
    let intervals = table
        .t
        .iter()
        .filter(|&&t| t > t_from + tol && t < t_to - tol)
        .count()
        + 1;
    let steps = if t_to > t_from {
        intervals * substeps.max(1)
    } else {
        0
    };
    let h = if steps > 0 {
        (t_to - t_from) / steps as f64
    } else {
        0.0
    };
    // state (X, K) with K(s) = ∫_s^{t_to} u_x, integrated backwards in s
    let rhs = |x: f64, s: f64| table.velocity(x, s).map(|(u, ux)| (u, -ux));
    let mut x = x_seed;
    let mut k = 0.0;
    let mut s = t_to;
    let mut trajectory = vec![(s, x)];
    let mut truncated = false;
    for _ in 0..steps {
        let step = || -> Option<(f64, f64)> {
            let hb = -h;
            let (a1, b1) = rhs(x, s)?;
            let (a2, b2) = rhs(x + 0.5 * hb * a1, s + 0.5 * hb)?;
            let (a3, b3) = rhs(x + 0.5 * hb * a2, s + 0.5 * hb)?;
            let (a4, b4) = rhs(x + hb * a3, s + hb)?;
            Some((
                x + hb / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4),
                k + hb / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4),
            ))
        };
        match step() {
            Some((xn, kn)) => {
                x = xn;
                k = kn;
                s -= h;
                trajectory.push((s, x));
            }
            None => {
                truncated = true;
                break;
            }
        }
    }
    let (rho_foot, defect) = if truncated {
        (f64::NAN, f64::NAN)
    } else {
        let rf = table.rho(x, t_from).ok_or_else(|| domain("path foot left the grid"))?;
        let d = (rho_seed - rf * (-k).exp()).abs() / rho_seed.max(table.floor);
        (rf, d)
    };
    Ok(PathResult {
        x_seed,
        t_from,
        t_to,
        trajectory,
        stretch: k,
        rho_seed,
        rho_foot,
        defect,
        truncated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::background::ConstantState;

    fn uniform(n: usize, c: f64) -> (Grid1D, Vec<SimState>, ConstantState) {
        let grid = Grid1D::new(0.0, 10.0, n).unwrap();
        let gas = GasParams::default();
        let bg = ConstantState::new(1.0, c, gas).unwrap();
        let snaps = (0..=10)
            .map(|k| SimState {
                t: k as f64 * 0.1,
                rho: vec![1.0; n],
                m: vec![c; n],
            })
            .collect();
        (grid, snaps, bg)
    }

    #[test]
    fn constant_velocity_gives_straight_line() {
        let (grid, snaps, bg) = uniform(50, 0.7);
        let tab = VelocityTable::new(grid, &snaps, &bg, GasParams::default(), 1e-10).unwrap();
        let p = particle_path(&tab, 5.0, 0.0, 1.0, 4).unwrap();
        assert!(!p.truncated);
        for (s, x) in &p.trajectory {
            assert!((x - (5.0 + 0.7 * (s - 1.0))).abs() < 1e-12);
        }
        assert!(p.defect < 1e-14);
    }

    #[test]
    fn zero_length_path_stays_put() {
        let (grid, snaps, bg) = uniform(50, 0.7);
        let tab = VelocityTable::new(grid, &snaps, &bg, GasParams::default(), 1e-10).unwrap();
        let p = particle_path(&tab, 3.3, 0.5, 0.5, 4).unwrap();
        assert_eq!(p.trajectory, vec![(0.5, 3.3)]);
        assert_eq!(p.defect, 0.0);
    }

    #[test]
    fn leaving_the_grid_is_flagged() {
        let (grid, snaps, bg) = uniform(50, 20.0);
        let tab = VelocityTable::new(grid, &snaps, &bg, GasParams::default(), 1e-10).unwrap();
        let p = particle_path(&tab, 1.0, 0.0, 1.0, 4).unwrap();
        assert!(p.truncated);
        assert!(particle_path(&tab, 1.0, 0.0, 2.0, 4).is_err());
    }

    /// `u = x/(1+t)`, `ρ = ρ₀(x/(1+t))/(1+t)` solves the mass equation with
    /// paths `X(s) = x(1+s)/(1+t)`.
    #[test]
    fn stretching_flow_satisfies_transport_identity() {
        let gas = GasParams::default();
        struct Flat;
        impl Background for Flat {
            fn field(&self, _t: f64, xs: &[f64]) -> Result<Vec<crate::rarefaction::WavePoint>> {
                Ok(vec![crate::rarefaction::WavePoint { rho: 1.0, ..Default::default() }; xs.len()])
            }
            fn rho_inf(&self) -> f64 {
                1.0
            }
            fn rho_sup(&self) -> f64 {
                1.0
            }
            fn max_speed(&self) -> f64 {
                1.0
            }
            fn extent(&self, _t: f64) -> (f64, f64) {
                (0.0, 0.0)
            }
        }
        let mut defects = Vec::new();
        for n in [200usize, 400] {
            let grid = Grid1D::new(-4.0, 4.0, n).unwrap();
            let xs = grid.centers();
            let snaps: Vec<SimState> = (0..=n / 10)
                .map(|k| {
                    let t = k as f64 / (n / 10) as f64;
                    let rho: Vec<f64> = xs
                        .iter()
                        .map(|x| (1.0 + 0.5 * (-(x / (1.0 + t)).powi(2)).exp()) / (1.0 + t))
                        .collect();
                    let m = xs.iter().zip(&rho).map(|(x, r)| r * x / (1.0 + t)).collect();
                    SimState { t, rho, m }
                })
                .collect();
            let tab = VelocityTable::new(grid, &snaps, &Flat, gas, 1e-10).unwrap();
            let p = particle_path(&tab, 1.0, 0.0, 1.0, 4).unwrap();
            assert!((p.trajectory.last().unwrap().1 - 0.5).abs() < 1e-3);
            assert!((p.stretch - 2f64.ln()).abs() < 1e-3);
            defects.push(p.defect);
        }
        assert!(defects[1] < 1e-3 && defects[1] < defects[0], "{defects:?}");
    }
}
