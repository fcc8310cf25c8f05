//! Decay-rate measurements for the wave derivatives.
//!
//! Every derivative of the wave at time `t` is a closed-form function of the
//! characteristic foot `x₀`, so norms are computed in the foot variable
//! `x₀ = tan(s)/η` over the whole line, with no truncation error.

use super::{BurgersPoint, WavePoint, WaveProfile};
use crate::error::{domain, Result};
use crate::quad::{cumulative_trapezoid, lsq_slope, QuadTol};
use serde::Serialize;
use std::f64::consts::FRAC_PI_2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateRow {
    pub t: f64,
    pub rho_x: f64,
    pub u_x: f64,
    pub rho_xx: f64,
    pub u_xx: f64,
    /// `‖ū_xx(t)‖_∞` regardless of the requested exponent.
    pub u_xx_sup: f64,
    /// Trapezoid integral of `u_xx_sup` from the first grid time to `t`.
    pub u_xx_sup_cum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateReport {
    pub p: f64,
    pub rows: Vec<RateRow>,
    /// Least-squares slopes of `log‖·‖` against `log(1+t)` in column order
    /// `ρ̄_x, ū_x, ρ̄_xx, ū_xx`.
    pub exponents: [f64; 4],
}

type Selector = fn(&WavePoint) -> f64;

const FIELDS: [Selector; 4] = [|p| p.rho_x, |p| p.u_x, |p| p.rho_xx, |p| p.u_xx];

fn point(wp: &WaveProfile, t: f64, x0: f64) -> Result<(BurgersPoint, WavePoint)> {
    let b = wp.burgers().point_from_foot(1.0 + t, x0);
    let w = wp.invert(&b)?;
    Ok((b, w))
}

/// `sup_x |f(ū, ρ̄)(t, x)|`, sampled in the foot angle and refined by golden section.
pub fn sup_norm(wp: &WaveProfile, t: f64, f: Selector) -> Result<f64> {
    const N: usize = 2001;
    let eta = wp.eta;
    let val = |s: f64| -> Result<f64> {
        let (_, p) = point(wp, t, s.tan() / eta)?;
        Ok(f(&p).abs())
    };
    let h = 2.0 * FRAC_PI_2 / (N + 1) as f64;
    let mut best = (0.0, -FRAC_PI_2 + h);
    for i in 1..=N {
        let s = -FRAC_PI_2 + i as f64 * h;
        let v = val(s)?;
        if v > best.0 {
            best = (v, s);
        }
    }
    let (mut a, mut b) = (
        (best.1 - h).max(-FRAC_PI_2 + 1e-15),
        (best.1 + h).min(FRAC_PI_2 - 1e-15),
    );
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (val(c)?, val(d)?);
    for _ in 0..80 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = val(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = val(d)?;
        }
        if b - a < 1e-14 {
            break;
        }
    }
    Ok(best.0.max(fc).max(fd))
}

/// `‖f(t, ·)‖_{L^p}` for finite `p` over the whole line.
pub fn lp_norm(wp: &WaveProfile, t: f64, p: f64, f: Selector) -> Result<f64> {
    let tol = QuadTol {
        abs: 1e-15,
        rel: 1e-11,
        max_panels: 4000,
    };
    let integral = wp.burgers().integrate_over_line(
        1.0 + t,
        |b| match wp.invert(b) {
            Ok(w) => f(&w).abs().powf(p),
            Err(_) => f64::NAN,
        },
        tol,
    )?;
    Ok(integral.powf(1.0 / p))
}

fn norm(wp: &WaveProfile, t: f64, p: f64, f: Selector) -> Result<f64> {
    if p.is_infinite() {
        sup_norm(wp, t, f)
    } else {
        lp_norm(wp, t, p, f)
    }
}

/// Norms of `ρ̄_x, ū_x, ρ̄_xx, ū_xx` on `t_grid` with fitted decay exponents.
pub fn rate_report(wp: &WaveProfile, p: f64, t_grid: &[f64]) -> Result<RateReport> {
    if !(p > 1.0) {
        return Err(domain(format!("norm exponent must be > 1, got {p}")));
    }
    if t_grid.is_empty() || t_grid[0] < 0.0 || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(domain("time grid must be non-empty, nonnegative and increasing"));
    }
    let mut rows = Vec::with_capacity(t_grid.len());
    let mut sups = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let mut n = [0.0; 4];
        for (k, f) in FIELDS.iter().enumerate() {
            n[k] = norm(wp, t, p, *f)?;
        }
        let s = if p.is_infinite() {
            n[3]
        } else {
            sup_norm(wp, t, FIELDS[3])?
        };
        sups.push(s);
        rows.push(RateRow {
            t,
            rho_x: n[0],
            u_x: n[1],
            rho_xx: n[2],
            u_xx: n[3],
            u_xx_sup: s,
            u_xx_sup_cum: 0.0,
        });
    }
    let cum = cumulative_trapezoid(t_grid, &sups);
    for (r, c) in rows.iter_mut().zip(cum) {
        r.u_xx_sup_cum = c;
    }
    let lt: Vec<f64> = t_grid.iter().map(|t| (1.0 + t).ln()).collect();
    let mut exponents = [f64::NAN; 4];
    if rows.len() >= 2 {
        for (k, e) in exponents.iter_mut().enumerate() {
            let ly: Vec<f64> = rows
                .iter()
                .map(|r| [r.rho_x, r.u_x, r.rho_xx, r.u_xx][k].ln())
                .collect();
            *e = lsq_slope(&lt, &ly);
        }
    }
    Ok(RateReport { p, rows, exponents })
}

/// `∫₀^T ‖ū_xx(t)‖_∞ dt` by composite Simpson in `τ = ln(1+t)` with `n` panels.
pub fn cumulative_sup_integral(wp: &WaveProfile, t_end: f64, n: usize) -> Result<f64> {
    if !(t_end >= 0.0) {
        return Err(domain(format!("end time must be >= 0, got {t_end}")));
    }
    let n = (n.max(2) + 1) & !1;
    let tau_end = t_end.ln_1p();
    let h = tau_end / n as f64;
    let mut acc = 0.0;
    for i in 0..=n {
        let tau = i as f64 * h;
        let w = if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += w * sup_norm(wp, tau.exp_m1(), FIELDS[3])? * tau.exp();
    }
    Ok(acc * h / 3.0)
}
