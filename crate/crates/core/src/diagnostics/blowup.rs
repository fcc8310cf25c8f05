use crate::error::{domain, Result};
use crate::quad::cumulative_trapezoid;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlowupReport {
    pub t_start: f64,
    pub eta: f64,
    /// `∫_{t_start}^{t_start+eta} ‖u_x‖_∞ ds`.
    pub window: f64,
    /// `(t, ∫_0^t ‖u_x‖_∞ ds)` at every sample.
    pub cumulative: Vec<(f64, f64)>,
}

/// Integral of the piecewise-linear interpolant of `(t, y)` over `[a, b]`.
fn window_integral(t: &[f64], y: &[f64], a: f64, b: f64) -> f64 {
    let mut acc = 0.0;
    for k in 0..t.len() - 1 {
        let (t0, t1) = (t[k], t[k + 1]);
        let (lo, hi) = (a.max(t0), b.min(t1));
        if hi <= lo {
            continue;
        }
        let at = |s: f64| y[k] + (y[k + 1] - y[k]) * (s - t0) / (t1 - t0);
        acc += 0.5 * (hi - lo) * (at(lo) + at(hi));
    }
    acc
}

/// Windowed and cumulative time integrals of a sampled `‖u_x‖_∞` series.
pub fn blowup_indicator(t: &[f64], ux_sup: &[f64], t_start: f64, eta: f64) -> Result<BlowupReport> {
    if t.len() != ux_sup.len() || t.len() < 2 {
        return Err(domain("blow-up indicator needs at least two matching samples"));
    }
    if !(eta > 0.0) {
        return Err(domain(format!("window length must be positive, got {eta}")));
    }
    let (lo, hi) = (t[0], t[t.len() - 1]);
    let tol = 1e-9 * hi.abs().max(1.0);
    if t_start < lo - tol || t_start + eta > hi + tol {
        return Err(domain(format!(
            "window [{t_start}, {}] outside the run horizon [{lo}, {hi}]",
            t_start + eta
        )));
    }
    let cum = cumulative_trapezoid(t, ux_sup);
    Ok(BlowupReport {
        t_start,
        eta,
        window: window_integral(t, ux_sup, t_start, t_start + eta),
        cumulative: t.iter().copied().zip(cum).collect(),
    })
}
