//! Space-time residuals of the integral identities satisfied by weak
//! solutions, evaluated on stored snapshots.

use super::functionals::Frame;
use crate::background::Background;
use crate::error::{domain, Result};
use crate::gas::GasParams;
use crate::grid::Grid1D;
use crate::initdata::gradient;
use crate::solver::SimState;
use serde::{Deserialize, Serialize};

/// `b(z)`, `b′(z)`, `b″(z)` for `b(z) = exp(1 − 1/(1−z²))` on `|z| < 1`.
fn bump3(z: f64) -> (f64, f64, f64) {
    if z.abs() >= 1.0 {
        return (0.0, 0.0, 0.0);
    }
    let s = 1.0 - z * z;
    let b = (1.0 - 1.0 / s).exp();
    let g = -2.0 * z / (s * s);
    let g_z = -2.0 / (s * s) - 8.0 * z * z / (s * s * s);
    (b, b * g, b * (g * g + g_z))
}

/// `ψ(x,t) = b((x−x_c)/h_x) · b((t−t_c)/h_t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceTimeBump {
    pub x_center: f64,
    pub x_half_width: f64,
    pub t_center: f64,
    pub t_half_width: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpValue {
    pub v: f64,
    pub v_t: f64,
    pub v_x: f64,
    pub v_xx: f64,
}

impl SpaceTimeBump {
    pub fn eval(&self, t: f64, x: f64) -> BumpValue {
        let (bx, bx1, bx2) = bump3((x - self.x_center) / self.x_half_width);
        let (bt, bt1, _) = bump3((t - self.t_center) / self.t_half_width);
        BumpValue {
            v: bx * bt,
            v_t: bx * bt1 / self.t_half_width,
            v_x: bx1 * bt / self.x_half_width,
            v_xx: bx2 * bt / (self.x_half_width * self.x_half_width),
        }
    }

    pub fn t_support(&self) -> (f64, f64) {
        (self.t_center - self.t_half_width, self.t_center + self.t_half_width)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct WeakResidual {
    pub t1: f64,
    pub t2: f64,
    pub mass: f64,
    pub momentum: f64,
    /// Sum of the magnitudes of the integrals entering each identity.
    pub mass_scale: f64,
    pub momentum_scale: f64,
}

struct Slice {
    /// `∫(ρ−ρ̄)ζ`, `∫(m−m̄)ψ`
    boundary: [f64; 2],
    /// Space integrals of the time-integrated parts.
    volume: [f64; 2],
    scale: [f64; 2],
}

fn slice(f: &Frame, test: &SpaceTimeBump, t: f64) -> Slice {
    let g = &f.gas;
    let a = g.alpha;
    let s_x = gradient(&f.rho.iter().map(|r| r.max(0.0).powf(a - 0.5)).collect::<Vec<_>>(), f.dx);
    let th_x = gradient(&f.rho.iter().map(|r| r.max(0.0).powf(g.theta)).collect::<Vec<_>>(), f.dx);
    let mut out = Slice {
        boundary: [0.0; 2],
        volume: [0.0; 2],
        scale: [0.0; 2],
    };
    for i in 0..f.len() {
        let p = test.eval(t, f.x[i]);
        if p.v == 0.0 && p.v_x == 0.0 && p.v_xx == 0.0 {
            continue;
        }
        let w = &f.wave[i];
        let r = f.rho[i].max(0.0);
        let u = f.u[i];
        let gp = f.gap[i];
        let dr = r - w.rho;
        let dm = f.m[i] - w.rho * w.u;
        let flux = r * u * u + g.pressure_raw(r) - w.rho * w.u * w.u - g.pressure_raw(w.rho);
        // ⟨ρ^α (u−ū)_x, ψ_x⟩ written without derivatives of u
        let sq = r.sqrt() * gp;
        let pair_a = -r.powf(a - 0.5) * sq * p.v_xx - 2.0 * a / (2.0 * a - 1.0) * s_x[i] * sq * p.v_x;
        let pair_e = g.eps * (-r.powf(g.theta) * gp * p.v_xx - th_x[i] * gp * p.v_x);
        let mean_visc = g.viscosity_raw(r) * w.u_x * p.v_x;

        let mass_vol = dr * p.v_t + dm * p.v_x;
        let mom_vol = dm * p.v_t + flux * p.v_x - pair_a - pair_e - mean_visc;
        out.boundary[0] += dr * p.v;
        out.boundary[1] += dm * p.v;
        out.volume[0] += mass_vol;
        out.volume[1] += mom_vol;
        out.scale[0] += (dr * p.v_t).abs() + (dm * p.v_x).abs();
        out.scale[1] += (dm * p.v_t).abs()
            + (flux * p.v_x).abs()
            + pair_a.abs()
            + pair_e.abs()
            + mean_visc.abs();
    }
    for k in 0..2 {
        out.boundary[k] *= f.dx;
        out.volume[k] *= f.dx;
        out.scale[k] *= f.dx;
    }
    out
}

/// Residuals of
/// `∫(ρ−ρ̄)ζ|_{t₁}^{t₂} = ∫∫(ρ−ρ̄)ζ_t + (ρu−ρ̄ū)ζ_x` and
/// `∫(m−m̄)ψ|_{t₁}^{t₂} = ∫∫(m−m̄)ψ_t + (ρu²+p−ρ̄ū²−p̄)ψ_x − ⟨μ(u−ū)_x,ψ_x⟩ − μū_xψ_x`,
/// with `ζ = ψ = test`, the viscous pairing evaluated in its integrated-by-
/// parts form and the time integral by the trapezoid rule over the snapshots
/// in `[t1, t2]`.
#[allow(clippy::too_many_arguments)]
pub fn weak_form_residual(
    grid: &Grid1D,
    snaps: &[SimState],
    bg: &dyn Background,
    gas: GasParams,
    u_floor: f64,
    test: &SpaceTimeBump,
    t1: f64,
    t2: f64,
) -> Result<WeakResidual> {
    if !(test.x_half_width > 0.0 && test.t_half_width > 0.0) {
        return Err(domain("test function widths must be positive"));
    }
    let dx = grid.dx();
    let (a, b) = (test.x_center - test.x_half_width, test.x_center + test.x_half_width);
    if a < grid.x_left + 2.0 * dx || b > grid.x_right - 2.0 * dx {
        return Err(domain(format!(
            "test function support [{a}, {b}] touches the boundary of [{}, {}]",
            grid.x_left, grid.x_right
        )));
    }
    if !(t2 > t1) {
        return Err(domain(format!("need t1 < t2, got [{t1}, {t2}]")));
    }
    let tol = 1e-9 * t2.abs().max(1.0);
    let sel: Vec<&SimState> = snaps
        .iter()
        .filter(|s| s.t >= t1 - tol && s.t <= t2 + tol)
        .collect();
    let starts = sel.first().map_or(false, |s| (s.t - t1).abs() <= tol);
    let ends = sel.last().map_or(false, |s| (s.t - t2).abs() <= tol);
    if sel.len() < 2 || !starts || !ends {
        return Err(domain(format!(
            "snapshots do not cover [{t1}, {t2}] with both endpoints stored"
        )));
    }
    let xs = grid.centers();
    let mut prev: Option<(f64, Slice)> = None;
    let mut first_boundary = [0.0; 2];
    let mut vol = [0.0; 2];
    let mut scale = [0.0; 2];
    for (k, s) in sel.iter().enumerate() {
        if s.rho.len() != grid.n {
            return Err(domain(format!("snapshot at t = {} has {} cells, grid has {}", s.t, s.rho.len(), grid.n)));
        }
        let wave = bg.field(s.t, &xs)?;
        let f = Frame::new(&xs, dx, &s.rho, &s.m, &wave, gas, u_floor)?;
        let cur = slice(&f, test, s.t);
        if k == 0 {
            first_boundary = cur.boundary;
        }
        if let Some((tp, p)) = &prev {
            let h = s.t - tp;
            for j in 0..2 {
                vol[j] += 0.5 * h * (p.volume[j] + cur.volume[j]);
                scale[j] += 0.5 * h * (p.scale[j] + cur.scale[j]);
            }
        }
        prev = Some((s.t, cur));
    }
    let last = prev.map(|p| p.1.boundary).unwrap_or_default();
    let mut res = [0.0; 2];
    for j in 0..2 {
        let jump = last[j] - first_boundary[j];
        res[j] = (jump - vol[j]).abs();
        scale[j] += last[j].abs() + first_boundary[j].abs();
    }
    Ok(WeakResidual {
        t1,
        t2,
        mass: res[0],
        momentum: res[1],
        mass_scale: scale[0],
        momentum_scale: scale[1],
    })
}
