//! Initial data with vacuum regions and their regularization for the
//! `ε > 0` approximate system.

use crate::background::Background;
use crate::error::{domain, Error, Result};
use crate::gas::GasParams;
use crate::grid::Grid1D;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Sampled initial data on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialData {
    pub grid: Grid1D,
    pub rho0: Vec<f64>,
    pub m0: Vec<f64>,
}

impl InitialData {
    pub fn new(grid: Grid1D, rho0: Vec<f64>, m0: Vec<f64>) -> Result<Self> {
        if rho0.len() != grid.n || m0.len() != grid.n {
            return Err(domain(format!(
                "initial fields have {} and {} samples for a grid of {} cells",
                rho0.len(),
                m0.len(),
                grid.n
            )));
        }
        Ok(Self { grid, rho0, m0 })
    }

    /// Maximal runs of exactly-zero density as `[x_first, x_last]` cell centers.
    pub fn vacuum_set(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        let mut start = None;
        for (i, &r) in self.rho0.iter().enumerate() {
            match (r == 0.0, start) {
                (true, None) => start = Some(i),
                (false, Some(s)) => {
                    out.push((self.grid.center(s), self.grid.center(i - 1)));
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            out.push((self.grid.center(s), self.grid.center(self.grid.n - 1)));
        }
        out
    }

    /// Reads two-column CSV files `(x, rho0)` and `(x, m0)` sampled at the
    /// cell centers of `grid`.
    pub fn from_csv(grid: Grid1D, rho_path: &Path, m_path: &Path) -> Result<Self> {
        let rho = read_column_pair(rho_path, &grid)?;
        let m = read_column_pair(m_path, &grid)?;
        Self::new(grid, rho, m)
    }
}

fn read_column_pair(path: &Path, grid: &Grid1D) -> Result<Vec<f64>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let tol = 1e-9 * grid.dx();
    let mut out = Vec::with_capacity(grid.n);
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        if rec.len() != 2 {
            return Err(Error::format(path, format!("row {} has {} columns, expected 2", i + 1, rec.len())));
        }
        let parse = |k: usize| -> Result<f64> {
            rec[k]
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::format(path, format!("row {}: {e}", i + 1)))
        };
        let (x, v) = (parse(0)?, parse(1)?);
        if i >= grid.n || (x - grid.center(i)).abs() > tol {
            return Err(Error::format(
                path,
                format!("row {} at x={x} does not match the grid cell centers", i + 1),
            ));
        }
        out.push(v);
    }
    if out.len() != grid.n {
        return Err(Error::format(
            path,
            format!("{} rows for a grid of {} cells", out.len(), grid.n),
        ));
    }
    Ok(out)
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::format(path, format!("{other:?}")),
    }
}

/// One admissibility check with its computed value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Centered differences, one-sided at the ends.
pub(crate) fn gradient(f: &[f64], dx: f64) -> Vec<f64> {
    let n = f.len();
    if n < 2 {
        return vec![0.0; n];
    }
    let mut g = vec![0.0; n];
    g[0] = (f[1] - f[0]) / dx;
    g[n - 1] = (f[n - 1] - f[n - 2]) / dx;
    for i in 1..n - 1 {
        g[i] = (f[i + 1] - f[i - 1]) / (2.0 * dx);
    }
    g
}

/// Checks the admissibility conditions on sampled data: positivity, zero
/// momentum on vacuum, far-field limits, and finiteness of the four
/// perturbation integrals.
pub fn validate(
    data: &InitialData,
    bg: &dyn Background,
    gas: &GasParams,
    far_tol: f64,
) -> Result<ValidationReport> {
    let grid = &data.grid;
    let dx = grid.dx();
    let xs = grid.centers();
    let wave = bg.field(0.0, &xs)?;
    let rho = &data.rho0;
    let m = &data.m0;
    let mut checks = Vec::new();

    let min_rho = rho.iter().cloned().fold(f64::INFINITY, f64::min);
    checks.push(Check {
        name: "rho_nonnegative",
        value: min_rho,
        pass: min_rho >= 0.0 && rho.iter().all(|r| r.is_finite()),
    });
    let vac_m = rho
        .iter()
        .zip(m)
        .filter(|(r, _)| **r == 0.0)
        .map(|(_, mm)| mm.abs())
        .fold(0.0, f64::max);
    checks.push(Check {
        name: "momentum_zero_on_vacuum",
        value: vac_m,
        pass: vac_m == 0.0,
    });
    let n = grid.n;
    let left = (rho[0] - wave[0].rho).abs();
    let right = (rho[n - 1] - wave[n - 1].rho).abs();
    let far = left.max(right);
    checks.push(Check {
        name: "far_field_limits",
        value: far,
        pass: far <= far_tol * wave[0].rho.max(wave[n - 1].rho),
    });

    let pw: Vec<f64> = rho.iter().map(|r| r.max(0.0).powf(gas.alpha - 0.5)).collect();
    let bd: f64 = gradient(&pw, dx).iter().map(|g| g * g).sum::<f64>() * dx;
    let mut ent = 0.0;
    let mut kin = 0.0;
    let mut cub = 0.0;
    for i in 0..n {
        let r = rho[i].max(0.0);
        ent += gas.rho_psi_raw(r, wave[i].rho);
        if r > 0.0 {
            let du = m[i] / r - wave[i].u;
            kin += r * du * du;
            cub += r * du.abs().powi(3);
        }
    }
    for (name, v) in [
        ("bd_gradient", bd),
        ("relative_entropy", ent * dx),
        ("kinetic_gap", kin * dx),
        ("cubic_gap", cub * dx),
    ] {
        checks.push(Check {
            name,
            value: v,
            pass: v.is_finite(),
        });
    }
    Ok(ValidationReport { checks })
}

/// Result of the lifting step.
#[derive(Debug, Clone, PartialEq)]
pub struct Lifted {
    pub rho1: Vec<f64>,
    /// Plateau half-width `M`.
    pub m_half_width: f64,
    /// `ε^{1/(2α−2θ)}`.
    pub floor: f64,
}

pub fn lift_floor(eps: f64, gas: &GasParams) -> f64 {
    eps.powf(1.0 / (2.0 * gas.alpha - 2.0 * gas.theta))
}

/// Adds `ε^{1/(2α−2θ)}` on `|x| ≤ M` with linear ramps to zero on
/// `M ≤ |x| ≤ M+1`. `M` is the smallest grid radius beyond which
/// `ρ₀ ≥ ρ₋/2`, pushed out by one cell.
pub fn lift_density(
    grid: &Grid1D,
    rho0: &[f64],
    eps: f64,
    gas: &GasParams,
    rho_minus: f64,
) -> Result<Lifted> {
    if !(eps > 0.0) {
        return Err(domain(format!("lifting needs eps > 0, got {eps}")));
    }
    let lambda = 0.5 * rho_minus;
    let n = grid.n;
    if rho0[0] < lambda || rho0[n - 1] < lambda {
        return Err(domain(format!(
            "density at the domain edges is below rho_minus/2 = {lambda}; cannot place the lifting plateau"
        )));
    }
    let dx = grid.dx();
    let reach = (0..n)
        .filter(|&i| rho0[i] < lambda)
        .map(|i| grid.center(i).abs())
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))));
    let m_half_width = reach.map_or(0.0, |r| r + dx);
    let floor = lift_floor(eps, gas);
    let rho1 = (0..n)
        .map(|i| {
            let ax = grid.center(i).abs();
            let add = if ax <= m_half_width {
                floor
            } else if ax <= m_half_width + 1.0 {
                floor * (m_half_width + 1.0 - ax)
            } else {
                0.0
            };
            rho0[i] + add
        })
        .collect();
    Ok(Lifted {
        rho1,
        m_half_width,
        floor,
    })
}

/// Discrete weights of the bump kernel `exp(1/(z²−1))` scaled to `radius`,
/// normalized to unit discrete mass. `None` if the radius is below one cell.
fn kernel_weights(radius: f64, dx: f64) -> Option<Vec<f64>> {
    let half = (radius / dx).ceil() as usize;
    if radius <= dx {
        return None;
    }
    let mut w: Vec<f64> = (0..=2 * half)
        .map(|k| {
            let z = (k as f64 - half as f64) * dx / radius;
            if z.abs() < 1.0 {
                (1.0 / (z * z - 1.0)).exp()
            } else {
                0.0
            }
        })
        .collect();
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= s);
    Some(w)
}

/// Convolution with the bump mollifier of the given radius, with constant
/// extension past the grid ends. Radii at or below `dx` leave `f` unchanged.
pub fn mollify(f: &[f64], radius: f64, dx: f64) -> Vec<f64> {
    let Some(w) = kernel_weights(radius, dx) else {
        log::warn!(
            "mollifier radius {radius:e} does not exceed the grid spacing {dx:e}; smoothing skipped"
        );
        return f.to_vec();
    };
    let n = f.len() as isize;
    let half = (w.len() / 2) as isize;
    (0..n)
        .map(|i| {
            w.iter()
                .enumerate()
                .map(|(k, wk)| {
                    let j = (i + k as isize - half).clamp(0, n - 1);
                    wk * f[j as usize]
                })
                .sum()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegularizedData {
    pub grid: Grid1D,
    pub rho0_eps: Vec<f64>,
    pub m0_eps: Vec<f64>,
    pub eps: f64,
    pub radius: f64,
    pub m_half_width: f64,
    pub floor: f64,
    pub min_rho: f64,
    /// Whether `min ρ₀ε ≥ ½ ε^{1/(2α−2θ)}` holds on the grid.
    pub floor_ok: bool,
}

/// `F₀ = ρ₀(m₀/ρ₀ − ū₀)³`, zero on the vacuum set.
pub fn cubic_flux(rho0: &[f64], m0: &[f64], u_bar: &[f64]) -> Vec<f64> {
    rho0.iter()
        .zip(m0)
        .zip(u_bar)
        .map(|((&r, &m), &ub)| if r > 0.0 { r * (m / r - ub).powi(3) } else { 0.0 })
        .collect()
}

/// Lift, mollify the density perturbation, and rebuild momentum from the
/// mollified cubic flux through a signed cube root. `radius` defaults to `eps`.
pub fn regularize(
    data: &InitialData,
    eps: f64,
    radius: Option<f64>,
    bg: &dyn Background,
    gas: &GasParams,
) -> Result<RegularizedData> {
    let grid = data.grid;
    let dx = grid.dx();
    let radius = radius.unwrap_or(eps);
    let lifted = lift_density(&grid, &data.rho0, eps, gas, bg.rho_inf())?;
    let xs = grid.centers();
    let wave = bg.field(0.0, &xs)?;
    let pert: Vec<f64> = lifted
        .rho1
        .iter()
        .zip(&wave)
        .map(|(r, w)| r - w.rho)
        .collect();
    let rho_eps: Vec<f64> = mollify(&pert, radius, dx)
        .iter()
        .zip(&wave)
        .map(|(p, w)| p + w.rho)
        .collect();
    let u_bar: Vec<f64> = wave.iter().map(|w| w.u).collect();
    let f0 = cubic_flux(&data.rho0, &data.m0, &u_bar);
    let f_eps = mollify(&f0, radius, dx);
    let min_rho = rho_eps.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(min_rho > 0.0) {
        return Err(domain(format!(
            "regularized density is not positive (min {min_rho:e})"
        )));
    }
    let m_eps = rho_eps
        .iter()
        .zip(&f_eps)
        .zip(&u_bar)
        .map(|((&r, &f), &ub)| r * (ub + (f / r).cbrt()))
        .collect();
    let floor_ok = min_rho >= 0.5 * lifted.floor;
    if !floor_ok {
        log::warn!(
            "regularized density minimum {min_rho:e} is below half the lifting floor {:e}",
            lifted.floor
        );
    }
    Ok(RegularizedData {
        grid,
        rho0_eps: rho_eps,
        m0_eps: m_eps,
        eps,
        radius,
        m_half_width: lifted.m_half_width,
        floor: lifted.floor,
        min_rho,
        floor_ok,
    })
}

/// Shape parameters of the vacuum-notch benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NotchParams {
    pub notch_center: f64,
    /// Half-width of the interval where `ρ₀ = 0`.
    pub notch_half_width: f64,
    /// Width of the `sin²` ramps on either side; 0 gives sharp edges.
    pub ramp_width: f64,
    pub rho_bump_amp: f64,
    pub rho_bump_center: f64,
    pub rho_bump_width: f64,
    pub u_bump_amp: f64,
    pub u_bump_center: f64,
    pub u_bump_width: f64,
}

impl Default for NotchParams {
    fn default() -> Self {
        Self {
            notch_center: -10.0,
            notch_half_width: 1.0,
            ramp_width: 2.0,
            rho_bump_amp: 0.3,
            rho_bump_center: 20.0,
            rho_bump_width: 5.0,
            u_bump_amp: 0.3,
            u_bump_center: 5.0,
            u_bump_width: 8.0,
        }
    }
}

/// `exp(1 − 1/(1 − z²))` on `|z| < 1`, peak value 1 at `z = 0`.
pub fn bump(z: f64) -> f64 {
    if z.abs() < 1.0 {
        (1.0 - 1.0 / (1.0 - z * z)).exp()
    } else {
        0.0
    }
}

fn notch_factor(x: f64, p: &NotchParams) -> f64 {
    let d = (x - p.notch_center).abs() - p.notch_half_width;
    if d <= 0.0 {
        0.0
    } else if d < p.ramp_width {
        (0.5 * std::f64::consts::PI * d / p.ramp_width).sin().powi(2)
    } else {
        1.0
    }
}

/// Smallest interval holding every cell where the data differ from the
/// reference by more than `tol` in density or momentum.
pub fn perturbation_support(
    data: &InitialData,
    bg: &dyn Background,
    tol: f64,
) -> Result<Option<(f64, f64)>> {
    let xs = data.grid.centers();
    let w = bg.field(0.0, &xs)?;
    let half = 0.5 * data.grid.dx();
    let mut out: Option<(f64, f64)> = None;
    for (i, x) in xs.iter().enumerate() {
        let dr = (data.rho0[i] - w[i].rho).abs();
        let dm = (data.m0[i] - w[i].rho * w[i].u).abs();
        if dr > tol || dm > tol {
            out = Some(match out {
                None => (x - half, x + half),
                Some((a, _)) => (a, x + half),
            });
        }
    }
    Ok(out)
}

/// The wave itself: `(ρ̄₀, ρ̄₀ū₀)`.
pub fn wave_data(grid: Grid1D, bg: &dyn Background) -> Result<InitialData> {
    let w = bg.field(0.0, &grid.centers())?;
    InitialData::new(
        grid,
        w.iter().map(|p| p.rho).collect(),
        w.iter().map(|p| p.rho * p.u).collect(),
    )
}

/// Wave plus a density bump, cut by a vacuum notch, with a velocity bump;
/// `m₀ = ρ₀(ū₀ + δu)` so momentum vanishes on the vacuum set.
pub fn notch_data(grid: Grid1D, bg: &dyn Background, p: &NotchParams) -> Result<InitialData> {
    if !(p.notch_half_width >= 0.0 && p.ramp_width >= 0.0) {
        return Err(domain("notch widths must be nonnegative"));
    }
    if !(p.rho_bump_width > 0.0 && p.u_bump_width > 0.0) {
        return Err(domain("bump widths must be positive"));
    }
    let xs = grid.centers();
    let w = bg.field(0.0, &xs)?;
    let mut rho = Vec::with_capacity(grid.n);
    let mut m = Vec::with_capacity(grid.n);
    for (x, wp) in xs.iter().zip(&w) {
        let base = wp.rho + p.rho_bump_amp * bump((x - p.rho_bump_center) / p.rho_bump_width);
        let r = (base * notch_factor(*x, p)).max(0.0);
        let u = wp.u + p.u_bump_amp * bump((x - p.u_bump_center) / p.u_bump_width);
        rho.push(r);
        m.push(if r > 0.0 { r * u } else { 0.0 });
    }
    InitialData::new(grid, rho, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rarefaction::{sonic_left_velocity, WaveProfile};

    fn wave() -> WaveProfile {
        let gas = GasParams::default();
        WaveProfile::new(gas, 1.0, 2.0, sonic_left_velocity(&gas, 1.0), None, 2.0, 0.1).unwrap()
    }

    fn grid() -> Grid1D {
        Grid1D::new(-400.0, 800.0, 6000).unwrap()
    }

    #[test]
    fn notch_support_covers_bumps_and_notch() {
        let wp = wave();
        let d = notch_data(grid(), &wp, &NotchParams::default()).unwrap();
        let (a, b) = perturbation_support(&d, &wp, 1e-12).unwrap().unwrap();
        // notch plus ramp spans [-13, -7], density bump ends at 25
        let dx = grid().dx();
        assert!((a + 13.0).abs() <= dx, "{a}");
        assert!((b - 25.0).abs() <= dx, "{b}");
        let w = wave_data(grid(), &wp).unwrap();
        assert_eq!(perturbation_support(&w, &wp, 1e-12).unwrap(), None);
    }

    #[test]
    fn wave_data_is_admissible_with_zero_gaps() {
        let wp = wave();
        let d = wave_data(grid(), &wp).unwrap();
        let rep = validate(&d, &wp, &wp.gas, 1e-3).unwrap();
        assert!(rep.passed());
        for name in ["relative_entropy", "kinetic_gap", "cubic_gap"] {
            assert!(rep.get(name).unwrap().value.abs() < 1e-13);
        }
    }

    #[test]
    fn sharp_vacuum_interval_passes_and_bad_momentum_fails() {
        let wp = wave();
        let p = NotchParams {
            notch_center: 0.0,
            notch_half_width: 1.0,
            ramp_width: 0.0,
            rho_bump_amp: 0.0,
            u_bump_amp: 0.0,
            ..NotchParams::default()
        };
        let mut d = notch_data(grid(), &wp, &p).unwrap();
        let rep = validate(&d, &wp, &wp.gas, 1e-3).unwrap();
        assert!(rep.passed(), "{rep:?}");
        let vac = d.vacuum_set();
        assert_eq!(vac.len(), 1);
        assert!(vac[0].0 >= -1.0 && vac[0].1 <= 1.0);
        let i = d.rho0.iter().position(|r| *r == 0.0).unwrap();
        d.m0[i] = 1.0;
        let rep = validate(&d, &wp, &wp.gas, 1e-3).unwrap();
        assert!(!rep.get("momentum_zero_on_vacuum").unwrap().pass);
    }

    #[test]
    fn lift_branches() {
        let wp = wave();
        let g = Grid1D::new(-20.0, 20.0, 400).unwrap();
        let d = wave_data(g, &wp).unwrap();
        let gas = GasParams::new(2.0, 1.0, 1.0 / 3.0, 1e-6).unwrap();
        let l = lift_density(&g, &d.rho0, 1e-6, &gas, 1.0).unwrap();
        // vacuum-free data never drops below ρ₋/2, so M = 0
        assert_eq!(l.m_half_width, 0.0);
        assert!((l.floor - 10f64.powf(-4.5)).abs() < 1e-18);
        for i in 0..g.n {
            let diff = l.rho1[i] - d.rho0[i];
            let ax = g.center(i).abs();
            if ax >= l.m_half_width + 1.0 {
                assert_eq!(diff, 0.0);
            }
            assert!(diff >= 0.0 && diff <= l.floor * (1.0 + 1e-12));
        }
    }

    #[test]
    fn lift_covers_vacuum_notch() {
        let wp = wave();
        let g = grid();
        let d = notch_data(g, &wp, &NotchParams::default()).unwrap();
        let gas = GasParams::new(2.0, 1.0, 1.0 / 3.0, 1e-6).unwrap();
        let l = lift_density(&g, &d.rho0, 1e-6, &gas, 1.0).unwrap();
        assert!(l.m_half_width > 11.0 && l.m_half_width < 13.0);
        let min = l.rho1.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(min >= l.floor * (1.0 - 1e-12));
        let total: f64 = l.rho1.iter().zip(&d.rho0).map(|(a, b)| a - b).sum::<f64>() * g.dx();
        assert!(total <= 2.0 * (l.m_half_width + 1.0) * l.floor);
    }

    #[test]
    fn lift_rejects_low_far_field() {
        let g = Grid1D::new(-5.0, 5.0, 100).unwrap();
        let rho = vec![0.1; 100];
        let gas = GasParams::default();
        assert!(lift_density(&g, &rho, 1e-4, &gas, 1.0).is_err());
    }

    #[test]
    fn mollify_constants_and_steps() {
        let c = vec![3.5; 200];
        for v in mollify(&c, 0.2, 0.01) {
            assert!((v - 3.5).abs() < 1e-14);
        }
        let step: Vec<f64> = (0..200).map(|i| if i < 100 { 1.0 } else { 2.0 }).collect();
        let s = mollify(&step, 0.2, 0.01);
        for w in s.windows(2) {
            assert!(w[1] >= w[0] - 1e-15);
        }
        assert!(s.iter().all(|v| (1.0 - 1e-15..=2.0 + 1e-15).contains(v)));
        // support widens by at most the radius
        assert!((s[79] - 1.0).abs() < 1e-14);
        assert!((s[120] - 2.0).abs() < 1e-14);
        assert_eq!(mollify(&step, 0.005, 0.01), step);
    }

    #[test]
    fn mollify_first_order_in_l1() {
        let dx = 1e-3;
        let n = 4000;
        let f: Vec<f64> = (0..n)
            .map(|i| {
                let x = -2.0 + (i as f64 + 0.5) * dx;
                if x.abs() < 1.0 { 1.0 + x } else { 0.0 }
            })
            .collect();
        let err = |r: f64| -> f64 {
            mollify(&f, r, dx).iter().zip(&f).map(|(a, b)| (a - b).abs()).sum::<f64>() * dx
        };
        let (e1, e2, e3) = (err(0.2), err(0.1), err(0.05));
        for ratio in [e1 / e2, e2 / e3] {
            assert!((ratio - 2.0).abs() < 0.6, "ratio {ratio}");
        }
    }

    #[test]
    fn regularize_wave_aligned_momentum() {
        let wp = wave();
        let g = grid();
        let d = notch_data(g, &wp, &NotchParams { u_bump_amp: 0.0, ..NotchParams::default() }).unwrap();
        let gas = GasParams::new(2.0, 1.0, 1.0 / 3.0, 1e-4).unwrap();
        let r = regularize(&d, 1e-4, Some(1.0), &wp, &gas).unwrap();
        let w = wp.wave_field(0.0, &g.centers()).unwrap();
        for i in 0..g.n {
            assert!((r.m0_eps[i] - r.rho0_eps[i] * w[i].u).abs() < 1e-14);
        }
        assert!(r.min_rho >= 0.5 * r.floor);
        assert!(r.floor_ok);
    }

    #[test]
    fn regularize_preserves_sign_of_cubic_flux() {
        let wp = wave();
        let g = grid();
        let p = NotchParams { u_bump_amp: -0.4, ..NotchParams::default() };
        let d = notch_data(g, &wp, &p).unwrap();
        let gas = GasParams::new(2.0, 1.0, 1.0 / 3.0, 1e-4).unwrap();
        let r = regularize(&d, 1e-4, Some(1.0), &wp, &gas).unwrap();
        let w = wp.wave_field(0.0, &g.centers()).unwrap();
        let i = g.centers().iter().position(|x| (*x - 5.0).abs() < 0.2).unwrap();
        assert!(r.m0_eps[i] / r.rho0_eps[i] < w[i].u);
    }

    #[test]
    fn cubic_flux_converges_first_order_for_sharp_vacuum() {
        // sharp vacuum edges with a velocity perturbation across them make F₀ discontinuous
        let wp = wave();
        let g = Grid1D::new(-30.0, 30.0, 60_000).unwrap();
        let p = NotchParams {
            notch_center: 0.0,
            ramp_width: 0.0,
            u_bump_center: 0.0,
            u_bump_width: 6.0,
            ..NotchParams::default()
        };
        let d = notch_data(g, &wp, &p).unwrap();
        let u_bar: Vec<f64> = wp.wave_field(0.0, &g.centers()).unwrap().iter().map(|w| w.u).collect();
        let f0 = cubic_flux(&d.rho0, &d.m0, &u_bar);
        let gas = GasParams::new(2.0, 1.0, 1.0 / 3.0, 1e-6).unwrap();
        let dist = |eps: f64| {
            let r = regularize(&d, 1e-6, Some(eps), &wp, &gas).unwrap();
            let fe = cubic_flux(&r.rho0_eps, &r.m0_eps, &u_bar);
            fe.iter().zip(&f0).map(|(a, b)| (a - b).abs()).sum::<f64>() * g.dx()
        };
        let (d1, d2, d3) = (dist(0.2), dist(0.1), dist(0.05));
        for ratio in [d1 / d2, d2 / d3] {
            assert!((ratio - 2.0).abs() <= 0.6, "ratio {ratio}");
        }
    }

    #[test]
    fn regularized_density_approaches_original_away_from_vacuum() {
        let wp = wave();
        let g = Grid1D::new(-30.0, 30.0, 12_000).unwrap();
        let d = notch_data(g, &wp, &NotchParams { notch_center: 0.0, ..NotchParams::default() }).unwrap();
        let mut last = f64::INFINITY;
        for eps in [0.1, 0.05, 0.025] {
            let gas = GasParams::new(2.0, 1.0, 1.0 / 3.0, eps).unwrap();
            let r = regularize(&d, eps, None, &wp, &gas).unwrap();
            let err = g
                .centers()
                .iter()
                .enumerate()
                .filter(|(_, x)| x.abs() > 3.5)
                .map(|(i, _)| (r.rho0_eps[i] - d.rho0[i]).abs())
                .fold(0.0, f64::max);
            assert!(err < last);
            last = err;
        }
    }

    #[test]
    fn regularized_integrals_bounded_uniformly_in_eps() {
        let wp = wave();
        let g = Grid1D::new(-60.0, 60.0, 24_000).unwrap();
        let d = notch_data(g, &wp, &NotchParams::default()).unwrap();
        let mut vals = Vec::new();
        for eps in [1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1] {
            let gas = GasParams::new(2.0, 1.0, 1.0 / 3.0, eps).unwrap();
            let r = regularize(&d, eps, None, &wp, &gas).unwrap();
            let rd = InitialData::new(g, r.rho0_eps.clone(), r.m0_eps.clone()).unwrap();
            let rep = validate(&rd, &wp, &gas, 1e-2).unwrap();
            assert!(rep.passed());
            // ε² ∫ [(ρ^{θ−½})_x]² stays bounded
            let pw: Vec<f64> = r.rho0_eps.iter().map(|x| x.powf(gas.theta - 0.5)).collect();
            let th: f64 = gradient(&pw, g.dx()).iter().map(|v| v * v).sum::<f64>() * g.dx();
            vals.push((rep.get("bd_gradient").unwrap().value, eps * eps * th));
        }
        let max_bd = vals.iter().map(|v| v.0).fold(0.0, f64::max);
        let max_th = vals.iter().map(|v| v.1).fold(0.0, f64::max);
        assert!(max_bd < 10.0 && max_th < 10.0, "{vals:?}");
    }
}
