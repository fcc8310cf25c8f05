//! One time step: SSP-RK2 Rusanov update for the hyperbolic part followed by
//! the viscous update (Lie splitting).

use super::flux::{face_viscosity, rusanov, Conserved};
use super::mms::Source;
use super::tridiag::solve_in_place;
use super::{Limiter, SchemeConfig, SimState, ViscousMode};
use crate::background::Background;
use crate::error::{numeric, Result};
use crate::gas::GasParams;
use crate::grid::Grid1D;

const GHOSTS: usize = 2;

/// Bookkeeping for one step.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepReport {
    pub dt: f64,
    /// Net mass entering through the two boundaries.
    pub boundary_inflow: f64,
    /// Mass added by clipping negative densities to zero.
    pub clipped_mass: f64,
    pub clipped_cells: usize,
}

pub struct Stepper<'a> {
    pub grid: Grid1D,
    pub gas: GasParams,
    pub cfg: SchemeConfig,
    pub u_floor: f64,
    bg: &'a dyn Background,
    source: Option<&'a dyn Source>,
    ghost_x: [f64; 2 * GHOSTS],
    xs: Vec<f64>,
    ext: Vec<Conserved>,
    faces: Vec<[f64; 2]>,
}

#[inline]
fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else if a.abs() < b.abs() {
        a
    } else {
        b
    }
}

impl<'a> Stepper<'a> {
    pub fn new(
        grid: Grid1D,
        gas: GasParams,
        cfg: SchemeConfig,
        bg: &'a dyn Background,
        source: Option<&'a dyn Source>,
    ) -> Result<Self> {
        grid.validate()?;
        gas.validate()?;
        cfg.validate()?;
        let dx = grid.dx();
        let u_floor = cfg.resolved_u_floor(bg);
        let ghost_x = [
            grid.x_left - 1.5 * dx,
            grid.x_left - 0.5 * dx,
            grid.x_right + 0.5 * dx,
            grid.x_right + 1.5 * dx,
        ];
        Ok(Self {
            grid,
            gas,
            cfg,
            u_floor,
            bg,
            source,
            ghost_x,
            xs: grid.centers(),
            ext: Vec::with_capacity(grid.n + 2 * GHOSTS),
            faces: vec![[0.0; 2]; grid.n + 1],
        })
    }

    /// `cfl · min(dx / max(|u| + c), dx² min(ρ/μ_ε)/2 [explicit only])`.
    pub fn stable_dt(&self, s: &SimState) -> f64 {
        let dx = self.grid.dx();
        let mut speed: f64 = 0.0;
        let mut visc = f64::INFINITY;
        for (&r, &m) in s.rho.iter().zip(&s.m) {
            let c = Conserved::new(r, m, self.u_floor);
            speed = speed.max(c.u.abs() + self.gas.sound_speed_raw(r));
            if self.cfg.viscous_mode == ViscousMode::Explicit && r > self.u_floor {
                visc = visc.min(r / self.gas.viscosity_raw(r));
            }
        }
        let acoustic = if speed > 0.0 { dx / speed } else { f64::INFINITY };
        let diffusive = 0.5 * dx * dx * visc;
        self.cfg.cfl * acoustic.min(diffusive)
    }

    fn ghosts(&self, t: f64) -> Result<[Conserved; 2 * GHOSTS]> {
        let f = self.bg.field(t, &self.ghost_x)?;
        let mut out = [Conserved::from_primitive(0.0, 0.0); 2 * GHOSTS];
        for (o, p) in out.iter_mut().zip(f) {
            *o = Conserved::from_primitive(p.rho, p.u);
        }
        Ok(out)
    }

    /// Hyperbolic right-hand side into `(drho, dm)`; returns the boundary
    /// mass fluxes `(F_left, F_right)`.
    fn rhs(
        &mut self,
        t: f64,
        rho: &[f64],
        m: &[f64],
        drho: &mut [f64],
        dm: &mut [f64],
    ) -> Result<(f64, f64)> {
        let n = self.grid.n;
        let dx = self.grid.dx();
        let g = self.ghosts(t)?;
        self.ext.clear();
        self.ext.extend_from_slice(&g[..GHOSTS]);
        for i in 0..n {
            self.ext.push(Conserved::new(rho[i], m[i], self.u_floor));
        }
        self.ext.extend_from_slice(&g[GHOSTS..]);
        let ext = &self.ext;
        let fl = self.u_floor;
        // face k sits between extended cells k+1 and k+2, i.e. left of interior cell k
        for k in 0..=n {
            let (l, r) = (k + 1, k + 2);
            let (sl, sr) = match self.cfg.limiter {
                Limiter::None => (ext[l], ext[r]),
                Limiter::Minmod => {
                    let face = |c: usize, side: f64| {
                        let (a, b, d) = (&ext[c - 1], &ext[c], &ext[c + 1]);
                        let sr = minmod(b.rho - a.rho, d.rho - b.rho);
                        let su = if a.rho > fl && b.rho > fl && d.rho > fl {
                            minmod(b.u - a.u, d.u - b.u)
                        } else {
                            0.0
                        };
                        Conserved::from_primitive(b.rho + side * 0.5 * sr, b.u + side * 0.5 * su)
                    };
                    (face(l, 1.0), face(r, -1.0))
                }
            };
            self.faces[k] = rusanov(&sl, &sr, &self.gas);
        }
        for i in 0..n {
            drho[i] = -(self.faces[i + 1][0] - self.faces[i][0]) / dx;
            dm[i] = -(self.faces[i + 1][1] - self.faces[i][1]) / dx;
        }
        if let Some(src) = self.source {
            for i in 0..n {
                let s = src.source(t, self.xs[i]);
                drho[i] += s[0];
                dm[i] += s[1];
            }
        }
        Ok((self.faces[0][0], self.faces[n][0]))
    }

    fn clip(rho: &mut [f64], m: &mut [f64], dx: f64) -> (f64, usize) {
        let mut added = 0.0;
        let mut cells = 0;
        for (r, mm) in rho.iter_mut().zip(m.iter_mut()) {
            if *r < 0.0 {
                added -= *r * dx;
                *r = 0.0;
                *mm = 0.0;
                cells += 1;
            } else if *r == 0.0 {
                *mm = 0.0;
            }
        }
        (added, cells)
    }

    /// Advances `s` by `dt`. On error `s` is left untouched.
    pub fn step(&mut self, s: &mut SimState, dt: f64) -> Result<StepReport> {
        let n = self.grid.n;
        let dx = self.grid.dx();
        let t0 = s.t;
        let mut k_rho = vec![0.0; n];
        let mut k_m = vec![0.0; n];

        let (fl0, fr0) = self.rhs(t0, &s.rho, &s.m, &mut k_rho, &mut k_m)?;
        let mut r1: Vec<f64> = (0..n).map(|i| s.rho[i] + dt * k_rho[i]).collect();
        let mut m1: Vec<f64> = (0..n).map(|i| s.m[i] + dt * k_m[i]).collect();
        let (clip1, c1) = Self::clip(&mut r1, &mut m1, dx);

        let (fl1, fr1) = self.rhs(t0 + dt, &r1, &m1, &mut k_rho, &mut k_m)?;
        let mut r2: Vec<f64> = (0..n)
            .map(|i| 0.5 * s.rho[i] + 0.5 * (r1[i] + dt * k_rho[i]))
            .collect();
        let mut m2: Vec<f64> = (0..n)
            .map(|i| 0.5 * s.m[i] + 0.5 * (m1[i] + dt * k_m[i]))
            .collect();
        let (clip2, c2) = Self::clip(&mut r2, &mut m2, dx);

        self.viscous(t0 + dt, dt, &r2, &mut m2)?;

        for (i, (r, m)) in r2.iter().zip(&m2).enumerate() {
            if !(r.is_finite() && m.is_finite()) {
                return Err(numeric(format!(
                    "non-finite state at cell {i} (x = {}) after the step from t = {t0}",
                    self.xs[i]
                )));
            }
        }
        let report = StepReport {
            dt,
            boundary_inflow: 0.5 * dt * ((fl0 - fr0) + (fl1 - fr1)),
            clipped_mass: 0.5 * clip1 + clip2,
            clipped_cells: c1 + c2,
        };
        s.rho = r2;
        s.m = m2;
        s.t = t0 + dt;
        Ok(report)
    }

    /// Viscous update of the momentum with the density frozen.
    fn viscous(&self, t: f64, dt: f64, rho: &[f64], m: &mut [f64]) -> Result<()> {
        let n = self.grid.n;
        let dx = self.grid.dx();
        let fl = self.u_floor;
        let g = self.ghosts(t)?;
        let (gl, gr) = (g[GHOSTS - 1], g[GHOSTS]);
        // face f is the left face of cell f; faces 0 and n touch the ghosts
        let mu: Vec<f64> = (0..=n)
            .map(|f| {
                let rl = if f == 0 { gl.rho } else { rho[f - 1] };
                let rr = if f == n { gr.rho } else { rho[f] };
                face_viscosity(rl, rr, &self.gas, fl)
            })
            .collect();
        if mu.iter().all(|v| *v == 0.0) {
            return Ok(());
        }
        let u_star: Vec<f64> = (0..n)
            .map(|i| if rho[i] > fl { m[i] / rho[i] } else { 0.0 })
            .collect();
        let u_new = match self.cfg.viscous_mode {
            ViscousMode::Explicit => u_star,
            ViscousMode::SemiImplicit => {
                let r = dt / (dx * dx);
                let mut a = vec![0.0; n];
                let mut b = vec![0.0; n];
                let mut c = vec![0.0; n];
                let mut d = vec![0.0; n];
                for i in 0..n {
                    let (ml, mr) = (mu[i], mu[i + 1]);
                    if ml == 0.0 && mr == 0.0 && rho[i] <= fl {
                        b[i] = 1.0;
                        d[i] = u_star[i];
                        continue;
                    }
                    a[i] = -r * ml;
                    c[i] = -r * mr;
                    b[i] = rho[i] + r * (ml + mr);
                    d[i] = m[i];
                }
                d[0] -= a[0] * gl.u;
                d[n - 1] -= c[n - 1] * gr.u;
                a[0] = 0.0;
                c[n - 1] = 0.0;
                solve_in_place(&a, &b, &mut c, &mut d);
                d
            }
        };
        let stress: Vec<f64> = (0..=n)
            .map(|f| {
                let ul = if f == 0 { gl.u } else { u_new[f - 1] };
                let ur = if f == n { gr.u } else { u_new[f] };
                mu[f] * (ur - ul) / dx
            })
            .collect();
        for i in 0..n {
            m[i] += dt / dx * (stress[i + 1] - stress[i]);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::background::ConstantState;
    use crate::solver::Manufactured;

    fn setup(
        mode: ViscousMode,
        limiter: Limiter,
    ) -> (Grid1D, GasParams, SchemeConfig) {
        let grid = Grid1D::new(-5.0, 5.0, 100).unwrap();
        let gas = GasParams::new(2.0, 1.0, 1.0 / 3.0, 0.01).unwrap();
        let cfg = SchemeConfig {
            viscous_mode: mode,
            limiter,
            ..SchemeConfig::default()
        };
        (grid, gas, cfg)
    }

    #[test]
    fn constant_state_is_fixed_point() {
        for mode in [ViscousMode::Explicit, ViscousMode::SemiImplicit] {
            for lim in [Limiter::None, Limiter::Minmod] {
                let (grid, gas, cfg) = setup(mode, lim);
                let bg = ConstantState::new(1.0, 0.0, gas).unwrap();
                let mut st = Stepper::new(grid, gas, cfg, &bg, None).unwrap();
                let mut s = SimState {
                    t: 0.0,
                    rho: vec![1.0; grid.n],
                    m: vec![0.0; grid.n],
                };
                for _ in 0..50 {
                    let dt = st.stable_dt(&s);
                    st.step(&mut s, dt).unwrap();
                }
                assert!(s.rho.iter().all(|r| *r == 1.0));
                assert!(s.m.iter().all(|m| *m == 0.0));
            }
        }
    }

    #[test]
    fn moving_constant_state_is_fixed_point() {
        let (grid, gas, cfg) = setup(ViscousMode::SemiImplicit, Limiter::Minmod);
        let bg = ConstantState::new(1.3, 0.7, gas).unwrap();
        let mut st = Stepper::new(grid, gas, cfg, &bg, None).unwrap();
        let mut s = SimState {
            t: 0.0,
            rho: vec![1.3; grid.n],
            m: vec![1.3 * 0.7; grid.n],
        };
        for _ in 0..20 {
            let dt = st.stable_dt(&s);
            st.step(&mut s, dt).unwrap();
        }
        for (r, m) in s.rho.iter().zip(&s.m) {
            assert!((r - 1.3).abs() < 1e-14 && (m - 0.91).abs() < 1e-14);
        }
    }

    #[test]
    fn stable_dt_formula() {
        let grid = Grid1D::new(0.0, 1.0, 100).unwrap();
        let gas = GasParams::default();
        let cfg = SchemeConfig {
            cfl: 0.5,
            ..SchemeConfig::default()
        };
        let bg = ConstantState::new(1.0, 0.0, gas).unwrap();
        let st = Stepper::new(grid, gas, cfg.clone(), &bg, None).unwrap();
        let s = SimState {
            t: 0.0,
            rho: vec![1.0; 100],
            m: vec![0.0; 100],
        };
        assert!((st.stable_dt(&s) - 0.5 * 0.01 / 2f64.sqrt()).abs() < 1e-15);
        let vac = SimState {
            t: 0.0,
            rho: vec![0.0; 100],
            m: vec![0.0; 100],
        };
        assert!(st.stable_dt(&vac).is_infinite());
        // explicit mode: viscosity can only shrink the step
        let ex = SchemeConfig {
            viscous_mode: ViscousMode::Explicit,
            ..cfg
        };
        let st0 = Stepper::new(grid, gas, ex.clone(), &bg, None).unwrap();
        let geps = GasParams::new(2.0, 1.0, 1.0 / 3.0, 0.5).unwrap();
        let st1 = Stepper::new(grid, geps, ex, &bg, None).unwrap();
        assert!(st1.stable_dt(&s) <= st0.stable_dt(&s));
    }

    #[test]
    fn mass_changes_only_by_boundary_flux() {
        let (grid, gas, cfg) = setup(ViscousMode::SemiImplicit, Limiter::Minmod);
        let bg = ConstantState::new(1.0, 0.5, gas).unwrap();
        let mut st = Stepper::new(grid, gas, cfg, &bg, None).unwrap();
        let xs = grid.centers();
        let mut s = SimState {
            t: 0.0,
            rho: xs.iter().map(|x| 1.0 + 0.5 * (-x * x).exp()).collect(),
            m: xs.iter().map(|x| 0.5 + 0.2 * (-(x - 1.0) * (x - 1.0)).exp()).collect(),
        };
        let m0 = s.mass(grid.dx());
        let mut inflow = 0.0;
        for _ in 0..200 {
            let dt = st.stable_dt(&s);
            let rep = st.step(&mut s, dt).unwrap();
            inflow += rep.boundary_inflow + rep.clipped_mass;
        }
        let resid = (s.mass(grid.dx()) - m0 - inflow).abs() / m0;
        assert!(resid <= 1e-12, "{resid:e}");
    }

    #[test]
    fn mirror_symmetry() {
        let grid = Grid1D::new(-10.0, 10.0, 200).unwrap();
        let gas = GasParams::new(2.0, 1.0, 1.0 / 3.0, 1e-3).unwrap();
        let bg = ConstantState::new(1.0, 0.0, gas).unwrap();
        for lim in [Limiter::None, Limiter::Minmod] {
            let cfg = SchemeConfig {
                limiter: lim,
                ..SchemeConfig::default()
            };
            let mut st = Stepper::new(grid, gas, cfg, &bg, None).unwrap();
            let xs = grid.centers();
            let mut s = SimState {
                t: 0.0,
                rho: xs
                    .iter()
                    .map(|x| if x.abs() < 1.0 { 0.0 } else { 1.0 + 0.3 * (-(x.abs() - 4.0).powi(2)).exp() })
                    .collect(),
                m: xs
                    .iter()
                    .map(|x| if x.abs() < 1.0 { 0.0 } else { 0.2 * x.signum() * (-(x.abs() - 3.0).powi(2)).exp() })
                    .collect(),
            };
            for _ in 0..100 {
                let dt = st.stable_dt(&s);
                st.step(&mut s, dt).unwrap();
            }
            let n = grid.n;
            for i in 0..n / 2 {
                assert!((s.rho[i] - s.rho[n - 1 - i]).abs() <= 1e-13);
                assert!((s.m[i] + s.m[n - 1 - i]).abs() <= 1e-13);
            }
        }
    }

    #[test]
    fn explicit_and_implicit_agree_for_small_steps() {
        let grid = Grid1D::new(0.0, 2.0 * std::f64::consts::PI, 64).unwrap();
        let gas = GasParams::new(2.0, 1.0, 1.0 / 3.0, 0.0).unwrap();
        let mms = Manufactured::new(gas, 2.0, 0.5, 1.0, 0.3, 0.5);
        let mut out = Vec::new();
        for mode in [ViscousMode::Explicit, ViscousMode::SemiImplicit] {
            let cfg = SchemeConfig {
                viscous_mode: mode,
                cfl: 0.2,
                ..SchemeConfig::default()
            };
            let mut st = Stepper::new(grid, gas, cfg, &mms, Some(&mms)).unwrap();
            let mut s = mms.state(0.0, &grid);
            while s.t < 0.5 - 1e-12 {
                let dt = st.stable_dt(&s).min(1e-3).min(0.5 - s.t);
                st.step(&mut s, dt).unwrap();
            }
            out.push(s);
        }
        let diff = out[0]
            .m
            .iter()
            .zip(&out[1].m)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(diff < 2e-3, "{diff}");
    }
}
