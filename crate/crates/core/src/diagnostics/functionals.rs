//! Pointwise-in-time functionals of a discrete state measured against the
//! reference wave.
//!
//! Vacuum conventions: on cells with `ρ ≤ u_floor` the velocity is taken to
//! be `ū`, so every ρ-weighted gap term vanishes there, and `ρΨ` takes its
//! `ρ → 0` limit `ρ̄^γ`.

use crate::error::{domain, Result};
use crate::gas::GasParams;
use crate::initdata::gradient;
use crate::rarefaction::WavePoint;

/// One time level of a solution together with the reference wave sampled at
/// the same cell centers.
#[derive(Debug, Clone)]
pub struct Frame<'a> {
    pub x: &'a [f64],
    pub dx: f64,
    pub rho: &'a [f64],
    pub m: &'a [f64],
    pub wave: &'a [WavePoint],
    pub gas: GasParams,
    pub u_floor: f64,
    /// `m/ρ` on live cells, `ū` elsewhere.
    pub u: Vec<f64>,
    /// `u − ū` on live cells, 0 elsewhere.
    pub gap: Vec<f64>,
    /// `ρ > u_floor`.
    pub live: Vec<bool>,
}

impl<'a> Frame<'a> {
    pub fn new(
        x: &'a [f64],
        dx: f64,
        rho: &'a [f64],
        m: &'a [f64],
        wave: &'a [WavePoint],
        gas: GasParams,
        u_floor: f64,
    ) -> Result<Self> {
        let n = x.len();
        if rho.len() != n || m.len() != n || wave.len() != n {
            return Err(domain(format!(
                "frame arrays disagree in length: x {n}, rho {}, m {}, wave {}",
                rho.len(),
                m.len(),
                wave.len()
            )));
        }
        if !(dx > 0.0) {
            return Err(domain(format!("dx must be positive, got {dx}")));
        }
        let live: Vec<bool> = rho.iter().map(|&r| r > u_floor).collect();
        let u: Vec<f64> = (0..n)
            .map(|i| if live[i] { m[i] / rho[i] } else { wave[i].u })
            .collect();
        let gap = (0..n)
            .map(|i| if live[i] { u[i] - wave[i].u } else { 0.0 })
            .collect();
        Ok(Self {
            x,
            dx,
            rho,
            m,
            wave,
            gas,
            u_floor,
            u,
            gap,
            live,
        })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    fn integrate(&self, f: impl Fn(usize) -> f64) -> f64 {
        (0..self.len()).map(f).sum::<f64>() * self.dx
    }

    /// Centered differences of `f(ρ) − f(ρ̄)`.
    fn gap_power_gradient(&self, k: f64) -> Vec<f64> {
        let v: Vec<f64> = self
            .rho
            .iter()
            .zip(self.wave)
            .map(|(&r, w)| r.max(0.0).powf(k) - w.rho.powf(k))
            .collect();
        gradient(&v, self.dx)
    }

    fn power_gradient(&self, k: f64) -> Vec<f64> {
        let v: Vec<f64> = self.rho.iter().map(|&r| r.max(0.0).powf(k)).collect();
        gradient(&v, self.dx)
    }

    /// `(φ_ε(ρ))_x` on live cells using live neighbours only; 0 elsewhere.
    pub fn phi_gradient(&self) -> Vec<f64> {
        let n = self.len();
        let phi: Vec<f64> = (0..n)
            .map(|i| {
                if self.live[i] {
                    self.gas.phi_eps_raw(self.rho[i])
                } else {
                    0.0
                }
            })
            .collect();
        (0..n)
            .map(|i| {
                if !self.live[i] {
                    return 0.0;
                }
                let l = i > 0 && self.live[i - 1];
                let r = i + 1 < n && self.live[i + 1];
                match (l, r) {
                    (true, true) => (phi[i + 1] - phi[i - 1]) / (2.0 * self.dx),
                    (false, true) => (phi[i + 1] - phi[i]) / self.dx,
                    (true, false) => (phi[i] - phi[i - 1]) / self.dx,
                    (false, false) => 0.0,
                }
            })
            .collect()
    }
}

pub fn mass(f: &Frame) -> f64 {
    f.rho.iter().sum::<f64>() * f.dx
}

/// `∫ ½ρ(u−ū)² + ρΨ(ρ,ρ̄) dx`.
pub fn energy_functional(f: &Frame) -> f64 {
    f.integrate(|i| {
        0.5 * f.rho[i] * f.gap[i] * f.gap[i] + f.gas.rho_psi_raw(f.rho[i].max(0.0), f.wave[i].rho)
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BdValue {
    pub value: f64,
    /// Cells with `ρ ≤ u_floor` whose effective-velocity term was dropped.
    pub excluded: usize,
}

/// `∫ ½ρ[(u−ū) + (φ_ε(ρ))_x]² + ρΨ(ρ,ρ̄) dx`.
pub fn bd_functional(f: &Frame) -> BdValue {
    let phi_x = f.phi_gradient();
    let value = f.integrate(|i| {
        let psi = f.gas.rho_psi_raw(f.rho[i].max(0.0), f.wave[i].rho);
        if f.live[i] {
            let v = f.gap[i] + phi_x[i];
            0.5 * f.rho[i] * v * v + psi
        } else {
            psi
        }
    });
    BdValue {
        value,
        excluded: f.live.iter().filter(|l| !**l).count(),
    }
}

/// Spatial integrals of the nonnegative dissipation densities.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DissipationTerms {
    /// `ū_x [p(ρ) − p(ρ̄) − p′(ρ̄)(ρ−ρ̄)]`
    pub pressure: f64,
    /// `ρ(u−ū)² ū_x`
    pub kinetic: f64,
    /// `μ_ε(ρ) [(u−ū)_x]²`
    pub viscous: f64,
    /// `[(ρ^a − ρ̄^a)_x]²`, `a = (α+γ−1)/2`
    pub grad_alpha: f64,
    /// `ε[(ρ^c − ρ̄^c)_x]²`, `c = (θ+γ−1)/2`
    pub grad_theta: f64,
}

impl DissipationTerms {
    pub fn total(&self) -> f64 {
        self.pressure + self.kinetic + self.viscous + self.grad_alpha + self.grad_theta
    }

    /// The combination that appears when `α` times the BD identity is added
    /// to the energy identity.
    pub fn weighted(&self, gas: &GasParams) -> f64 {
        let (a, g, th) = (gas.alpha, gas.gamma, gas.theta);
        (a + 1.0) * (self.pressure + self.kinetic)
            + self.viscous
            + 4.0 * a * g / (a + g - 1.0).powi(2) * self.grad_alpha
            + 4.0 * a * g / (th + g - 1.0).powi(2) * self.grad_theta
    }
}

pub fn dissipation_rate(f: &Frame) -> DissipationTerms {
    let g = &f.gas;
    let gap_x = gradient(&f.gap, f.dx);
    let ka = 0.5 * (g.alpha + g.gamma - 1.0);
    let kc = 0.5 * (g.theta + g.gamma - 1.0);
    let da = f.gap_power_gradient(ka);
    let dc = if g.eps > 0.0 {
        f.gap_power_gradient(kc)
    } else {
        vec![0.0; f.len()]
    };
    let mut d = DissipationTerms::default();
    for i in 0..f.len() {
        let (r, w) = (f.rho[i].max(0.0), &f.wave[i]);
        let pb = g.pressure_raw(w.rho);
        let dpb = g.gamma * w.rho.powf(g.gamma - 1.0);
        d.pressure += w.u_x * (g.pressure_raw(r) - pb - dpb * (r - w.rho));
        d.kinetic += r * f.gap[i] * f.gap[i] * w.u_x;
        d.viscous += g.viscosity_raw(r) * gap_x[i] * gap_x[i];
        d.grad_alpha += da[i] * da[i];
        d.grad_theta += g.eps * dc[i] * dc[i];
    }
    d.pressure *= f.dx;
    d.kinetic *= f.dx;
    d.viscous *= f.dx;
    d.grad_alpha *= f.dx;
    d.grad_theta *= f.dx;
    d
}

/// Spatial integrals of the six source densities on the right of the
/// combined energy/BD identity.
pub fn source_terms(f: &Frame) -> [f64; 6] {
    let g = &f.gas;
    let (al, ga, th, eps) = (g.alpha, g.gamma, g.theta, g.eps);
    let ka = 0.5 * (al + ga - 1.0);
    let kc = 0.5 * (th + ga - 1.0);
    let rho_theta_x = f.power_gradient(th);
    // (ρ̄^k)_xx, and [(ρ̄^k)_x ρ̄^{γ−1−k}]_x = [k ρ̄^{γ−2} ρ̄_x]_x
    let power_xx = |k: f64, w: &WavePoint| {
        k * (k - 1.0) * w.rho.powf(k - 2.0) * w.rho_x * w.rho_x + k * w.rho.powf(k - 1.0) * w.rho_xx
    };
    let mixed_x = |k: f64, w: &WavePoint| {
        k * ((ga - 2.0) * w.rho.powf(ga - 3.0) * w.rho_x * w.rho_x + w.rho.powf(ga - 2.0) * w.rho_xx)
    };
    let mut s = [0.0; 6];
    for i in 0..f.len() {
        let (r, w, gp) = (f.rho[i].max(0.0), &f.wave[i], f.gap[i]);
        s[0] += r.powf(al) * w.u_xx * gp;
        s[2] += 8.0 * al * ga / (al + ga - 1.0).powi(2) * power_xx(ka, w) * (r.powf(ka) - w.rho.powf(ka));
        s[4] -= 2.0 * ga / (al + ga - 1.0) * mixed_x(ka, w) * (r.powf(al) - w.rho.powf(al));
        if eps > 0.0 {
            s[1] += eps * (r.powf(th) * w.u_xx * gp + (1.0 - al / th) * rho_theta_x[i] * gp * w.u_x);
            s[3] += eps * 8.0 * al * ga / (th + ga - 1.0).powi(2)
                * power_xx(kc, w)
                * (r.powf(kc) - w.rho.powf(kc));
            s[5] -= eps * 2.0 * al * ga / (th * (th + ga - 1.0))
                * mixed_x(kc, w)
                * (r.powf(th) - w.rho.powf(th));
        }
    }
    s.map(|v| v * f.dx)
}

/// `(∫ρ|u−ū|³dx, ∫μ_ε(ρ)[(u−ū)_x]²|u−ū|dx)`.
pub fn third_moment(f: &Frame) -> (f64, f64) {
    let gap_x = gradient(&f.gap, f.dx);
    let m3 = f.integrate(|i| f.rho[i].max(0.0) * f.gap[i].abs().powi(3));
    let w = f.integrate(|i| f.gas.viscosity_raw(f.rho[i].max(0.0)) * gap_x[i] * gap_x[i] * f.gap[i].abs());
    (m3, w)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LambdaField {
    /// `ρ^α (u−ū)_x` on live cells, 0 elsewhere.
    pub values: Vec<f64>,
    /// `∫Λ² dx`.
    pub l2_sq: f64,
}

pub fn lambda_field(f: &Frame) -> LambdaField {
    let gap_x = gradient(&f.gap, f.dx);
    let values: Vec<f64> = (0..f.len())
        .map(|i| {
            if f.live[i] {
                f.rho[i].powf(f.gas.alpha) * gap_x[i]
            } else {
                0.0
            }
        })
        .collect();
    let l2_sq = values.iter().map(|v| v * v).sum::<f64>() * f.dx;
    LambdaField { values, l2_sq }
}

/// `|∫Λφ + ∫ρ^{α−½}√ρ(u−ū)φ_x + 2α/(2α−1) ∫(ρ^{α−½})_x √ρ(u−ū)φ|` for a
/// test function returning `(φ, φ_x)`.
pub fn lambda_identity_residual(f: &Frame, phi: impl Fn(f64) -> (f64, f64)) -> f64 {
    let a = f.gas.alpha;
    let lam = lambda_field(f);
    let s_x = f.power_gradient(a - 0.5);
    let r = f.integrate(|i| {
        let (p, p_x) = phi(f.x[i]);
        let rho = f.rho[i].max(0.0);
        let sq = rho.sqrt() * f.gap[i];
        lam.values[i] * p + rho.powf(a - 0.5) * sq * p_x + 2.0 * a / (2.0 * a - 1.0) * s_x[i] * sq * p
    });
    r.abs()
}

/// `∫[(ρ^{α−½})_x]² dx`.
pub fn bd_gradient(f: &Frame) -> f64 {
    let g = f.power_gradient(f.gas.alpha - 0.5);
    g.iter().map(|v| v * v).sum::<f64>() * f.dx
}

/// `‖u_x‖_∞` of the diagnostic velocity.
pub fn ux_sup(f: &Frame) -> f64 {
    gradient(&f.u, f.dx).iter().fold(0.0, |m, v| m.max(v.abs()))
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GapNorms {
    pub sup: f64,
    pub l2: f64,
    pub lp: f64,
    /// `‖u−ū‖_{L²}` over live cells.
    pub l2_u: f64,
}

/// Norms of `ρ − ρ̄` (sup, L², L^p) and of `u − ū` in L² over live cells.
pub fn gap_norms(f: &Frame, p: f64) -> Result<GapNorms> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(domain(format!("L^p exponent must be finite and >= 1, got {p}")));
    }
    let d: Vec<f64> = f.rho.iter().zip(f.wave).map(|(r, w)| (r - w.rho).abs()).collect();
    Ok(GapNorms {
        sup: d.iter().fold(0.0, |m, v| m.max(*v)),
        l2: (d.iter().map(|v| v * v).sum::<f64>() * f.dx).sqrt(),
        lp: (d.iter().map(|v| v.powf(p)).sum::<f64>() * f.dx).powf(1.0 / p),
        l2_u: (f.gap.iter().map(|v| v * v).sum::<f64>() * f.dx).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct VacuumStats {
    pub min_rho: f64,
    pub max_rho: f64,
    /// `meas{x : ρ ≤ ½ρ̄}`.
    pub vac_measure: f64,
}

pub fn vacuum_stats(f: &Frame) -> VacuumStats {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut count = 0usize;
    for (r, w) in f.rho.iter().zip(f.wave) {
        lo = lo.min(*r);
        hi = hi.max(*r);
        if *r <= 0.5 * w.rho {
            count += 1;
        }
    }
    VacuumStats {
        min_rho: lo,
        max_rho: hi,
        vac_measure: count as f64 * f.dx,
    }
}
