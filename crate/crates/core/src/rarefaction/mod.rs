//! Smoothed 2-rarefaction wave built from the Burgers characteristic solution.
//!
//! The wave satisfies `λ₂(ρ̄, ū)(t, x) = w(1+t, x)` together with
//! `Σ₂(ρ̄, ū) = Σ₂(ρ±, u±)`. Because `λ₂ − Σ₂ = (γ+1)/(γ−1)·√p'(ρ̄)`, the
//! inversion is explicit.

mod burgers;
mod rates;

pub use burgers::{kq_constant, Burgers, BurgersPoint};
pub use rates::{cumulative_sup_integral, rate_report, RateReport, RateRow};

use crate::error::{domain, numeric, Result};
use crate::gas::{Family, GasParams};
use serde::Serialize;

/// Wave state and derivatives at one point.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct WavePoint {
    pub rho: f64,
    pub u: f64,
    pub rho_x: f64,
    pub u_x: f64,
    pub rho_xx: f64,
    pub u_xx: f64,
    pub rho_t: f64,
    pub u_t: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveProfile {
    pub rho_minus: f64,
    pub rho_plus: f64,
    pub u_minus: f64,
    pub u_plus: f64,
    pub w_minus: f64,
    pub w_plus: f64,
    pub q: f64,
    pub eta: f64,
    pub kq: f64,
    pub sigma2: f64,
    pub delta: f64,
    pub gas: GasParams,
    burgers: Burgers,
}

/// Left velocity that puts the left Burgers speed `λ₂(ρ₋, u₋)` at zero.
pub fn sonic_left_velocity(gas: &GasParams, rho_minus: f64) -> f64 {
    -gas.sound_speed_raw(rho_minus)
}

impl WaveProfile {
    /// Builds the wave. When `u_plus` is `None` it is derived from `Σ₂`;
    /// otherwise it is checked against the invariant to `1e-12`.
    pub fn new(
        gas: GasParams,
        rho_minus: f64,
        rho_plus: f64,
        u_minus: f64,
        u_plus: Option<f64>,
        q: f64,
        eta: f64,
    ) -> Result<Self> {
        gas.validate()?;
        for (name, v) in [("rho_minus", rho_minus), ("rho_plus", rho_plus)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(domain(format!("{name} must be positive, got {v}")));
            }
        }
        if !u_minus.is_finite() {
            return Err(domain("u_minus must be finite"));
        }
        let sigma2 = gas.riemann_invariant(Family::Second, rho_minus, u_minus)?;
        let derived = sigma2 + 2.0 * gas.sound_speed_raw(rho_plus) / (gas.gamma - 1.0);
        let u_plus = match u_plus {
            None => derived,
            Some(up) => {
                let s = gas.riemann_invariant(Family::Second, rho_plus, up)?;
                if (s - sigma2).abs() > 1e-12 * sigma2.abs().max(1.0) {
                    return Err(domain(format!(
                        "end states are not joined by a 2-rarefaction: Σ₂ differs by {:e}; \
                         compatible u_plus is {derived}",
                        s - sigma2
                    )));
                }
                up
            }
        };
        let w_minus = gas.lambda(Family::Second, rho_minus, u_minus)?;
        let w_plus = gas.lambda(Family::Second, rho_plus, u_plus)?;
        if w_minus >= w_plus {
            return Err(domain(format!(
                "a 2-rarefaction needs λ₂(ρ-,u-) < λ₂(ρ+,u+), got {w_minus} >= {w_plus} \
                 (requires rho_minus < rho_plus)"
            )));
        }
        if w_minus < -1e-12 {
            return Err(domain(format!(
                "left Burgers speed must be >= 0, got {w_minus}; raise u_minus"
            )));
        }
        let burgers = Burgers::new(w_minus, w_plus, q, eta)?;
        Ok(Self {
            rho_minus,
            rho_plus,
            u_minus,
            u_plus,
            w_minus,
            w_plus,
            q,
            eta,
            kq: burgers.kq,
            sigma2,
            delta: (rho_plus - rho_minus).abs() + (u_plus - u_minus).abs(),
            gas,
            burgers,
        })
    }

    pub fn burgers(&self) -> &Burgers {
        &self.burgers
    }

    /// `w(t, x)` of the underlying Burgers problem (no time shift).
    pub fn burgers_eval(&self, t: f64, x: f64) -> Result<f64> {
        Ok(self.burgers.eval(t, x, None)?.w)
    }

    /// `(ρ̄, ū)(t, x)`.
    pub fn wave_state(&self, t: f64, x: f64) -> Result<(f64, f64)> {
        let p = self.eval(t, x)?;
        Ok((p.rho, p.u))
    }

    pub fn eval(&self, t: f64, x: f64) -> Result<WavePoint> {
        self.eval_guess(t, x, None).map(|(p, _)| p)
    }

    /// Evaluates the wave and returns the characteristic foot for warm starts.
    pub fn eval_guess(&self, t: f64, x: f64, guess: Option<f64>) -> Result<(WavePoint, f64)> {
        if !(t >= 0.0) {
            return Err(domain(format!("wave time must be >= 0, got {t}")));
        }
        let b = self.burgers.eval(1.0 + t, x, guess)?;
        Ok((self.invert(&b)?, b.x0))
    }

    /// Batch evaluation at ascending positions, warm-starting each root solve.
    pub fn wave_field(&self, t: f64, xs: &[f64]) -> Result<Vec<WavePoint>> {
        let mut out = Vec::with_capacity(xs.len());
        let mut guess = None;
        for &x in xs {
            let (p, x0) = self.eval_guess(t, x, guess)?;
            guess = Some(x0);
            out.push(p);
        }
        Ok(out)
    }

    /// Maps a Burgers point to the wave state through the invariant relations.
    pub fn invert(&self, b: &BurgersPoint) -> Result<WavePoint> {
        let g = self.gas.gamma;
        let k = (g - 1.0) / (g + 1.0);
        let beta = 2.0 / (g - 1.0);
        let gap = b.w.clamp(self.w_minus, self.w_plus) - self.sigma2;
        if !(gap > 0.0) {
            return Err(numeric(format!(
                "wave inversion failed: λ₂ − Σ₂ = {gap} is not positive"
            )));
        }
        let c = k * gap;
        let rho = (c / g.sqrt())
            .powf(beta)
            .clamp(self.rho_minus, self.rho_plus);
        let u = (self.sigma2 + beta * c).clamp(self.u_minus, self.u_plus);
        let (c_x, c_xx, c_t) = (k * b.w_x, k * b.w_xx, k * b.w_t);
        let ux_coef = 2.0 / (g + 1.0);
        Ok(WavePoint {
            rho,
            u,
            rho_x: beta * rho * c_x / c,
            u_x: ux_coef * b.w_x,
            rho_xx: beta * rho * ((beta - 1.0) * (c_x / c).powi(2) + c_xx / c),
            u_xx: ux_coef * b.w_xx,
            rho_t: beta * rho * c_t / c,
            u_t: ux_coef * b.w_t,
        })
    }

    /// `(ρ̄_x, ū_x, ρ̄_xx, ū_xx, ū_t)`.
    pub fn wave_derivatives(&self, t: f64, x: f64) -> Result<(f64, f64, f64, f64, f64)> {
        let p = self.eval(t, x)?;
        Ok((p.rho_x, p.u_x, p.rho_xx, p.u_xx, p.u_t))
    }

    /// Interval `[a, b]` containing the fan at time `t`, widened by `pad`.
    pub fn fan_extent(&self, t: f64, pad: f64) -> (f64, f64) {
        let tt = 1.0 + t;
        (
            self.w_minus.min(0.0) * tt - pad,
            self.w_plus.max(0.0) * tt + pad,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn benchmark(eta: f64) -> WaveProfile {
        let gas = GasParams::default();
        WaveProfile::new(gas, 1.0, 2.0, sonic_left_velocity(&gas, 1.0), None, 2.0, eta).unwrap()
    }

    #[test]
    fn construction_derives_compatible_right_state() {
        let wp = benchmark(0.1);
        let s = |r, u| wp.gas.riemann_invariant(Family::Second, r, u).unwrap();
        assert!((s(1.0, wp.u_minus) - s(2.0, wp.u_plus)).abs() < 1e-12);
        assert!(wp.w_minus.abs() < 1e-15);
        assert!(wp.w_minus < wp.w_plus);
        assert!((wp.kq - 4.0 / std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn rejects_incompatible_or_compressive_states() {
        let gas = GasParams::default();
        assert!(WaveProfile::new(gas, 1.0, 2.0, -2f64.sqrt(), Some(0.0), 2.0, 0.1).is_err());
        assert!(WaveProfile::new(gas, 2.0, 1.0, 0.0, None, 2.0, 0.1).is_err());
        assert!(WaveProfile::new(gas, 1.0, 2.0, -3.0, None, 2.0, 0.1).is_err());
        assert!(WaveProfile::new(gas, 1.0, 2.0, 0.0, None, 1.0, 0.1).is_err());
    }

    #[test]
    fn end_states_recovered() {
        let wp = benchmark(0.1);
        let (r, u) = wp.wave_state(3.0, -1e6).unwrap();
        assert!((r - 1.0).abs() < 1e-8 && (u - wp.u_minus).abs() < 1e-8);
        let (r, u) = wp.wave_state(3.0, 1e6).unwrap();
        assert!((r - 2.0).abs() < 1e-8 && (u - wp.u_plus).abs() < 1e-8);
        let d = wp.wave_derivatives(3.0, -1e6).unwrap();
        for v in [d.0, d.1, d.2, d.3, d.4] {
            assert!(v.abs() < 1e-10);
        }
    }

    #[test]
    fn invariant_constant_and_speed_round_trip() {
        for &gamma in &[1.4, 2.0, 3.0] {
            let gas = GasParams::new(gamma, 1.0, 1.0 / 3.0, 0.0).unwrap();
            let wp = WaveProfile::new(gas, 0.7, 1.9, 0.0, None, 2.0, 0.2).unwrap();
            for &t in &[0.0, 1.0, 25.0] {
                for i in 0..200 {
                    let x = -20.0 + 0.5 * i as f64;
                    let (r, u) = wp.wave_state(t, x).unwrap();
                    let s = gas.riemann_invariant(Family::Second, r, u).unwrap();
                    assert!((s - wp.sigma2).abs() <= 1e-10);
                    let l = gas.lambda(Family::Second, r, u).unwrap();
                    assert!((l - wp.burgers_eval(1.0 + t, x).unwrap()).abs() <= 1e-10);
                }
            }
        }
    }

    #[test]
    fn monotone_inside_fan() {
        let wp = benchmark(0.1);
        let xs: Vec<f64> = (0..200).map(|i| -5.0 + 10.0 * i as f64 / 199.0 * 2.0).collect();
        for p in wp.wave_field(5.0, &xs).unwrap() {
            assert!(p.u_x > 0.0 && p.rho_x > 0.0);
            assert!((1.0..=2.0).contains(&p.rho));
            assert!(p.u >= wp.u_minus && p.u <= wp.u_plus);
        }
    }

    #[test]
    fn batch_matches_pointwise() {
        let wp = benchmark(0.1);
        let xs: Vec<f64> = (0..50).map(|i| -40.0 + 3.0 * i as f64).collect();
        let batch = wp.wave_field(7.0, &xs).unwrap();
        for (x, p) in xs.iter().zip(batch) {
            let q = wp.eval(7.0, *x).unwrap();
            assert!((p.rho - q.rho).abs() < 1e-13 && (p.u_x - q.u_x).abs() < 1e-13);
        }
    }

    #[test]
    fn euler_residual_second_order() {
        let gas = GasParams::default();
        let wp = WaveProfile::new(gas, 1.0, 2.0, sonic_left_velocity(&gas, 1.0), None, 2.0, 0.2)
            .unwrap();
        let t = 1.0;
        let st = |t: f64, x: f64| wp.wave_state(t, x).unwrap();
        let resid = |h: f64| {
            let mut worst: f64 = 0.0;
            for &x in &[-1.0, 0.5, 2.0, 4.0] {
                let (rp, up) = st(t + h, x);
                let (rm, um) = st(t - h, x);
                let (rr, ur) = st(t, x + h);
                let (rl, ul) = st(t, x - h);
                let mass = (rp - rm) / (2.0 * h) + (rr * ur - rl * ul) / (2.0 * h);
                let mom = (rp * up - rm * um) / (2.0 * h)
                    + (rr * ur * ur + rr.powi(2) - rl * ul * ul - rl.powi(2)) / (2.0 * h);
                worst = worst.max(mass.abs()).max(mom.abs());
            }
            worst
        };
        let ratio = resid(0.04) / resid(0.02);
        assert!((ratio - 4.0).abs() <= 1.0, "ratio {ratio}");
    }

    #[test]
    fn analytic_derivatives_fourth_order_check() {
        let wp = benchmark(0.3);
        let h = 1e-2;
        let fd4 = |f: &dyn Fn(f64) -> f64, x: f64| {
            (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h)
        };
        let mut seed = 12345u64;
        let mut next = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (seed >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..20 {
            let t = 10.0 * next();
            let x = -5.0 + 30.0 * next();
            let p = wp.eval(t, x).unwrap();
            let rho = |y: f64| wp.eval(t, y).unwrap().rho;
            let u = |y: f64| wp.eval(t, y).unwrap().u;
            let rx = |y: f64| wp.eval(t, y).unwrap().rho_x;
            let ux = |y: f64| wp.eval(t, y).unwrap().u_x;
            let ut = |s: f64| wp.eval(s, x).unwrap().u;
            let rt = |s: f64| wp.eval(s, x).unwrap().rho;
            assert!((fd4(&rho, x) - p.rho_x).abs() < 1e-8);
            assert!((fd4(&u, x) - p.u_x).abs() < 1e-8);
            assert!((fd4(&rx, x) - p.rho_xx).abs() < 1e-8);
            assert!((fd4(&ux, x) - p.u_xx).abs() < 1e-8);
            if t > 2.0 * h {
                assert!((fd4(&ut, t) - p.u_t).abs() < 1e-8);
                assert!((fd4(&rt, t) - p.rho_t).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn foot_converges_where_newton_oscillates() {
        let wp = benchmark(0.1);
        let (r, _) = wp.wave_state(70.77870648216421, 14.347772626655388).unwrap();
        assert!(r > wp.rho_minus && r < wp.rho_plus);
    }

    proptest! {
        #[test]
        fn burgers_nondecreasing(t in 0.0f64..500.0, a in -300.0f64..800.0, d in 0.0f64..50.0) {
            let wp = benchmark(0.1);
            let lo = wp.burgers_eval(1.0 + t, a).unwrap();
            let hi = wp.burgers_eval(1.0 + t, a + d).unwrap();
            prop_assert!(lo <= hi + 1e-15);
            prop_assert!(lo >= wp.w_minus && hi <= wp.w_plus);
        }

        #[test]
        fn state_within_end_states(t in 0.0f64..300.0, x in -1e3f64..1e3) {
            let wp = benchmark(0.1);
            let (r, u) = wp.wave_state(t, x).unwrap();
            prop_assert!(r >= wp.rho_minus && r <= wp.rho_plus);
            prop_assert!(u >= wp.u_minus && u <= wp.u_plus);
        }
    }
}
