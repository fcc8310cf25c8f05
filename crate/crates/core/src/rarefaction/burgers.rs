//! Smooth Burgers data `w₀` and its characteristic solution.

use crate::error::{domain, numeric, Result};
use crate::quad::{integrate, integrate_half_line, QuadTol};
use std::f64::consts::FRAC_PI_2;

/// `K_q = 1 / ∫₀^∞ (1+y²)^{-q} dy`, evaluated by adaptive quadrature after `y = tan s`.
pub fn kq_constant(q: f64) -> Result<f64> {
    if !(q.is_finite() && q >= 2.0) {
        return Err(domain(format!("tail exponent q must be >= 2, got {q}")));
    }
    let tol = QuadTol {
        abs: 1e-15,
        rel: 1e-14,
        max_panels: 4000,
    };
    let v = integrate_half_line(|y| (1.0 + y * y).powf(-q), tol)?;
    Ok(1.0 / v)
}

/// Point values of the Burgers solution and its derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BurgersPoint {
    pub x0: f64,
    pub w: f64,
    pub w_x: f64,
    pub w_xx: f64,
    pub w_t: f64,
}

/// Solution of `w_t + w w_x = 0` with the smooth monotone data
/// `w₀(x) = (w₊+w₋)/2 + (w₊−w₋)/2 · K_q ∫₀^{ηx} (1+y²)^{-q} dy`.
#[derive(Debug, Clone, PartialEq)]
pub struct Burgers {
    pub w_minus: f64,
    pub w_plus: f64,
    pub q: f64,
    pub eta: f64,
    pub kq: f64,
    // Integer exponent of cos^n in the angular form of the primitive, if any.
    cos_power: Option<u32>,
}

impl Burgers {
    pub fn new(w_minus: f64, w_plus: f64, q: f64, eta: f64) -> Result<Self> {
        if !(w_minus.is_finite() && w_plus.is_finite() && w_minus < w_plus) {
            return Err(domain(format!(
                "Burgers end speeds must satisfy w- < w+, got {w_minus} and {w_plus}"
            )));
        }
        if !(eta.is_finite() && eta > 0.0) {
            return Err(domain(format!("eta must be positive, got {eta}")));
        }
        let kq = kq_constant(q)?;
        let n = 2.0 * q - 2.0;
        let cos_power = (n.fract() == 0.0 && n <= 64.0).then_some(n as u32);
        Ok(Self {
            w_minus,
            w_plus,
            q,
            eta,
            kq,
            cos_power,
        })
    }

    /// `∫₀^z (1+y²)^{-q} dy = ∫₀^{atan z} cos^{2q-2}(s) ds`.
    pub fn primitive(&self, z: f64) -> f64 {
        let phi = z.atan();
        match self.cos_power {
            Some(n) => cos_power_integral(n, phi),
            None => {
                let n = 2.0 * self.q - 2.0;
                let tol = QuadTol {
                    abs: 1e-15,
                    rel: 1e-14,
                    max_panels: 500,
                };
                // the integrand is smooth and bounded on [0, π/2]; failure here is a bug
                integrate(|s| s.cos().powf(n), 0.0, phi, tol)
                    .expect("cos^n quadrature on a bounded interval")
            }
        }
    }

    fn half_jump(&self) -> f64 {
        0.5 * (self.w_plus - self.w_minus)
    }

    pub fn w0(&self, x: f64) -> f64 {
        let mid = 0.5 * (self.w_plus + self.w_minus);
        let w = mid + self.half_jump() * self.kq * self.primitive(self.eta * x);
        w.clamp(self.w_minus, self.w_plus)
    }

    pub fn w0_prime(&self, x: f64) -> f64 {
        let z = self.eta * x;
        self.half_jump() * self.kq * self.eta * (1.0 + z * z).powf(-self.q)
    }

    pub fn w0_second(&self, x: f64) -> f64 {
        let z = self.eta * x;
        self.half_jump() * self.kq * self.eta * self.eta * (-2.0 * self.q) * z
            * (1.0 + z * z).powf(-self.q - 1.0)
    }

    /// Foot `x₀` of the characteristic through `(t, x)`: the root of
    /// `x₀ + w₀(x₀) t = x`. `guess` warm-starts the iteration.
    pub fn foot(&self, t: f64, x: f64, guess: Option<f64>) -> Result<f64> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(domain(format!("time must be finite and >= 0, got {t}")));
        }
        if t == 0.0 {
            return Ok(x);
        }
        // F is increasing with F' >= 1 and the root lies in [x − w₊t, x − w₋t]
        let mut lo = x - self.w_plus * t;
        let mut hi = x - self.w_minus * t;
        let mut x0 = guess.unwrap_or(x - 0.5 * (self.w_plus + self.w_minus) * t);
        if !(x0 > lo && x0 < hi) {
            x0 = 0.5 * (lo + hi);
        }
        let mut f_prev = f64::INFINITY;
        for _ in 0..200 {
            let wt = self.w0(x0) * t;
            let f = x0 + wt - x;
            // residual at the rounding level of its own terms
            if f.abs() <= 4.0 * f64::EPSILON * (x0.abs() + wt.abs() + x.abs()) {
                return Ok(x0);
            }
            if f > 0.0 {
                hi = x0;
            } else {
                lo = x0;
            }
            let fp = 1.0 + self.w0_prime(x0) * t;
            let mut next = x0 - f / fp;
            // bisect when Newton leaves the bracket or stalls, which happens
            // where the flux profile bends and the iteration would cycle
            if !(next > lo && next < hi) || f.abs() > 0.5 * f_prev {
                next = 0.5 * (lo + hi);
            }
            f_prev = f.abs();
            let tol = 1e-13_f64.max(4.0 * f64::EPSILON * next.abs());
            if (next - x0).abs() <= tol || hi - lo <= tol {
                return Ok(next);
            }
            x0 = next;
        }
        Err(numeric(format!(
            "characteristic foot did not converge at t={t}, x={x}"
        )))
    }

    /// `w(t, x)` with first and second space derivatives and the time derivative.
    pub fn eval(&self, t: f64, x: f64, guess: Option<f64>) -> Result<BurgersPoint> {
        let x0 = self.foot(t, x, guess)?;
        let w = self.w0(x0);
        let d0 = self.w0_prime(x0);
        let jac = 1.0 + d0 * t;
        let w_x = d0 / jac;
        let w_xx = self.w0_second(x0) / (jac * jac * jac);
        Ok(BurgersPoint {
            x0,
            w,
            w_x,
            w_xx,
            w_t: -w * w_x,
        })
    }

    /// `∫ f(x) dx` over the whole line at time `t`, parametrized by the
    /// characteristic foot `x₀ = tan(s)/η`. `f` receives the Burgers point.
    pub fn integrate_over_line<F>(&self, t: f64, f: F, tol: QuadTol) -> Result<f64>
    where
        F: Fn(&BurgersPoint) -> f64,
    {
        let eta = self.eta;
        integrate(
            |s: f64| {
                if s.abs() >= FRAC_PI_2 {
                    return 0.0;
                }
                let c = s.cos();
                let x0 = s.tan() / eta;
                let p = self.point_from_foot(t, x0);
                let jac = 1.0 + self.w0_prime(x0) * t;
                f(&p) * jac / (eta * c * c)
            },
            -FRAC_PI_2,
            FRAC_PI_2,
            tol,
        )
    }

    /// The point reached at time `t` from the foot `x₀`, without root finding.
    pub fn point_from_foot(&self, t: f64, x0: f64) -> BurgersPoint {
        let w = self.w0(x0);
        let d0 = self.w0_prime(x0);
        let jac = 1.0 + d0 * t;
        let w_x = d0 / jac;
        BurgersPoint {
            x0,
            w,
            w_x,
            w_xx: self.w0_second(x0) / (jac * jac * jac),
            w_t: -w * w_x,
        }
    }
}

/// `∫₀^φ cos^n(s) ds` by the reduction formula.
fn cos_power_integral(n: u32, phi: f64) -> f64 {
    let (s, c) = phi.sin_cos();
    let (mut acc, start) = if n % 2 == 0 { (phi, 2) } else { (s, 3) };
    let mut k = start;
    while k <= n {
        let kf = k as f64;
        acc = c.powi(k as i32 - 1) * s / kf + (kf - 1.0) / kf * acc;
        k += 2;
    }
    acc
}
