use crate::error::{numeric, Result};
use crate::gas::GasParams;

/// A cell or face state `(ρ, m)` with the velocity convention already applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conserved {
    pub rho: f64,
    pub m: f64,
    pub u: f64,
}

impl Conserved {
    /// `u = m/ρ` where `ρ > u_floor`, else 0.
    #[inline]
    pub fn new(rho: f64, m: f64, u_floor: f64) -> Self {
        let u = if rho > u_floor { m / rho } else { 0.0 };
        Self { rho, m, u }
    }

    /// Face state from primitive values; momentum is rebuilt as `ρu`.
    #[inline]
    pub fn from_primitive(rho: f64, u: f64) -> Self {
        Self { rho, m: rho * u, u }
    }
}

#[inline]
fn physical_flux(s: &Conserved, gas: &GasParams) -> [f64; 2] {
    [s.m, s.m * s.u + gas.pressure_raw(s.rho)]
}

/// Local Lax-Friedrichs (Rusanov) flux for `(ρ, ρu)`.
#[inline]
pub fn rusanov(l: &Conserved, r: &Conserved, gas: &GasParams) -> [f64; 2] {
    let a = (l.u.abs() + gas.sound_speed_raw(l.rho)).max(r.u.abs() + gas.sound_speed_raw(r.rho));
    let fl = physical_flux(l, gas);
    let fr = physical_flux(r, gas);
    [
        0.5 * (fl[0] + fr[0]) - 0.5 * a * (r.rho - l.rho),
        0.5 * (fl[1] + fr[1]) - 0.5 * a * (r.m - l.m),
    ]
}

/// Checked interface flux from raw `(ρ, m)` pairs.
pub fn flux_hyperbolic(
    left: (f64, f64),
    right: (f64, f64),
    gas: &GasParams,
    u_floor: f64,
) -> Result<[f64; 2]> {
    for v in [left.0, left.1, right.0, right.1] {
        if !v.is_finite() {
            return Err(numeric("non-finite state passed to the hyperbolic flux"));
        }
    }
    let l = Conserved::new(left.0, left.1, u_floor);
    let r = Conserved::new(right.0, right.1, u_floor);
    Ok(rusanov(&l, &r, gas))
}

/// Face viscosity `μ_ε((ρ_L + ρ_R)/2)`, zero when both sides are below `u_floor`.
#[inline]
pub fn face_viscosity(rho_l: f64, rho_r: f64, gas: &GasParams, u_floor: f64) -> f64 {
    if rho_l < u_floor && rho_r < u_floor {
        0.0
    } else {
        gas.viscosity_raw(0.5 * (rho_l + rho_r))
    }
}

/// Interior face stresses `μ_ε(ρ_face)(u_{i+1} − u_i)/dx` for `n−1` faces.
pub fn viscous_flux(rho: &[f64], u: &[f64], gas: &GasParams, dx: f64, u_floor: f64) -> Vec<f64> {
    rho.windows(2)
        .zip(u.windows(2))
        .map(|(r, v)| face_viscosity(r[0], r[1], gas, u_floor) * (v[1] - v[0]) / dx)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gas() -> GasParams {
        GasParams::default()
    }

    #[test]
    fn consistency() {
        let f = flux_hyperbolic((1.0, 0.0), (1.0, 0.0), &gas(), 1e-10).unwrap();
        assert_eq!(f, [0.0, 1.0]);
        let f = flux_hyperbolic((0.0, 0.0), (0.0, 0.0), &gas(), 1e-10).unwrap();
        assert_eq!(f, [0.0, 0.0]);
        let f = flux_hyperbolic((1.5, 0.9), (1.5, 0.9), &gas(), 1e-10).unwrap();
        assert!((f[0] - 0.9).abs() < 1e-15 && (f[1] - (0.54 + 2.25)).abs() < 1e-14);
    }

    #[test]
    fn symmetric_dam_break_has_no_mass_flux() {
        let f = flux_hyperbolic((1.0, -1.0), (1.0, 1.0), &gas(), 1e-10).unwrap();
        assert_eq!(f[0], 0.0);
        let f = flux_hyperbolic((1.0, 1.0), (1.0, -1.0), &gas(), 1e-10).unwrap();
        assert_eq!(f[0], 0.0);
    }

    #[test]
    fn rejects_nan() {
        assert!(flux_hyperbolic((f64::NAN, 0.0), (1.0, 0.0), &gas(), 1e-10).is_err());
    }

    #[test]
    fn viscous_stresses() {
        let g = gas();
        let rho = vec![1.0; 5];
        assert!(viscous_flux(&rho, &[2.0; 5], &g, 0.1, 1e-10).iter().all(|s| *s == 0.0));
        let x: Vec<f64> = (0..5).map(|i| 0.1 * i as f64).collect();
        for s in viscous_flux(&rho, &x, &g, 0.1, 1e-10) {
            assert!((s - 1.0).abs() < 1e-14);
        }
        let s = viscous_flux(&[0.0, 0.0, 1.0], &[0.0, 3.0, 1.0], &g, 0.1, 1e-10);
        assert_eq!(s[0], 0.0);
        assert!(s[1] != 0.0);
    }
}
