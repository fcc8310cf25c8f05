use crate::error::{domain, Result};
use serde::{Deserialize, Serialize};

/// Uniform cell-centered grid on `[x_left, x_right]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid1D {
    pub x_left: f64,
    pub x_right: f64,
    pub n: usize,
}

impl Grid1D {
    pub fn new(x_left: f64, x_right: f64, n: usize) -> Result<Self> {
        let g = Self {
            x_left,
            x_right,
            n,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 16 {
            return Err(domain(format!("grid needs at least 16 cells, got {}", self.n)));
        }
        if !(self.x_left.is_finite() && self.x_right.is_finite() && self.x_right > self.x_left) {
            return Err(domain(format!(
                "grid bounds must be finite with x_left < x_right, got [{}, {}]",
                self.x_left, self.x_right
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        (self.x_right - self.x_left) / self.n as f64
    }

    #[inline]
    pub fn center(&self, i: usize) -> f64 {
        self.x_left + (i as f64 + 0.5) * self.dx()
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.center(i)).collect()
    }

    /// Same bounds with `factor` times as many cells.
    pub fn refined(&self, factor: usize) -> Self {
        Self {
            n: self.n * factor,
            ..*self
        }
    }

    pub fn contains(&self, a: f64, b: f64) -> bool {
        self.x_left <= a && b <= self.x_right
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_and_centers() {
        let g = Grid1D::new(-1.0, 1.0, 20).unwrap();
        assert!((g.dx() - 0.1).abs() < 1e-15);
        assert!((g.center(0) + 0.95).abs() < 1e-15);
        assert!((g.centers()[19] - 0.95).abs() < 1e-14);
        assert_eq!(g.refined(2).n, 40);
    }

    #[test]
    fn rejects_small_or_inverted() {
        assert!(Grid1D::new(0.0, 1.0, 8).is_err());
        assert!(Grid1D::new(1.0, 0.0, 100).is_err());
    }
}
