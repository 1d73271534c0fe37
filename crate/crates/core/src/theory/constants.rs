use crate::error::{Error, Result};

/// Radius parameter `c` used when none is given: `c = 1/10`, the value behind
/// the `A = B = 1.06` constants of the deterministic step-size rule.
pub const DEFAULT_RADIUS: f64 = 0.1;

/// Descent-inequality constants for radius `c > 0`:
/// `A = 1 + e^c − (e^c − 1)/c`, `B = (e^c − 1)/c`.
pub fn ab_constants(c: f64) -> Result<(f64, f64)> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidInput(format!("radius c must be positive, got {c}")));
    }
    // expm1 keeps B accurate as c → 0.
    let b = c.exp_m1() / c;
    Ok((1.0 + c.exp_m1() + 1.0 - b, b))
}

/// An `(L0, L1)` pair together with the radius `c` and the derived `(A, B)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothnessConstants {
    pub l0: f64,
    pub l1: f64,
    pub c: f64,
    pub a: f64,
    pub b: f64,
}

impl SmoothnessConstants {
    pub fn new(l0: f64, l1: f64, c: f64) -> Result<Self> {
        if !(l0 >= 0.0 && l0.is_finite()) || !(l1 >= 0.0 && l1.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "smoothness constants must be finite and nonnegative, got L0={l0}, L1={l1}"
            )));
        }
        let (a, b) = ab_constants(c)?;
        Ok(SmoothnessConstants { l0, l1, c, a, b })
    }

    pub fn with_default_radius(l0: f64, l1: f64) -> Result<Self> {
        Self::new(l0, l1, DEFAULT_RADIUS)
    }

    /// Same radius, both constants multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.l0 * factor, self.l1 * factor, self.c)
    }

    /// Largest admissible step `c / L1` (infinite when `L1 = 0`).
    pub fn admissible_radius(&self) -> f64 {
        if self.l1 == 0.0 {
            f64::INFINITY
        } else {
            self.c / self.l1
        }
    }

    /// `A·L0 + B·L1·g`: the local Lipschitz constant of the gradient within
    /// the admissible radius of a point with gradient norm `g`.
    pub fn local_lipschitz(&self, grad_norm: f64) -> f64 {
        self.a * self.l0 + self.b * self.l1 * grad_norm
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tenth_radius_constants_are_below_106() {
        let (a, b) = ab_constants(0.1).unwrap();
        let e = 0.1f64.exp();
        assert!((a - (1.0 + e - 10.0 * (e - 1.0))).abs() < 1e-14);
        assert!((b - 10.0 * (e - 1.0)).abs() < 1e-14);
        assert!(a < 1.06 && b < 1.06);
        assert!((a - 1.0535).abs() < 1e-4 && (b - 1.0517).abs() < 1e-4);
    }

    #[test]
    fn small_radius_limit() {
        let (a, b) = ab_constants(1e-9).unwrap();
        assert!((a - 1.0).abs() < 1e-8 && (b - 1.0).abs() < 1e-8);
        let (a, b) = ab_constants(1.0 / 500.0).unwrap();
        assert!(a < 1.002 && b < 1.002);
    }

    #[test]
    fn unit_radius() {
        let (a, b) = ab_constants(1.0).unwrap();
        assert!((b - (std::f64::consts::E - 1.0)).abs() < 1e-15);
        assert!((a - 2.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_nonpositive_radius() {
        assert!(ab_constants(0.0).is_err());
        assert!(ab_constants(-1.0).is_err());
    }

    #[test]
    fn monotone_on_grid() {
        let mut prev = ab_constants(1e-3).unwrap();
        for k in 2..=1000 {
            let c = k as f64 * 1e-3;
            let cur = ab_constants(c).unwrap();
            assert!(cur.0 >= prev.0 && cur.1 >= prev.1, "c={c}");
            assert!(cur.0 >= 1.0 && cur.1 >= 1.0);
            prev = cur;
        }
    }
}
