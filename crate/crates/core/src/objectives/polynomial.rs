use super::Objective;
use crate::error::Result;

/// `F(x) = x⁴` in one dimension.
///
/// Not L-smooth for any L, but `(16, 1)`-smooth: `12x² ≤ 16 + 4|x|³`, with
/// equality at `|x| = 2`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Quartic;

pub fn make_quartic() -> Quartic {
    Quartic
}

impl Objective for Quartic {
    fn name(&self) -> &str {
        "quartic"
    }

    fn dim(&self) -> usize {
        1
    }

    fn value_at(&self, x: &[f64]) -> Result<f64> {
        let x2 = x[0] * x[0];
        Ok(x2 * x2)
    }

    fn grad_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        out[0] = 4.0 * x[0] * x[0] * x[0];
        Ok(())
    }

    fn has_hvp(&self) -> bool {
        true
    }

    fn hvp_into(&self, x: &[f64], v: &[f64], out: &mut [f64]) -> Result<()> {
        out[0] = 12.0 * x[0] * x[0] * v[0];
        Ok(())
    }

    fn f_star(&self) -> Option<f64> {
        Some(0.0)
    }

    fn certified_constants(&self) -> Option<(f64, f64)> {
        Some((16.0, 1.0))
    }
}

/// `F(x, y) = x² + (y − 3x + 2)⁴`.
///
/// With `u = y − 3x + 2` and `a = (−3, 1)` the Hessian is
/// `diag(2, 0) + 12u²·aaᵀ`, so `‖∇²F‖ ≤ 2 + 120u²`, while the second gradient
/// component gives `‖∇F‖ ≥ 4|u|³`. Maximising `120u² − 40|u|³` (at `|u| = 2`)
/// certifies `(L0, L1) = (162, 10)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Poly2d;

pub fn make_poly2d() -> Poly2d {
    Poly2d
}

impl Poly2d {
    fn valley(x: &[f64]) -> f64 {
        x[1] - 3.0 * x[0] + 2.0
    }
}

impl Objective for Poly2d {
    fn name(&self) -> &str {
        "poly2d"
    }

    fn dim(&self) -> usize {
        2
    }

    fn value_at(&self, x: &[f64]) -> Result<f64> {
        let u2 = Self::valley(x).powi(2);
        Ok(x[0] * x[0] + u2 * u2)
    }

    fn grad_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        let u = Self::valley(x);
        let c = 4.0 * u * u * u;
        out[0] = 2.0 * x[0] - 3.0 * c;
        out[1] = c;
        Ok(())
    }

    fn has_hvp(&self) -> bool {
        true
    }

    fn hvp_into(&self, x: &[f64], v: &[f64], out: &mut [f64]) -> Result<()> {
        let u = Self::valley(x);
        let k = 12.0 * u * u * (v[1] - 3.0 * v[0]);
        out[0] = 2.0 * v[0] - 3.0 * k;
        out[1] = k;
        Ok(())
    }

    fn f_star(&self) -> Option<f64> {
        Some(0.0)
    }

    fn certified_constants(&self) -> Option<(f64, f64)> {
        Some((162.0, 10.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vector::ParamVector;

    fn pv(v: &[f64]) -> ParamVector {
        ParamVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn quartic_values() {
        let q = make_quartic();
        assert_eq!(q.value(&pv(&[2.0])).unwrap(), 16.0);
        assert_eq!(q.grad(&pv(&[2.0])).unwrap()[0], 32.0);
        assert_eq!(q.value(&pv(&[0.0])).unwrap(), 0.0);
        assert_eq!(q.grad(&pv(&[0.0])).unwrap()[0], 0.0);
        assert_eq!(q.hvp(&pv(&[2.0]), &pv(&[1.0])).unwrap()[0], 48.0);
        assert_eq!(q.f_star(), Some(0.0));
    }

    #[test]
    fn quartic_certificate_holds_on_grid() {
        let (l0, l1) = make_quartic().certified_constants().unwrap();
        for i in -20_000..=20_000 {
            let x = i as f64 * 1e-3;
            assert!(12.0 * x * x <= l0 + l1 * 4.0 * x.abs().powi(3) + 1e-9, "x={x}");
        }
    }

    #[test]
    fn quartic_is_not_globally_smooth() {
        // For any candidate L up to 1e6 some grid point has 12x² > L.
        let grid: Vec<f64> = (0..=4000).map(|i| i as f64 * 0.1).collect();
        let max_curv = grid.iter().map(|x| 12.0 * x * x).fold(0.0, f64::max);
        for l in [1.0, 10.0, 1e3, 1e5, 1e6] {
            assert!(grid.iter().any(|x| 12.0 * x * x > l), "L={l}");
        }
        assert!(max_curv > 1e6);
    }

    #[test]
    fn poly2d_minimum_and_valley() {
        let p = make_poly2d();
        assert_eq!(p.value(&pv(&[0.0, -2.0])).unwrap(), 0.0);
        assert_eq!(p.grad(&pv(&[0.0, -2.0])).unwrap().as_slice(), &[0.0, 0.0]);
        assert_eq!(p.value(&pv(&[1.0, 1.0])).unwrap(), 1.0);
    }

    #[test]
    fn poly2d_certificate_holds_on_grid() {
        let p = make_poly2d();
        let (l0, l1) = p.certified_constants().unwrap();
        for i in -60..=60 {
            for j in -60..=60 {
                let x = pv(&[i as f64 * 0.05, j as f64 * 0.05]);
                let u = x[1] - 3.0 * x[0] + 2.0;
                let h_bound = 2.0 + 120.0 * u * u;
                let g = p.grad(&x).unwrap().norm();
                assert!(h_bound <= l0 + l1 * g + 1e-9);
            }
        }
    }
}
