use super::Objective;
use crate::error::Result;
use crate::rng::RngStream;

/// `f(x, ξ) = ½(x + ξ)²` with `ξ ~ U[−√3, √3]`, so `F(x) = ½x²` and the
/// stochastic gradient `x + ξ` is unbiased with `|ξ| ≤ √3`.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoisyQuadratic;

pub fn make_noisy_quadratic() -> NoisyQuadratic {
    NoisyQuadratic
}

impl Objective for NoisyQuadratic {
    fn name(&self) -> &str {
        "noisy-quadratic"
    }

    fn dim(&self) -> usize {
        1
    }

    fn value_at(&self, x: &[f64]) -> Result<f64> {
        Ok(0.5 * x[0] * x[0])
    }

    fn grad_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        out[0] = x[0];
        Ok(())
    }

    fn has_hvp(&self) -> bool {
        true
    }

    fn hvp_into(&self, _x: &[f64], v: &[f64], out: &mut [f64]) -> Result<()> {
        out[0] = v[0];
        Ok(())
    }

    fn has_noisy_grad(&self) -> bool {
        true
    }

    fn noisy_grad_into(&self, x: &[f64], rng: &mut RngStream, out: &mut [f64]) -> Result<()> {
        out[0] = x[0] + rng.uniform_unit_variance();
        Ok(())
    }

    fn f_star(&self) -> Option<f64> {
        Some(0.0)
    }

    fn noise_bound(&self) -> Option<f64> {
        Some(3f64.sqrt())
    }

    fn certified_constants(&self) -> Option<(f64, f64)> {
        Some((1.0, 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vector::ParamVector;

    #[test]
    fn gradient_and_noise_support() {
        let q = make_noisy_quadratic();
        let x = ParamVector::new(vec![3.0]).unwrap();
        assert_eq!(q.grad(&x).unwrap()[0], 3.0);
        let mut rng = RngStream::new(11, 0);
        let s3 = 3f64.sqrt();
        for _ in 0..10_000 {
            let g = q.noisy_grad(&x, &mut rng).unwrap()[0];
            assert!(g >= 3.0 - s3 && g <= 3.0 + s3);
        }
    }

    #[test]
    fn noisy_gradient_is_unbiased() {
        let q = make_noisy_quadratic();
        let x = ParamVector::zeros(1);
        let mut rng = RngStream::new(12, 0);
        let n = 1_000_000;
        let mut out = [0.0];
        let mut sum = 0.0;
        for _ in 0..n {
            q.noisy_grad_into(x.as_slice(), &mut rng, &mut out).unwrap();
            sum += out[0];
        }
        assert!((sum / n as f64).abs() < 0.005);
    }
}
