use super::{Dataset, Objective};
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::theory::SmoothnessConstants;
use crate::vector::dot;

/// Evaluations abort when any exponent exceeds this value.
pub const OVERFLOW_GUARD: f64 = 700.0;

/// Exponential-loss linear classifier (bias fixed at zero) with the
/// `Σ_j (cosh(λ w_j) − 1)` regularizer:
///
/// `E(w) = (1/n) Σ_i exp(−y_i wᵀx_i) + Σ_j (cosh(λ w_j) − 1)`.
#[derive(Debug, Clone)]
pub struct ExpLoss {
    data: Dataset,
    lambda: f64,
    batch_size: Option<usize>,
}

pub fn make_exp_loss(data: Dataset, lambda: f64) -> Result<ExpLoss> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidInput(format!("lambda must be positive, got {lambda}")));
    }
    if data.is_empty() {
        return Err(Error::InvalidInput("empty dataset".into()));
    }
    Ok(ExpLoss {
        data,
        lambda,
        batch_size: None,
    })
}

impl ExpLoss {
    /// Enables mini-batch stochastic gradients (samples drawn with
    /// replacement; the regularizer term is exact).
    pub fn with_batch_size(mut self, batch_size: usize) -> Result<Self> {
        if batch_size == 0 {
            return Err(Error::InvalidInput("batch size must be positive".into()));
        }
        self.batch_size = Some(batch_size);
        Ok(self)
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn batch_size(&self) -> Option<usize> {
        self.batch_size
    }

    /// `exp(−y_i wᵀx_i)`, guarded.
    fn sample_weight(&self, w: &[f64], i: usize) -> Result<f64> {
        let z = -self.data.label(i) * dot(w, self.data.point(i));
        if z > OVERFLOW_GUARD || z.is_nan() {
            return Err(Error::Overflow {
                location: format!("sample {i}"),
                exponent: z,
            });
        }
        Ok(z.exp())
    }

    fn reg_arg(&self, w: &[f64], j: usize) -> Result<f64> {
        let a = self.lambda * w[j];
        if a.abs() > OVERFLOW_GUARD || a.is_nan() {
            return Err(Error::Overflow {
                location: format!("regularizer coordinate {j}"),
                exponent: a.abs(),
            });
        }
        Ok(a)
    }

    fn add_reg_grad(&self, w: &[f64], out: &mut [f64]) -> Result<()> {
        for (j, o) in out.iter_mut().enumerate().take(w.len()) {
            *o += self.lambda * self.reg_arg(w, j)?.sinh();
        }
        Ok(())
    }
}

impl Objective for ExpLoss {
    fn name(&self) -> &str {
        "exp-loss"
    }

    fn dim(&self) -> usize {
        self.data.dim()
    }

    fn value_at(&self, w: &[f64]) -> Result<f64> {
        let n = self.data.len();
        let mut loss = 0.0;
        for i in 0..n {
            loss += self.sample_weight(w, i)?;
        }
        let mut reg = 0.0;
        for j in 0..w.len() {
            // cosh(a) − 1 = 2 sinh²(a/2), without cancellation near 0.
            let s = (0.5 * self.reg_arg(w, j)?).sinh();
            reg += 2.0 * s * s;
        }
        Ok(loss / n as f64 + reg)
    }

    fn grad_into(&self, w: &[f64], out: &mut [f64]) -> Result<()> {
        out.fill(0.0);
        let n = self.data.len();
        for i in 0..n {
            let c = -self.sample_weight(w, i)? * self.data.label(i) / n as f64;
            for (o, x) in out.iter_mut().zip(self.data.point(i)) {
                *o += c * x;
            }
        }
        self.add_reg_grad(w, out)
    }

    fn has_hvp(&self) -> bool {
        true
    }

    fn hvp_into(&self, w: &[f64], v: &[f64], out: &mut [f64]) -> Result<()> {
        out.fill(0.0);
        let n = self.data.len();
        for i in 0..n {
            let x = self.data.point(i);
            let c = self.sample_weight(w, i)? * dot(x, v) / n as f64;
            for (o, xi) in out.iter_mut().zip(x) {
                *o += c * xi;
            }
        }
        let l2 = self.lambda * self.lambda;
        for j in 0..w.len() {
            out[j] += l2 * self.reg_arg(w, j)?.cosh() * v[j];
        }
        Ok(())
    }

    fn has_noisy_grad(&self) -> bool {
        self.batch_size.is_some()
    }

    fn noisy_grad_into(&self, w: &[f64], rng: &mut RngStream, out: &mut [f64]) -> Result<()> {
        let b = self
            .batch_size
            .ok_or_else(|| self.unsupported("stochastic gradients"))?;
        out.fill(0.0);
        let n = self.data.len();
        for _ in 0..b {
            let i = rng.below(n);
            let c = -self.sample_weight(w, i)? * self.data.label(i) / b as f64;
            for (o, x) in out.iter_mut().zip(self.data.point(i)) {
                *o += c * x;
            }
        }
        self.add_reg_grad(w, out)
    }
}

/// Certified `(L0, L1)` for the regularized exponential loss with data of
/// norm at most `radius`, for any split `ρ = ρ₁ + ρ₂`:
///
/// `L1 = (1+ρ)√d R²/λ`,
/// `L0 = max(L1 (R + dλ), (R² + dλ²)·(n(R² + dλ²)/(ρ₁R²))^{1+1/ρ₂})`.
///
/// The returned constants use the default descent radius `c`.
pub fn exp_loss_constants(
    radius: f64,
    d: usize,
    lambda: f64,
    n: usize,
    rho1: f64,
    rho2: f64,
) -> Result<SmoothnessConstants> {
    if !(lambda > 0.0) || !(rho1 > 0.0) || !(rho2 > 0.0) || d == 0 || n == 0 {
        return Err(Error::Precondition(format!(
            "need lambda, rho1, rho2 > 0 and d, n >= 1 (lambda={lambda}, rho1={rho1}, rho2={rho2}, d={d}, n={n})"
        )));
    }
    if lambda >= radius {
        return Err(Error::Precondition(format!(
            "lambda ({lambda}) must be below the data radius ({radius})"
        )));
    }
    let (r, df, nf) = (radius, d as f64, n as f64);
    let rho = rho1 + rho2;
    let l1 = (1.0 + rho) * df.sqrt() / lambda * r * r;
    let spread = r * r + df * lambda * lambda;
    let first = l1 * (r + df * lambda);
    let second = spread * (nf * spread / (rho1 * r * r)).powf(1.0 + 1.0 / rho2);
    SmoothnessConstants::new(first.max(second), l1, crate::theory::DEFAULT_RADIUS)
}
