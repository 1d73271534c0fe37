//! Test problems with analytic derivatives.
//!
//! Every objective implements [`Objective`]: value and gradient are
//! mandatory, the remaining capabilities (Hessian-vector products, stochastic
//! gradients, known infimum, noise bound) are optional and report
//! [`Error::Unsupported`] when absent.

mod dataset;
mod exp_loss;
mod polynomial;
mod quadratic;

pub use dataset::{gen_synthetic_dataset, load_idx_dataset, read_idx_images, read_idx_labels, Dataset};
pub use exp_loss::{exp_loss_constants, make_exp_loss, ExpLoss, OVERFLOW_GUARD};
pub use polynomial::{make_poly2d, make_quartic, Poly2d, Quartic};
pub use quadratic::{make_noisy_quadratic, NoisyQuadratic};

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::vector::{check_dim, check_finite, ParamVector};

pub trait Objective: Send + Sync {
    fn name(&self) -> &str;

    fn dim(&self) -> usize;

    fn value_at(&self, x: &[f64]) -> Result<f64>;

    fn grad_into(&self, x: &[f64], out: &mut [f64]) -> Result<()>;

    fn has_hvp(&self) -> bool {
        false
    }

    fn hvp_into(&self, _x: &[f64], _v: &[f64], _out: &mut [f64]) -> Result<()> {
        Err(self.unsupported("Hessian-vector products"))
    }

    fn has_noisy_grad(&self) -> bool {
        false
    }

    fn noisy_grad_into(&self, _x: &[f64], _rng: &mut RngStream, _out: &mut [f64]) -> Result<()> {
        Err(self.unsupported("stochastic gradients"))
    }

    /// Known infimum `F*`.
    fn f_star(&self) -> Option<f64> {
        None
    }

    /// Almost-sure bound on `‖∇f(x, ξ) − ∇F(x)‖`.
    fn noise_bound(&self) -> Option<f64> {
        None
    }

    /// Analytically certified `(L0, L1)` pair, when one is known.
    fn certified_constants(&self) -> Option<(f64, f64)> {
        None
    }

    fn unsupported(&self, capability: &'static str) -> Error {
        Error::Unsupported {
            objective: self.name().to_string(),
            capability,
        }
    }

    fn value(&self, x: &ParamVector) -> Result<f64> {
        check_dim(self.dim(), x.dim())?;
        let v = self.value_at(x.as_slice())?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite {
                context: "objective value",
                index: 0,
            })
        }
    }

    fn grad(&self, x: &ParamVector) -> Result<ParamVector> {
        check_dim(self.dim(), x.dim())?;
        let mut out = vec![0.0; self.dim()];
        self.grad_into(x.as_slice(), &mut out)?;
        check_finite(&out, "gradient")?;
        ParamVector::new(out)
    }

    fn hvp(&self, x: &ParamVector, v: &ParamVector) -> Result<ParamVector> {
        check_dim(self.dim(), x.dim())?;
        check_dim(self.dim(), v.dim())?;
        let mut out = vec![0.0; self.dim()];
        self.hvp_into(x.as_slice(), v.as_slice(), &mut out)?;
        check_finite(&out, "Hessian-vector product")?;
        ParamVector::new(out)
    }

    fn noisy_grad(&self, x: &ParamVector, rng: &mut RngStream) -> Result<ParamVector> {
        check_dim(self.dim(), x.dim())?;
        let mut out = vec![0.0; self.dim()];
        self.noisy_grad_into(x.as_slice(), rng, &mut out)?;
        check_finite(&out, "stochastic gradient")?;
        ParamVector::new(out)
    }
}
