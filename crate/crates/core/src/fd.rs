//! Central finite-difference oracles for gradients and Hessian-vector
//! products.

use crate::error::{Error, Result};
use crate::objectives::Objective;
use crate::vector::{check_dim, ParamVector};

/// Default step `1e-5 · (1 + ‖x‖)`.
pub fn default_step(x: &ParamVector) -> f64 {
    1e-5 * (1.0 + x.norm())
}

/// `(F(x + h e_i) − F(x − h e_i)) / 2h` per coordinate.
pub fn finite_diff_grad(obj: &dyn Objective, x: &ParamVector, h: f64) -> Result<ParamVector> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidInput(format!("step h must be positive, got {h}")));
    }
    check_dim(obj.dim(), x.dim())?;
    let mut probe = x.as_slice().to_vec();
    let mut out = Vec::with_capacity(x.dim());
    for i in 0..x.dim() {
        let xi = probe[i];
        probe[i] = xi + h;
        let plus = obj.value_at(&probe);
        probe[i] = xi - h;
        let minus = obj.value_at(&probe);
        probe[i] = xi;
        let (plus, minus) = match (plus, minus) {
            (Ok(p), Ok(m)) if p.is_finite() && m.is_finite() => (p, m),
            _ => {
                return Err(Error::NonFinite {
                    context: "finite-difference evaluation (coordinate)",
                    index: i,
                })
            }
        };
        out.push((plus - minus) / (2.0 * h));
    }
    ParamVector::new(out)
}

/// `(∇F(x + h v) − ∇F(x − h v)) / 2h ≈ ∇²F(x) v`, using the analytic gradient.
pub fn hvp_fd(obj: &dyn Objective, x: &ParamVector, v: &ParamVector, h: f64) -> Result<ParamVector> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidInput(format!("step h must be positive, got {h}")));
    }
    check_dim(obj.dim(), x.dim())?;
    check_dim(obj.dim(), v.dim())?;
    if v.norm() == 0.0 {
        return Err(Error::InvalidInput("HVP direction must be nonzero".into()));
    }
    let shifted = |sign: f64| -> Result<ParamVector> {
        let p: Vec<f64> = x
            .as_slice()
            .iter()
            .zip(v.as_slice())
            .map(|(xi, vi)| xi + sign * h * vi)
            .collect();
        obj.grad(&ParamVector::new(p)?)
    };
    let gp = shifted(1.0)?;
    let gm = shifted(-1.0)?;
    ParamVector::new(
        gp.as_slice()
            .iter()
            .zip(gm.as_slice())
            .map(|(a, b)| (a - b) / (2.0 * h))
            .collect(),
    )
}

/// Hessian-vector product: analytic when the objective provides one, else
/// the finite-difference approximation with step `default_step(x)/‖v‖`.
pub fn hvp(obj: &dyn Objective, x: &ParamVector, v: &ParamVector) -> Result<ParamVector> {
    if obj.has_hvp() {
        obj.hvp(x, v)
    } else {
        let vn = v.norm();
        if vn == 0.0 {
            return Err(Error::InvalidInput("HVP direction must be nonzero".into()));
        }
        hvp_fd(obj, x, v, default_step(x) / vn)
    }
}
