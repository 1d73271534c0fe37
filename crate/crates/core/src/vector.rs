use std::ops::Index;

use crate::error::{Error, Result};

/// Dense vector of optimization variables.
///
/// Entries are always finite; the dimension is fixed at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector(Vec<f64>);

impl ParamVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        check_finite(&values, "parameter vector")?;
        Ok(ParamVector(values))
    }

    pub fn zeros(dim: usize) -> Self {
        ParamVector(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        ParamVector::new(self.0.iter().map(|v| c * v).collect())
    }

    /// Mutable access for in-place kernels. Callers must restore finiteness
    /// before the vector leaves their scope.
    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl Index<usize> for ParamVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl AsRef<[f64]> for ParamVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for ParamVector {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        ParamVector::new(values)
    }
}

/// Euclidean norm, rejecting non-finite input.
pub fn l2_norm(values: &[f64]) -> Result<f64> {
    check_finite(values, "l2_norm input")?;
    Ok(norm(values))
}

/// Euclidean norm without validation. Rescales by a power of two when the
/// squares would overflow or underflow, so the result is unaffected.
pub(crate) fn norm(values: &[f64]) -> f64 {
    let big = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if big == 0.0 || !big.is_finite() || values.len() == 1 {
        return big;
    }
    if (1e-150..=1e150).contains(&big) {
        return values.iter().map(|v| v * v).sum::<f64>().sqrt();
    }
    let scale = 2f64.powi(big.log2().floor() as i32);
    let sum: f64 = values
        .iter()
        .map(|v| {
            let r = v / scale;
            r * r
        })
        .sum();
    scale * sum.sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn check_finite(values: &[f64], context: &'static str) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite { context, index }),
        None => Ok(()),
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn norm_examples() {
        assert_eq!(l2_norm(&[3.0, 4.0]).unwrap(), 5.0);
        assert_eq!(l2_norm(&[0.0, 0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(l2_norm(&[1.0, 1.0, 1.0, 1.0]).unwrap(), 2.0);
    }

    #[test]
    fn norm_rejects_non_finite() {
        assert_eq!(
            l2_norm(&[1.0, f64::NAN]),
            Err(Error::NonFinite {
                context: "l2_norm input",
                index: 1
            })
        );
        assert!(ParamVector::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn norm_survives_extreme_magnitudes() {
        assert!((norm(&[3e200, 4e200]) / 5e200 - 1.0).abs() < 4.0 * f64::EPSILON);
        assert!((norm(&[3e-200, 4e-200]) / 5e-200 - 1.0).abs() < 4.0 * f64::EPSILON);
        assert_eq!(norm(&[3.0 * 2f64.powi(600), 4.0 * 2f64.powi(600)]), 5.0 * 2f64.powi(600));
    }

    fn ulp(x: f64) -> f64 {
        let x = x.abs();
        f64::from_bits(x.to_bits() + 1) - x
    }

    proptest! {
        #[test]
        fn norm_is_absolutely_homogeneous(
            v in prop::collection::vec(-1e3f64..1e3, 1..8),
            c in -1e3f64..1e3,
        ) {
            let scaled: Vec<f64> = v.iter().map(|x| c * x).collect();
            let lhs = norm(&scaled);
            let rhs = c.abs() * norm(&v);
            prop_assert!((lhs - rhs).abs() <= 2.0 * ulp(rhs.max(lhs)) + f64::MIN_POSITIVE,
                "lhs={lhs} rhs={rhs}");
        }
    }
}
