//! Local smoothness profiling.
//!
//! Estimates `‖∇²F(x)‖` by power iteration on Hessian-vector products,
//! collects `(‖∇F‖, ‖∇²F‖)` pairs over grids or trajectories, and fits the
//! smallest uniformly inflated `(L0, L1)` envelope above them.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fd;
use crate::objectives::Objective;
use crate::rng::RngStream;
use crate::vector::{dot, ParamVector};

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITERS: usize = 20_000;

const START_SEED: u64 = 0x005e_ed0f_4e55;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LandscapeSample {
    pub grad_norm: f64,
    pub hess_norm: f64,
    /// Step index or grid index.
    pub tag: u64,
}

/// Spectral norm `max |λ|` of `∇²F(x)`.
///
/// Power iteration on `v ↦ ∇²F(x) v` tracking `‖∇²F(x) v‖` for unit `v`,
/// which converges to the largest eigenvalue magnitude even when the
/// Hessian is indefinite. Stops once successive estimates differ by less
/// than `tol` relative to the estimate. Falls back to finite-difference HVPs
/// when the objective has no analytic one.
pub fn hessian_spectral_norm(obj: &dyn Objective, x: &ParamVector, tol: f64, max_iters: usize) -> Result<f64> {
    if !(tol > 0.0) || max_iters == 0 {
        return Err(Error::InvalidInput(format!(
            "power iteration needs tol > 0 and max_iters > 0, got {tol}, {max_iters}"
        )));
    }
    let d = obj.dim();
    let mut rng = RngStream::new(START_SEED, d as u64);
    let v0 = rng.unit_direction(d);
    let first = power_iterate(obj, x, v0.clone(), tol, max_iters)?;
    if first >= tol * 10.0 || d == 1 {
        return Ok(first);
    }
    // Stagnated near zero: retry once from a direction orthogonal to the start.
    let mut w = rng.unit_direction(d);
    let proj = dot(&w, &v0);
    w.iter_mut().zip(&v0).for_each(|(wi, vi)| *wi -= proj * vi);
    let n = crate::vector::norm(&w);
    if n == 0.0 {
        return Ok(first);
    }
    w.iter_mut().for_each(|wi| *wi /= n);
    Ok(first.max(power_iterate(obj, x, w, tol, max_iters)?))
}

fn power_iterate(obj: &dyn Objective, x: &ParamVector, v: Vec<f64>, tol: f64, max_iters: usize) -> Result<f64> {
    let mut v = ParamVector::new(v)?;
    let mut prev = f64::NAN;
    for _ in 0..max_iters {
        let w = fd::hvp(obj, x, &v)?;
        let est = w.norm();
        if est == 0.0 {
            return Ok(0.0);
        }
        if (est - prev).abs() <= tol * est {
            return Ok(est);
        }
        prev = est;
        v = w.scaled(1.0 / est)?;
    }
    Err(Error::NonConvergence {
        estimate: prev,
        iterations: max_iters,
    })
}

/// One sample per point, tagged by position, in input order.
pub fn sample_landscape(obj: &dyn Objective, points: &[ParamVector]) -> Result<Vec<LandscapeSample>> {
    let tags: Vec<u64> = (0..points.len() as u64).collect();
    sample_landscape_tagged(obj, points, &tags)
}

/// [`sample_landscape`] with caller-supplied tags (e.g. step indices).
pub fn sample_landscape_tagged(obj: &dyn Objective, points: &[ParamVector], tags: &[u64]) -> Result<Vec<LandscapeSample>> {
    if points.is_empty() {
        return Err(Error::InvalidInput("no points to sample".into()));
    }
    if tags.len() != points.len() {
        return Err(Error::DimensionMismatch {
            expected: points.len(),
            found: tags.len(),
        });
    }
    points
        .par_iter()
        .zip(tags.par_iter())
        .enumerate()
        .map(|(i, (x, &tag))| {
            let sample = || -> Result<LandscapeSample> {
                let grad_norm = obj.grad(x)?.norm();
                let hess_norm = hessian_spectral_norm(obj, x, DEFAULT_TOL, DEFAULT_MAX_ITERS)?;
                Ok(LandscapeSample {
                    grad_norm,
                    hess_norm,
                    tag,
                })
            };
            sample().map_err(|e| e.at_point(i))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeFit {
    pub l0: f64,
    pub l1: f64,
    /// Samples with `hess_norm > L0 + L1·grad_norm`; zero by construction.
    pub violations: usize,
    /// Uniform multiplier applied to the least-squares fit.
    pub inflation: f64,
}

/// Fits `h ≤ L0 + L1·g` above the samples.
///
/// Samples are binned on a log-spaced `grad_norm` grid (zero gradients go to
/// the first bin). The per-bin maxima of `hess_norm` are fitted by least
/// squares with nonnegative coefficients, then both coefficients are scaled
/// by the smallest factor `s ≥ 1` that puts every sample under the line.
pub fn fit_l0_l1(samples: &[LandscapeSample], n_bins: usize) -> Result<EnvelopeFit> {
    if n_bins < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 bins, got {n_bins}")));
    }
    for (i, s) in samples.iter().enumerate() {
        if !(s.grad_norm >= 0.0 && s.grad_norm.is_finite() && s.hess_norm >= 0.0 && s.hess_norm.is_finite()) {
            return Err(Error::NonFinite {
                context: "landscape sample",
                index: i,
            });
        }
    }
    let degenerate = samples
        .windows(2)
        .all(|w| w[0].grad_norm == w[1].grad_norm && w[0].hess_norm == w[1].hess_norm);
    if degenerate {
        return Err(Error::InvalidInput("landscape samples are degenerate (all identical)".into()));
    }

    let maxima = bin_maxima(samples, n_bins);
    if maxima.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "only {} nonempty grad-norm bin(s); need at least 2",
            maxima.len()
        )));
    }
    let (mut l0, l1) = least_squares_nonneg(&maxima);

    // A zero line at a zero-gradient sample cannot be fixed by scaling.
    for s in samples {
        if l0 + l1 * s.grad_norm == 0.0 && s.hess_norm > 0.0 {
            l0 = l0.max(s.hess_norm);
        }
    }
    let mut inflation = samples
        .iter()
        .filter(|s| s.hess_norm > 0.0)
        .map(|s| s.hess_norm / (l0 + l1 * s.grad_norm))
        .fold(1.0f64, f64::max);
    let mut fit;
    loop {
        fit = EnvelopeFit {
            l0: l0 * inflation,
            l1: l1 * inflation,
            violations: 0,
            inflation,
        };
        fit.violations = count_violations(samples, fit.l0, fit.l1);
        if fit.violations == 0 {
            break;
        }
        // Rounding in the products can leave a sample an ulp above the line.
        inflation *= 1.0 + 4.0 * f64::EPSILON;
    }
    assert_eq!(fit.violations, 0, "envelope must cover its own samples");
    Ok(fit)
}

/// Samples with `hess_norm > L0 + L1·grad_norm`.
pub fn count_violations(samples: &[LandscapeSample], l0: f64, l1: f64) -> usize {
    samples
        .iter()
        .filter(|s| s.hess_norm > l0 + l1 * s.grad_norm)
        .count()
}

fn bin_maxima(samples: &[LandscapeSample], n_bins: usize) -> Vec<(f64, f64)> {
    let positive = samples.iter().map(|s| s.grad_norm).filter(|&g| g > 0.0);
    let lo = positive.clone().fold(f64::INFINITY, f64::min);
    let hi = positive.fold(0.0f64, f64::max);
    let mut best: Vec<Option<(f64, f64)>> = vec![None; n_bins];
    for s in samples {
        let bin = if s.grad_norm <= 0.0 || hi <= lo {
            0
        } else {
            let t = (s.grad_norm / lo).ln() / (hi / lo).ln();
            ((t * n_bins as f64) as usize).min(n_bins - 1)
        };
        let slot = &mut best[bin];
        if slot.is_none_or(|(_, h)| s.hess_norm > h) {
            *slot = Some((s.grad_norm, s.hess_norm));
        }
    }
    best.into_iter().flatten().collect()
}

fn least_squares_nonneg(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mg = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mh = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mg) * (p.0 - mg)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mg) * (p.1 - mh)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    if slope <= 0.0 {
        return (mh, 0.0);
    }
    let intercept = mh - slope * mg;
    if intercept >= 0.0 {
        return (intercept, slope);
    }
    // Refit through the origin.
    let gg: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let gh: f64 = points.iter().map(|p| p.0 * p.1).sum();
    (0.0, gh / gg)
}

/// Cartesian grid with `per_axis` points per coordinate over the box, first
/// coordinate varying slowest.
pub fn grid_points(lower: &[f64], upper: &[f64], per_axis: usize) -> Result<Vec<ParamVector>> {
    check_box(lower, upper)?;
    if per_axis < 2 {
        return Err(Error::InvalidInput(format!("grid needs at least 2 points per axis, got {per_axis}")));
    }
    let d = lower.len();
    let total = per_axis
        .checked_pow(d as u32)
        .ok_or_else(|| Error::InvalidInput("grid too large".into()))?;
    let step: Vec<f64> = (0..d).map(|j| (upper[j] - lower[j]) / (per_axis - 1) as f64).collect();
    (0..total)
        .map(|mut k| {
            let mut x = vec![0.0; d];
            for j in (0..d).rev() {
                x[j] = lower[j] + step[j] * (k % per_axis) as f64;
                k /= per_axis;
            }
            ParamVector::new(x)
        })
        .collect()
}

/// `n` points uniform in the box.
pub fn random_points(lower: &[f64], upper: &[f64], n: usize, rng: &mut RngStream) -> Result<Vec<ParamVector>> {
    check_box(lower, upper)?;
    (0..n)
        .map(|_| {
            ParamVector::new(
                lower
                    .iter()
                    .zip(upper)
                    .map(|(&lo, &hi)| rng.uniform_in(lo, hi))
                    .collect(),
            )
        })
        .collect()
}

pub(crate) fn check_box(lower: &[f64], upper: &[f64]) -> Result<()> {
    if lower.is_empty() || lower.len() != upper.len() {
        return Err(Error::InvalidInput(format!(
            "box bounds must be nonempty and equal length, got {} and {}",
            lower.len(),
            upper.len()
        )));
    }
    for (j, (lo, hi)) in lower.iter().zip(upper).enumerate() {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::InvalidInput(format!("box coordinate {j}: invalid bounds [{lo}, {hi}]")));
        }
    }
    Ok(())
}

/// Spearman rank correlation (average ranks for ties).
pub fn rank_correlation(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(Error::InvalidInput("rank correlation needs two equal-length series of length >= 2".into()));
    }
    let (ra, rb) = (ranks(a), ranks(b));
    let n = a.len() as f64;
    let mean = (n + 1.0) / 2.0;
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (x, y) in ra.iter().zip(&rb) {
        cov += (x - mean) * (y - mean);
        va += (x - mean) * (x - mean);
        vb += (y - mean) * (y - mean);
    }
    if va == 0.0 || vb == 0.0 {
        return Err(Error::InvalidInput("rank correlation of a constant series".into()));
    }
    Ok(cov / (va * vb).sqrt())
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = r;
        }
        i = j + 1;
    }
    out
}
