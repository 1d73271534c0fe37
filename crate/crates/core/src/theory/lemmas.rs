//! Residual checks for the local smoothness inequalities.
//!
//! Each check returns `LHS − RHS` of an inequality that holds for an
//! `(L0, L1)`-smooth objective whenever `‖x⁺ − x‖ ≤ c/L1`; a residual above
//! [`ROUND_OFF_SLACK`] is a violation. Pair checks reject inadmissible pairs
//! with [`Error::Precondition`].

use rayon::prelude::*;

use super::SmoothnessConstants;
use crate::error::{Error, Result};
use crate::objectives::Objective;
use crate::profiler::{check_box, hessian_spectral_norm, DEFAULT_MAX_ITERS, DEFAULT_TOL};
use crate::rng::RngStream;
use crate::vector::{check_dim, dot, norm, ParamVector};

/// Absolute slack on every residual.
pub const ROUND_OFF_SLACK: f64 = 1e-12;

// Relative tolerance on the admissibility test, so that `x + r·u` with
// `r = c/L1` is not rejected for an ulp.
const ADMISSIBLE_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LemmaCheck {
    /// `‖∇F(x⁺)‖ ≤ e^c (cL0/L1 + ‖∇F(x)‖)`.
    GradientGrowth,
    /// `F(x⁺) ≤ F(x) + ⟨∇F(x), x⁺ − x⟩ + (AL0 + BL1‖∇F(x)‖)/2 · ‖x⁺ − x‖²`.
    DescentInequality,
    /// `‖∇F(x⁺) − ∇F(x)‖ ≤ (AL0 + BL1‖∇F(x)‖) ‖x⁺ − x‖`.
    GradLipschitzLocal,
    /// `min(‖∇F(x)‖/L1, ‖∇F(x)‖²/L0) ≤ 8 (F(x) − F*)`.
    GradNormBound,
    /// `‖∇²F(x)‖ ≤ L0 + L1‖∇F(x)‖`.
    SmoothnessDefinition,
}

impl LemmaCheck {
    pub const ALL: [LemmaCheck; 5] = [
        LemmaCheck::GradientGrowth,
        LemmaCheck::DescentInequality,
        LemmaCheck::GradLipschitzLocal,
        LemmaCheck::GradNormBound,
        LemmaCheck::SmoothnessDefinition,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LemmaCheck::GradientGrowth => "gradient_growth",
            LemmaCheck::DescentInequality => "descent_inequality",
            LemmaCheck::GradLipschitzLocal => "grad_lipschitz_local",
            LemmaCheck::GradNormBound => "grad_norm_bound",
            LemmaCheck::SmoothnessDefinition => "smoothness_definition",
        }
    }

    fn needs_pair(self) -> bool {
        matches!(
            self,
            LemmaCheck::GradientGrowth | LemmaCheck::DescentInequality | LemmaCheck::GradLipschitzLocal
        )
    }
}

impl std::fmt::Display for LemmaCheck {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// `a / b` with `a/0 = ∞` for `a > 0` and `0/0 = 0`.
fn ratio(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        if a == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        a / b
    }
}

fn displacement(x: &ParamVector, x_plus: &ParamVector, consts: &SmoothnessConstants) -> Result<Vec<f64>> {
    check_dim(x.dim(), x_plus.dim())?;
    let d: Vec<f64> = x_plus.as_slice().iter().zip(x.as_slice()).map(|(a, b)| a - b).collect();
    let r = norm(&d);
    let limit = consts.admissible_radius();
    if r > limit * (1.0 + ADMISSIBLE_RTOL) {
        return Err(Error::Precondition(format!(
            "pair is not admissible: |x+ - x| = {r:e} exceeds c/L1 = {limit:e}"
        )));
    }
    Ok(d)
}

fn gradient_growth_residual(g: f64, g_plus: f64, consts: &SmoothnessConstants) -> f64 {
    if consts.l1 == 0.0 {
        // The bound is infinite.
        return f64::NEG_INFINITY;
    }
    g_plus - consts.c.exp() * (consts.c * consts.l0 / consts.l1 + g)
}

/// Residual `‖∇F(x⁺)‖ − e^c (cL0/L1 + ‖∇F(x)‖)`.
pub fn check_gradient_growth(
    obj: &dyn Objective,
    x: &ParamVector,
    x_plus: &ParamVector,
    consts: &SmoothnessConstants,
) -> Result<f64> {
    displacement(x, x_plus, consts)?;
    Ok(gradient_growth_residual(obj.grad(x)?.norm(), obj.grad(x_plus)?.norm(), consts))
}

/// Residual `F(x⁺) − F(x) − ⟨∇F(x), d⟩ − (AL0 + BL1‖∇F(x)‖)/2 · ‖d‖²`, `d = x⁺ − x`.
pub fn check_descent_inequality(
    obj: &dyn Objective,
    x: &ParamVector,
    x_plus: &ParamVector,
    consts: &SmoothnessConstants,
) -> Result<f64> {
    let d = displacement(x, x_plus, consts)?;
    let g = obj.grad(x)?;
    Ok(descent_residual(obj.value(x)?, obj.value(x_plus)?, g.as_slice(), &d, consts))
}

fn descent_residual(f: f64, f_plus: f64, g: &[f64], d: &[f64], consts: &SmoothnessConstants) -> f64 {
    let r = norm(d);
    let k = consts.local_lipschitz(norm(g));
    (f_plus - f) - dot(g, d) - 0.5 * k * r * r
}

/// Residual `‖∇F(x⁺) − ∇F(x)‖ − (AL0 + BL1‖∇F(x)‖)‖x⁺ − x‖`.
pub fn check_grad_lipschitz_local(
    obj: &dyn Objective,
    x: &ParamVector,
    x_plus: &ParamVector,
    consts: &SmoothnessConstants,
) -> Result<f64> {
    let d = displacement(x, x_plus, consts)?;
    let g = obj.grad(x)?;
    let g_plus = obj.grad(x_plus)?;
    Ok(lipschitz_residual(g.as_slice(), g_plus.as_slice(), &d, consts))
}

fn lipschitz_residual(g: &[f64], g_plus: &[f64], d: &[f64], consts: &SmoothnessConstants) -> f64 {
    let diff: Vec<f64> = g_plus.iter().zip(g).map(|(a, b)| a - b).collect();
    norm(&diff) - consts.local_lipschitz(norm(g)) * norm(d)
}

/// Residual `min(‖∇F(x)‖/L1, ‖∇F(x)‖²/L0) − 8(F(x) − F*)` with the
/// objective's known infimum.
pub fn check_grad_norm_bound(obj: &dyn Objective, x: &ParamVector, consts: &SmoothnessConstants) -> Result<f64> {
    let f_star = obj.f_star().ok_or_else(|| obj.unsupported("a known infimum"))?;
    Ok(grad_norm_bound_residual(obj.grad(x)?.norm(), obj.value(x)?, f_star, consts))
}

/// [`check_grad_norm_bound`] from precomputed values. Passing an upper
/// estimate of `F*` can only increase the residual.
pub fn grad_norm_bound_residual(grad_norm: f64, loss: f64, f_star: f64, consts: &SmoothnessConstants) -> f64 {
    let lhs = ratio(grad_norm, consts.l1).min(ratio(grad_norm * grad_norm, consts.l0));
    lhs - 8.0 * (loss - f_star)
}

/// Residual `‖∇²F(x)‖ − (L0 + L1‖∇F(x)‖)` with the power-iteration
/// estimate of the Hessian norm.
pub fn check_smoothness_definition(obj: &dyn Objective, x: &ParamVector, consts: &SmoothnessConstants) -> Result<f64> {
    let h = hessian_spectral_norm(obj, x, DEFAULT_TOL, DEFAULT_MAX_ITERS)?;
    Ok(h - (consts.l0 + consts.l1 * obj.grad(x)?.norm()))
}

/// Upper estimate of `inf F` by gradient descent with backtracking from `x0`.
/// The returned value is attained, hence never below the true infimum.
pub fn estimate_infimum(obj: &dyn Objective, x0: &ParamVector, max_iters: usize, grad_tol: f64) -> Result<f64> {
    let mut x = x0.clone();
    let mut f = obj.value(&x)?;
    let mut step = 1.0;
    for _ in 0..max_iters {
        let g = obj.grad(&x)?;
        let gg = dot(g.as_slice(), g.as_slice());
        if gg.sqrt() <= grad_tol {
            break;
        }
        step *= 2.0;
        loop {
            let trial: Vec<f64> = x.as_slice().iter().zip(g.as_slice()).map(|(a, b)| a - step * b).collect();
            let trial = ParamVector::new(trial)?;
            match obj.value(&trial) {
                Ok(ft) if ft <= f - 0.5 * step * gg => {
                    x = trial;
                    f = ft;
                    break;
                }
                _ => {
                    step *= 0.5;
                    if step < 1e-300 {
                        return Ok(f);
                    }
                }
            }
        }
    }
    Ok(f)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaSuiteConfig {
    /// Sampling box for `x`.
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    pub checks: Vec<LemmaCheck>,
    /// Infimum to use in place of the objective's own (e.g. an estimate).
    pub f_star: Option<f64>,
    /// Step radius when `L1 = 0` makes every pair admissible.
    pub unbounded_radius: f64,
}

impl LemmaSuiteConfig {
    /// All checks over the cube `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: f64, hi: f64, samples: usize, seed: u64) -> Self {
        LemmaSuiteConfig {
            lower: vec![lo; dim],
            upper: vec![hi; dim],
            samples,
            seed,
            checks: LemmaCheck::ALL.to_vec(),
            f_star: None,
            unbounded_radius: 1.0,
        }
    }

    pub fn with_checks(mut self, checks: &[LemmaCheck]) -> Self {
        self.checks = checks.to_vec();
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub objective: String,
    pub check: LemmaCheck,
    pub samples: usize,
    pub violations: usize,
    pub max_residual: f64,
}

impl CheckReport {
    pub fn check_name(&self) -> &'static str {
        self.check.name()
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

const SHARDS: usize = 64;

#[derive(Clone, Copy)]
struct Tally {
    violations: usize,
    max_residual: f64,
}

impl Tally {
    fn new() -> Self {
        Tally {
            violations: 0,
            max_residual: f64::NEG_INFINITY,
        }
    }

    fn add(&mut self, r: f64) {
        if r > ROUND_OFF_SLACK || r.is_nan() {
            self.violations += 1;
        }
        self.max_residual = if r.is_nan() { f64::NAN } else { self.max_residual.max(r) };
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.violations += other.violations;
        self.max_residual = if self.max_residual.is_nan() || other.max_residual.is_nan() {
            f64::NAN
        } else {
            self.max_residual.max(other.max_residual)
        };
        self
    }
}

/// Runs the configured checks at `samples` random points `x` in the box,
/// each paired with `x⁺ = x + r·u` for `r ~ U(0, c/L1]` and `u` uniform on the
/// sphere. Work is split into fixed shards with independent streams, so the
/// report does not depend on the number of worker threads.
pub fn run_lemma_suite(
    obj: &dyn Objective,
    consts: &SmoothnessConstants,
    cfg: &LemmaSuiteConfig,
) -> Result<Vec<CheckReport>> {
    check_box(&cfg.lower, &cfg.upper)?;
    check_dim(obj.dim(), cfg.lower.len())?;
    if cfg.samples == 0 || cfg.checks.is_empty() {
        return Err(Error::InvalidInput("lemma suite needs at least one sample and one check".into()));
    }
    let f_star = if cfg.checks.contains(&LemmaCheck::GradNormBound) {
        Some(
            cfg.f_star
                .or_else(|| obj.f_star())
                .ok_or_else(|| obj.unsupported("a known infimum"))?,
        )
    } else {
        None
    };
    let radius = match consts.admissible_radius() {
        r if r.is_finite() => r,
        _ => cfg.unbounded_radius,
    };
    let needs_pair = cfg.checks.iter().any(|c| c.needs_pair());
    let per_shard = cfg.samples.div_ceil(SHARDS);

    let shard_tallies: Vec<Vec<Tally>> = (0..SHARDS)
        .into_par_iter()
        .map(|shard| -> Result<Vec<Tally>> {
            let start = shard * per_shard;
            let end = ((shard + 1) * per_shard).min(cfg.samples);
            let mut rng = RngStream::new(cfg.seed, shard as u64);
            let mut tallies = vec![Tally::new(); cfg.checks.len()];
            for i in start..end {
                let x: Vec<f64> = cfg
                    .lower
                    .iter()
                    .zip(&cfg.upper)
                    .map(|(&lo, &hi)| rng.uniform_in(lo, hi))
                    .collect();
                let x = ParamVector::new(x)?;
                let g = obj.grad(&x).map_err(|e| e.at_point(i))?;
                let f = obj.value(&x).map_err(|e| e.at_point(i))?;
                let pair = if needs_pair {
                    // r in (0, radius]
                    let r = radius * (1.0 - rng.uniform());
                    let u = rng.unit_direction(obj.dim());
                    let xp: Vec<f64> = x.as_slice().iter().zip(&u).map(|(a, b)| a + r * b).collect();
                    let xp = ParamVector::new(xp)?;
                    let d: Vec<f64> = xp.as_slice().iter().zip(x.as_slice()).map(|(a, b)| a - b).collect();
                    let gp = obj.grad(&xp).map_err(|e| e.at_point(i))?;
                    Some((xp, d, gp))
                } else {
                    None
                };
                for (k, check) in cfg.checks.iter().enumerate() {
                    let residual = match check {
                        LemmaCheck::GradientGrowth => {
                            let (_, _, gp) = pair.as_ref().expect("pair sampled");
                            gradient_growth_residual(g.norm(), gp.norm(), consts)
                        }
                        LemmaCheck::DescentInequality => {
                            let (xp, d, _) = pair.as_ref().expect("pair sampled");
                            let fp = obj.value(xp).map_err(|e| e.at_point(i))?;
                            descent_residual(f, fp, g.as_slice(), d, consts)
                        }
                        LemmaCheck::GradLipschitzLocal => {
                            let (_, d, gp) = pair.as_ref().expect("pair sampled");
                            lipschitz_residual(g.as_slice(), gp.as_slice(), d, consts)
                        }
                        LemmaCheck::GradNormBound => {
                            grad_norm_bound_residual(g.norm(), f, f_star.expect("checked above"), consts)
                        }
                        LemmaCheck::SmoothnessDefinition => {
                            check_smoothness_definition(obj, &x, consts).map_err(|e| e.at_point(i))?
                        }
                    };
                    tallies[k].add(residual);
                }
            }
            Ok(tallies)
        })
        .collect::<Result<_>>()?;

    Ok(cfg
        .checks
        .iter()
        .enumerate()
        .map(|(k, &check)| {
            let t = shard_tallies.iter().fold(Tally::new(), |acc, s| acc.merge(s[k]));
            CheckReport {
                objective: obj.name().to_string(),
                check,
                samples: cfg.samples,
                violations: t.violations,
                max_residual: t.max_residual,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::{make_noisy_quadratic, make_poly2d, make_quartic};

    fn pv(v: &[f64]) -> ParamVector {
        ParamVector::new(v.to_vec()).unwrap()
    }

    fn quartic_consts() -> SmoothnessConstants {
        SmoothnessConstants::with_default_radius(16.0, 1.0).unwrap()
    }

    #[test]
    fn identical_points() {
        let obj = make_quartic();
        let c = quartic_consts();
        let x = pv(&[1.5]);
        assert_eq!(check_descent_inequality(&obj, &x, &x, &c).unwrap(), 0.0);
        assert_eq!(check_grad_lipschitz_local(&obj, &x, &x, &c).unwrap(), 0.0);
        let g: f64 = 4.0 * 1.5f64.powi(3);
        let expected = g * (1.0 - 0.1f64.exp()) - 0.1f64.exp() * 0.1 * 16.0;
        let r = check_gradient_growth(&obj, &x, &x, &c).unwrap();
        assert!((r - expected).abs() < 1e-12 && r < 0.0);
    }

    #[test]
    fn grad_norm_bound_at_minimum() {
        let obj = make_poly2d();
        let c = SmoothnessConstants::with_default_radius(162.0, 10.0).unwrap();
        // u = y − 3x + 2 = 0 and x = 0.
        assert_eq!(check_grad_norm_bound(&obj, &pv(&[0.0, -2.0]), &c).unwrap(), 0.0);
    }

    #[test]
    fn inadmissible_pair_is_rejected() {
        let obj = make_quartic();
        let c = quartic_consts();
        let e = check_descent_inequality(&obj, &pv(&[0.0]), &pv(&[0.2]), &c).unwrap_err();
        assert!(matches!(e, Error::Precondition(_)));
        assert!(check_descent_inequality(&obj, &pv(&[0.0]), &pv(&[0.1]), &c).is_ok());
    }

    #[test]
    fn missing_infimum_is_a_capability_error() {
        struct NoInf;
        impl Objective for NoInf {
            fn name(&self) -> &str {
                "no-inf"
            }
            fn dim(&self) -> usize {
                1
            }
            fn value_at(&self, x: &[f64]) -> Result<f64> {
                Ok(x[0])
            }
            fn grad_into(&self, _x: &[f64], out: &mut [f64]) -> Result<()> {
                out[0] = 1.0;
                Ok(())
            }
        }
        let c = quartic_consts();
        let e = check_grad_norm_bound(&NoInf, &pv(&[0.0]), &c).unwrap_err();
        assert!(matches!(e, Error::Unsupported { .. }));
    }

    #[test]
    fn quartic_suite_is_clean() {
        let cfg = LemmaSuiteConfig::cube(1, -10.0, 10.0, 2000, 1);
        for r in run_lemma_suite(&make_quartic(), &quartic_consts(), &cfg).unwrap() {
            assert!(r.passed(), "{r:?}");
        }
    }

    #[test]
    fn halved_constants_are_caught() {
        let cfg = LemmaSuiteConfig::cube(1, -10.0, 10.0, 2000, 1);
        let bad = quartic_consts().scaled(0.5).unwrap();
        let reports = run_lemma_suite(&make_quartic(), &bad, &cfg).unwrap();
        assert!(reports.iter().any(|r| r.violations > 0), "{reports:?}");
    }

    #[test]
    fn suite_is_reproducible() {
        let cfg = LemmaSuiteConfig::cube(2, -3.0, 3.0, 500, 9);
        let c = SmoothnessConstants::with_default_radius(162.0, 10.0).unwrap();
        let a = run_lemma_suite(&make_poly2d(), &c, &cfg).unwrap();
        let b = run_lemma_suite(&make_poly2d(), &c, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn unbounded_radius_for_smooth_objectives() {
        let cfg = LemmaSuiteConfig::cube(1, -5.0, 5.0, 500, 3);
        let c = SmoothnessConstants::with_default_radius(1.0, 0.0).unwrap();
        for r in run_lemma_suite(&make_noisy_quadratic(), &c, &cfg).unwrap() {
            assert!(r.passed(), "{r:?}");
        }
    }

    #[test]
    fn infimum_estimate_is_attained() {
        let obj = make_poly2d();
        let f = estimate_infimum(&obj, &pv(&[1.0, 1.0]), 10_000, 1e-10).unwrap();
        assert!((0.0..1e-3).contains(&f), "{f}");
    }
}
