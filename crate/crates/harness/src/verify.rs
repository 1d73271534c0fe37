//! `clip-lab verify`: the invariant suites as a report CSV.
//!
//! Every row carries `max_residual = measured − tolerance`, so a row is a
//! violation exactly when its residual is positive.

use std::str::FromStr;

use cliplab::clipping::{clip_factor_hard, clip_factor_soft, step_update, ClipConfig, OptimizerState};
use cliplab::objectives::{
    exp_loss_constants, gen_synthetic_dataset, make_exp_loss, make_noisy_quadratic, make_poly2d, make_quartic,
    ExpLoss, Objective,
};
use cliplab::profiler::{fit_l0_l1, random_points, sample_landscape, LandscapeSample};
use cliplab::theory::{
    estimate_infimum, qhm_limit_closed_form, qhm_limit_matrix_oracle, qhm_limit_monte_carlo, run_lemma_suite,
    LemmaSuiteConfig, SmoothnessConstants, ROUND_OFF_SLACK,
};
use cliplab::{ParamVector, RngStream};

use crate::csvio::{fmt_f64, Table};
use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Lemmas,
    Oracles,
    Equivalences,
    Envelope,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 5] = ["lemmas", "oracles", "equivalences", "envelope", "all"];

    fn parts(self) -> Vec<Suite> {
        match self {
            Suite::All => vec![Suite::Lemmas, Suite::Oracles, Suite::Equivalences, Suite::Envelope],
            s => vec![s],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Suite::Lemmas => "lemmas",
            Suite::Oracles => "oracles",
            Suite::Equivalences => "equivalences",
            Suite::Envelope => "envelope",
            Suite::All => "all",
        }
    }
}

impl FromStr for Suite {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "lemmas" => Suite::Lemmas,
            "oracles" => Suite::Oracles,
            "equivalences" => Suite::Equivalences,
            "envelope" => Suite::Envelope,
            "all" => Suite::All,
            _ => {
                return Err(HarnessError::config(
                    "suite",
                    format!("unknown suite {s:?} (expected one of {})", Suite::NAMES.join(", ")),
                ))
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    /// Multiplies every `(L0, L1)` pair before checking; values below 1 are
    /// a mutation test of the checkers.
    pub scale_constants: f64,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            scale_constants: 1.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub suite: &'static str,
    pub objective: String,
    pub check: String,
    pub samples: usize,
    pub violations: usize,
    pub max_residual: f64,
}

pub const REPORT_HEADER: [&str; 6] = ["suite", "objective", "check_name", "samples", "violations", "max_residual"];

pub fn report_table(rows: &[ReportRow]) -> Table {
    let mut t = Table::new(REPORT_HEADER);
    for r in rows {
        t.push(vec![
            r.suite.to_string(),
            r.objective.clone(),
            r.check.clone(),
            r.samples.to_string(),
            r.violations.to_string(),
            fmt_f64(r.max_residual),
        ]);
    }
    t
}

pub fn total_violations(rows: &[ReportRow]) -> usize {
    rows.iter().map(|r| r.violations).sum()
}

/// Collects `measured − tolerance` residuals into one row.
struct Tally {
    samples: usize,
    violations: usize,
    max_residual: f64,
}

impl Tally {
    fn new() -> Self {
        Tally {
            samples: 0,
            violations: 0,
            max_residual: f64::NEG_INFINITY,
        }
    }

    fn add(&mut self, residual: f64) {
        self.samples += 1;
        if !(residual <= 0.0) {
            self.violations += 1;
        }
        self.max_residual = if residual.is_nan() || self.max_residual.is_nan() {
            f64::NAN
        } else {
            self.max_residual.max(residual)
        };
    }

    fn row(self, suite: &'static str, objective: &str, check: &str) -> ReportRow {
        ReportRow {
            suite,
            objective: objective.to_string(),
            check: check.to_string(),
            samples: self.samples,
            violations: self.violations,
            max_residual: self.max_residual,
        }
    }
}

/// The small synthetic classification problem used by the suites.
pub fn reference_exp_loss() -> Result<ExpLoss> {
    let data = gen_synthetic_dataset(100, 2, 1.0, 1.0, &mut RngStream::new(42, 0))?;
    Ok(make_exp_loss(data, 0.5)?)
}

fn reference_exp_loss_constants() -> Result<SmoothnessConstants> {
    Ok(exp_loss_constants(1.0, 2, 0.5, 100, 0.5, 0.5)?)
}

fn certified(obj: &dyn Objective, scale: f64) -> Result<SmoothnessConstants> {
    let (l0, l1) = obj.certified_constants().expect("objective has certified constants");
    Ok(SmoothnessConstants::with_default_radius(l0, l1)?.scaled(scale)?)
}

fn lemma_rows(opts: &VerifyOptions) -> Result<Vec<ReportRow>> {
    let mut rows = Vec::new();
    let mut push = |reports: Vec<cliplab::theory::CheckReport>| {
        rows.extend(reports.into_iter().map(|r| ReportRow {
            suite: "lemmas",
            check: r.check_name().to_string(),
            objective: r.objective,
            samples: r.samples,
            violations: r.violations,
            max_residual: r.max_residual,
        }))
    };
    let quartic = make_quartic();
    push(run_lemma_suite(
        &quartic,
        &certified(&quartic, opts.scale_constants)?,
        &LemmaSuiteConfig::cube(1, -10.0, 10.0, 10_000, opts.seed),
    )?);
    let poly = make_poly2d();
    push(run_lemma_suite(
        &poly,
        &certified(&poly, opts.scale_constants)?,
        &LemmaSuiteConfig::cube(2, -3.0, 3.0, 10_000, opts.seed),
    )?);
    let exp = reference_exp_loss()?;
    let mut cfg = LemmaSuiteConfig::cube(2, -5.0, 5.0, 1_000, opts.seed);
    cfg.f_star = Some(estimate_infimum(&exp, &ParamVector::zeros(2), 10_000, 1e-12)?);
    push(run_lemma_suite(
        &exp,
        &reference_exp_loss_constants()?.scaled(opts.scale_constants)?,
        &cfg,
    )?);
    Ok(rows)
}

/// `(η, β, ν)` points of the limiting-loss triangle check.
pub const ORACLE_POINTS: [(f64, f64, f64); 3] = [(0.5, 0.0, 0.0), (0.5, 0.5, 1.0), (0.3, 0.9, 0.7)];

fn oracle_rows(opts: &VerifyOptions) -> Result<Vec<ReportRow>> {
    let mut rows = Vec::new();
    for &(eta, beta, nu) in &ORACLE_POINTS {
        let tag = format!("noisy_quadratic(eta={eta},beta={beta},nu={nu})");
        let cf = qhm_limit_closed_form(eta, beta, nu)?;
        let mut t = Tally::new();
        t.add((cf - qhm_limit_matrix_oracle(eta, beta, nu, 100_000)?).abs() - 1e-10);
        rows.push(t.row("oracles", &tag, "closed_form_vs_matrix"));
        let mc = qhm_limit_monte_carlo(eta, beta, nu, 10_000, 32, 2_000, opts.seed)?;
        let mut t = Tally::new();
        t.add((mc.mean - cf).abs() - 3.0 * mc.std_err);
        rows.push(t.row("oracles", &tag, "monte_carlo_within_3se"));
    }
    let mut t = Tally::new();
    t.add((qhm_limit_closed_form(0.5, 0.0, 0.0)? - 1.0 / 6.0).abs() - 1e-12);
    for i in 1..=9 {
        let eta = i as f64 * 0.1;
        t.add((qhm_limit_closed_form(eta, 0.0, 0.0)? - eta / (4.0 - 2.0 * eta)).abs() - 1e-12);
    }
    rows.push(t.row("oracles", "noisy_quadratic", "sgd_special_case"));
    Ok(rows)
}

fn ulps(a: f64, b: f64) -> u64 {
    let key = |x: f64| {
        let i = x.to_bits() as i64;
        if i < 0 {
            i64::MIN - i
        } else {
            i
        }
    };
    key(a).abs_diff(key(b))
}

fn max_ulps(a: &ParamVector, b: &[f64]) -> u64 {
    a.as_slice().iter().zip(b).map(|(x, y)| ulps(*x, *y)).max().unwrap_or(0)
}

fn plain_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

const ULP_TOLERANCE: f64 = 4.0;

struct StepCase {
    state: OptimizerState,
    g: Vec<f64>,
    eta: f64,
    gamma: f64,
    beta: f64,
    nu: f64,
}

fn step_cases(seed: u64, stream: u64, n: usize) -> Result<Vec<StepCase>> {
    let mut rng = RngStream::new(seed, stream);
    (0..n)
        .map(|_| {
            let d = 1 + rng.below(6);
            let scale = 10f64.powf(rng.uniform_in(-3.0, 3.0));
            let mut draw = || ParamVector::new((0..d).map(|_| scale * rng.standard_normal()).collect());
            let x = draw()?;
            let m = draw()?;
            let g = draw()?.into_inner();
            Ok(StepCase {
                state: OptimizerState::new(x, m)?,
                g,
                eta: 10f64.powf(rng.uniform_in(-4.0, 0.0)),
                gamma: 10f64.powf(rng.uniform_in(-3.0, 1.0)),
                beta: rng.uniform_in(0.0, 0.99),
                nu: rng.uniform(),
            })
        })
        .collect()
}

fn equivalence_rows(opts: &VerifyOptions) -> Result<Vec<ReportRow>> {
    const N: usize = 1_000;
    let mut rows = Vec::new();
    let upd = |c: &StepCase, cfg: ClipConfig| -> Result<ParamVector> {
        Ok(step_update(&c.state, &ParamVector::new(c.g.clone())?, &cfg)?)
    };

    let mut t = Tally::new();
    for c in step_cases(opts.seed, 1, N)? {
        let base = upd(&c, ClipConfig::hard(c.eta, c.gamma, 0.0, 0.0)?)?;
        let mixed = upd(&c, ClipConfig::hard(c.eta, c.gamma, 0.0, c.nu)?)?;
        t.add(max_ulps(&mixed, base.as_slice()) as f64 - ULP_TOLERANCE);
    }
    rows.push(t.row("equivalences", "random_steps", "no_momentum_nu_independent"));

    let mut t = Tally::new();
    for c in step_cases(opts.seed, 2, N)? {
        let u = upd(&c, ClipConfig::hard(c.eta, c.gamma, c.beta, 0.0)?)?;
        let f = c.eta.min(c.gamma / plain_norm(&c.g));
        let reference: Vec<f64> = c.g.iter().map(|g| f * g).collect();
        t.add(max_ulps(&u, &reference) as f64 - ULP_TOLERANCE);
    }
    rows.push(t.row("equivalences", "random_steps", "nu_zero_is_clipped_sgd"));

    let mut t = Tally::new();
    for c in step_cases(opts.seed, 3, N)? {
        let u = upd(&c, ClipConfig::hard(c.eta, c.gamma, c.beta, 1.0)?)?;
        let m: Vec<f64> = c.state.m.as_slice().iter().zip(&c.g).map(|(m, g)| c.beta * m + (1.0 - c.beta) * g).collect();
        let f = c.eta.min(c.gamma / plain_norm(&m));
        let reference: Vec<f64> = m.iter().map(|v| f * v).collect();
        t.add(max_ulps(&u, &reference) as f64 - ULP_TOLERANCE);
    }
    rows.push(t.row("equivalences", "random_steps", "nu_one_is_momentum_clipping"));

    let mut t = Tally::new();
    for c in step_cases(opts.seed, 4, N)? {
        let u = upd(&c, ClipConfig::normalized(c.eta, c.beta)?)?;
        t.add(ulps(plain_norm(u.as_slice()), c.eta) as f64 - ULP_TOLERANCE);
    }
    rows.push(t.row("equivalences", "random_steps", "normalized_step_length"));

    rows.push(sandwich_tally().row("equivalences", "clip_factors", "hard_soft_sandwich"));
    Ok(rows)
}

/// `½·min(ηl, γ) ≤ soft(l)·l ≤ min(ηl, γ)` on a log grid of norms, as a
/// relative residual.
fn sandwich_tally() -> Tally {
    let pairs: [(f64, f64); 10] = [
        (1e-4, 1e-3),
        (1e-3, 1e-1),
        (1e-2, 1.0),
        (1e-2, 1e2),
        (0.1, 0.1),
        (0.1, 10.0),
        (0.5, 1e-6),
        (1.0, 1.0),
        (1.0, 1e4),
        (10.0, 0.5),
    ];
    let mut t = Tally::new();
    for &(eta, gamma) in &pairs {
        for i in 0..1000 {
            let l = 10f64.powf(-9.0 + 18.0 * i as f64 / 999.0);
            let upper = (eta * l).min(gamma);
            let soft = clip_factor_soft(eta, gamma, l) * l;
            let hard = clip_factor_hard(eta, gamma, l) * l;
            let r = ((0.5 * upper - soft) / upper)
                .max((soft - upper) / upper)
                .max((hard - upper).abs() / upper);
            t.add(r - ROUND_OFF_SLACK);
        }
    }
    t
}

fn envelope_tally(samples: &[LandscapeSample], c: &SmoothnessConstants) -> Tally {
    let mut t = Tally::new();
    for s in samples {
        let bound = c.l0 + c.l1 * s.grad_norm;
        t.add((s.hess_norm - bound) / bound.max(1.0));
    }
    t
}

fn envelope_rows(opts: &VerifyOptions) -> Result<Vec<ReportRow>> {
    let mut rows = Vec::new();
    let quartic = make_quartic();
    let poly = make_poly2d();
    let quad = make_noisy_quadratic();
    let exp = reference_exp_loss()?;
    let cases: [(&dyn Objective, SmoothnessConstants, f64, usize); 4] = [
        (&quartic, certified(&quartic, opts.scale_constants)?, 10.0, 1_000),
        (&poly, certified(&poly, opts.scale_constants)?, 3.0, 1_000),
        (&quad, certified(&quad, opts.scale_constants)?, 10.0, 100),
        (&exp, reference_exp_loss_constants()?.scaled(opts.scale_constants)?, 5.0, 200),
    ];
    for (k, (obj, c, half, n)) in cases.into_iter().enumerate() {
        let d = obj.dim();
        let mut rng = RngStream::new(opts.seed, 100 + k as u64);
        let pts = random_points(&vec![-half; d], &vec![half; d], n, &mut rng)?;
        let samples = sample_landscape(obj, &pts)?;
        rows.push(envelope_tally(&samples, &c).row("envelope", obj.name(), "certified_envelope"));
        if c.l1 > 0.0 {
            let fit = fit_l0_l1(&samples, 20)?;
            let fitted = SmoothnessConstants::with_default_radius(fit.l0, fit.l1)?;
            rows.push(envelope_tally(&samples, &fitted).row("envelope", obj.name(), "fitted_envelope_covers"));
        }
    }
    Ok(rows)
}

pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> Result<Vec<ReportRow>> {
    if !(opts.scale_constants > 0.0 && opts.scale_constants.is_finite()) {
        return Err(HarnessError::config("--scale-constants", "must be positive and finite"));
    }
    let mut rows = Vec::new();
    for part in suite.parts() {
        rows.extend(match part {
            Suite::Lemmas => lemma_rows(opts)?,
            Suite::Oracles => oracle_rows(opts)?,
            Suite::Equivalences => equivalence_rows(opts)?,
            Suite::Envelope => envelope_rows(opts)?,
            Suite::All => unreachable!(),
        });
    }
    Ok(rows)
}
