//! `clip-lab limit`: limiting expected loss of mixed clipping on the noisy
//! quadratic, by closed form, matrix recursion and (optionally) simulation.
//!
//! Output columns: `eta, beta, nu, closed_form, matrix_oracle, mc_mean,
//! mc_std_err, mc_seeds` (Monte Carlo columns empty when not requested).

use cliplab::theory::{qhm_limit_closed_form, qhm_limit_matrix_oracle, qhm_limit_monte_carlo, MonteCarloEstimate};

use crate::csvio::{fmt_f64, Table};
use crate::error::{HarnessError, Result};

pub const MATRIX_STEPS: u64 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloSpec {
    pub seeds: usize,
    pub steps: u64,
    pub burn_in: u64,
    pub seed: u64,
}

impl MonteCarloSpec {
    pub fn with_seeds(seeds: usize) -> Self {
        MonteCarloSpec {
            seeds,
            steps: 10_000,
            burn_in: 2_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitReport {
    pub closed_form: f64,
    pub matrix_oracle: f64,
    pub monte_carlo: Option<MonteCarloEstimate>,
}

fn to_config(e: cliplab::Error) -> HarnessError {
    HarnessError::config("limit", e)
}

pub fn limit(eta: f64, beta: f64, nu: f64, mc: Option<MonteCarloSpec>) -> Result<LimitReport> {
    let closed_form = qhm_limit_closed_form(eta, beta, nu).map_err(to_config)?;
    let matrix_oracle = qhm_limit_matrix_oracle(eta, beta, nu, MATRIX_STEPS)?;
    let monte_carlo = mc
        .map(|s| qhm_limit_monte_carlo(eta, beta, nu, s.steps, s.seeds, s.burn_in, s.seed).map_err(to_config))
        .transpose()?;
    Ok(LimitReport {
        closed_form,
        matrix_oracle,
        monte_carlo,
    })
}

pub fn limit_table(eta: f64, beta: f64, nu: f64, r: &LimitReport) -> Table {
    let mut t = Table::new([
        "eta",
        "beta",
        "nu",
        "closed_form",
        "matrix_oracle",
        "mc_mean",
        "mc_std_err",
        "mc_seeds",
    ]);
    let (mean, se, n) = match &r.monte_carlo {
        Some(m) => (fmt_f64(m.mean), fmt_f64(m.std_err), m.seeds.to_string()),
        None => (String::new(), String::new(), String::new()),
    };
    t.push(vec![
        fmt_f64(eta),
        fmt_f64(beta),
        fmt_f64(nu),
        fmt_f64(r.closed_form),
        fmt_f64(r.matrix_oracle),
        mean,
        se,
        n,
    ]);
    t
}
