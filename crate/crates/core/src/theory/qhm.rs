//! Limiting loss of mixed clipping without active clipping on the noisy
//! quadratic `F(x) = x²/2`, `g = x + ξ`, `E ξ = 0`, `E ξ² = 1`.

use rayon::prelude::*;

use crate::clipping::{run_stochastic, ClipConfig, RunOptions};
use crate::error::{Error, Result};
use crate::objectives::make_noisy_quadratic;
use crate::rng::RngStream;
use crate::vector::ParamVector;

fn check_range(eta: f64, beta: f64, nu: f64) -> Result<()> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::InvalidInput(format!("eta must lie in (0, 1), got {eta}")));
    }
    if !(0.0..1.0).contains(&beta) {
        return Err(Error::InvalidInput(format!("beta must lie in [0, 1), got {beta}")));
    }
    if !(0.0..=1.0).contains(&nu) {
        return Err(Error::InvalidInput(format!("nu must lie in [0, 1], got {nu}")));
    }
    Ok(())
}

/// `lim E[F(x_t)]` in closed form:
///
/// ```text
///  η   (1+β)(1−β+βη) − νηβ(1+3β−2νβ)
///  ─ · ───────────────────────────────────────────────────
///  2   (2−η)(1+β)(1−β+βη) − νηβ(4β−η−3βη+2νηβ)
/// ```
pub fn qhm_limit_closed_form(eta: f64, beta: f64, nu: f64) -> Result<f64> {
    check_range(eta, beta, nu)?;
    let base = (1.0 + beta) * (1.0 - beta + beta * eta);
    let nb = nu * eta * beta;
    let num = base - nb * (1.0 + 3.0 * beta - 2.0 * nu * beta);
    let den = (2.0 - eta) * base - nb * (4.0 * beta - eta - 3.0 * beta * eta + 2.0 * nu * eta * beta);
    Ok(eta / 2.0 * num / den)
}

/// Transition of `(E[x²], E[m²], E[xm], 1)` over one step, where `m` is the
/// momentum after the update with the same noise.
pub fn qhm_transition_matrix(eta: f64, beta: f64, nu: f64) -> Result<[[f64; 4]; 4]> {
    check_range(eta, beta, nu)?;
    let b1 = 1.0 - beta;
    let a = 1.0 - eta + nu * eta * beta;
    let b = nu * eta * beta;
    let k = eta - nu * eta * beta;
    Ok([
        [a * a, b * b, -2.0 * a * b, k * k],
        [b1 * b1, beta * beta, 2.0 * beta * b1, b1 * b1],
        [
            a * b1,
            -b * beta,
            beta * (1.0 - eta - nu * eta + 2.0 * nu * eta * beta),
            -k * b1,
        ],
        [0.0, 0.0, 0.0, 1.0],
    ])
}

fn apply(m: &[[f64; 4]; 4], v: &[f64; 4]) -> [f64; 4] {
    let mut out = [0.0; 4];
    for (o, row) in out.iter_mut().zip(m) {
        *o = row.iter().zip(v).map(|(a, b)| a * b).sum();
    }
    out
}

/// Exact expectation after `steps` iterations from `x0 = m0 = 0`: returns
/// `E[x_T²]/2`. Errors when the last step still moves the state by more than
/// `1e-12` relative to its largest component, i.e. the recursion has not settled.
pub fn qhm_limit_matrix_oracle(eta: f64, beta: f64, nu: f64, steps: u64) -> Result<f64> {
    qhm_limit_matrix_oracle_from(eta, beta, nu, steps, 0.0, 0.0)
}

/// [`qhm_limit_matrix_oracle`] from deterministic `x0`, `m0`.
pub fn qhm_limit_matrix_oracle_from(eta: f64, beta: f64, nu: f64, steps: u64, x0: f64, m0: f64) -> Result<f64> {
    let m = qhm_transition_matrix(eta, beta, nu)?;
    let mut v = [x0 * x0, m0 * m0, x0 * m0, 1.0];
    if steps == 0 {
        return Ok(0.5 * v[0]);
    }
    let mut drift = 0.0;
    for _ in 0..steps {
        let next = apply(&m, &v);
        let scale = next.iter().fold(0.0f64, |s, c| s.max(c.abs()));
        drift = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale;
        v = next;
        if v.iter().any(|c| !c.is_finite()) {
            break;
        }
    }
    if !(drift <= 1e-12) {
        return Err(Error::NonConvergence {
            estimate: 0.5 * v[0],
            iterations: steps as usize,
        });
    }
    Ok(0.5 * v[0])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    /// Standard error of `mean` across seeds.
    pub std_err: f64,
    pub seeds: usize,
}

/// Runs the clipping optimizer with `γ = ∞` on the noisy quadratic from
/// `x0 = 0` with independent streams `0..n_seeds` of `seed`, averages `x_t²/2`
/// over `t ∈ (burn_in, T]` within each run, then across runs.
pub fn qhm_limit_monte_carlo(
    eta: f64,
    beta: f64,
    nu: f64,
    steps: u64,
    n_seeds: usize,
    burn_in: u64,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    check_range(eta, beta, nu)?;
    if burn_in >= steps {
        return Err(Error::InvalidInput(format!("burn_in ({burn_in}) must be below T ({steps})")));
    }
    if n_seeds < 2 {
        return Err(Error::InvalidInput("need at least two seeds for a standard error".into()));
    }
    let cfg = ClipConfig::hard(eta, f64::INFINITY, beta, nu)?;
    let obj = make_noisy_quadratic();
    let opts = RunOptions {
        record_stride: u64::MAX,
        tail_window: steps - burn_in,
        initial_momentum: Some(ParamVector::zeros(1)),
        ..RunOptions::default()
    };
    let means: Vec<f64> = (0..n_seeds)
        .into_par_iter()
        .map(|s| {
            let mut rng = RngStream::new(seed, s as u64);
            run_stochastic(&obj, &cfg, &ParamVector::zeros(1), steps, &mut rng, &opts)
                .map(|t| t.summary.tail_mean_loss)
                .map_err(|f| f.error)
        })
        .collect::<Result<_>>()?;
    let n = means.len() as f64;
    let mean = means.iter().sum::<f64>() / n;
    let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(MonteCarloEstimate {
        mean,
        std_err: (var / n).sqrt(),
        seeds: n_seeds,
    })
}
