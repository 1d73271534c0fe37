//! The general clipping optimizer.
//!
//! One step maps `(x_t, m_t)` and a (stochastic) gradient `g_t` to
//!
//! ```text
//! m_{t+1} = β m_t + (1 − β) g_t
//! x_{t+1} = x_t − [ν·c(‖m_{t+1}‖)·m_{t+1} + (1 − ν)·c(‖g_t‖)·g_t]
//! ```
//!
//! where `c` is the hard factor `min(η, γ/‖·‖)` or the soft factor
//! `η / (1 + η‖·‖/γ)`. Normalized mode replaces the bracket by
//! `η·m_{t+1}/‖m_{t+1}‖`. `ν = 0` is clipped SGD, `ν = 1` momentum clipping,
//! `0 < ν < 1` mixed clipping.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objectives::Objective;
use crate::rng::RngStream;
use crate::theory::lyapunov_parts;
use crate::vector::{check_dim, check_finite, norm, ParamVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClipMode {
    Hard,
    Soft,
    Normalized,
}

impl std::fmt::Display for ClipMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ClipMode::Hard => "hard",
            ClipMode::Soft => "soft",
            ClipMode::Normalized => "normalized",
        })
    }
}

/// Hyperparameters of one optimizer run.
///
/// `gamma` may be `+∞`, which disables clipping. In normalized mode every
/// step has length exactly `eta`, `gamma` is unused and `nu` must be 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClipConfig {
    pub eta: f64,
    pub gamma: f64,
    pub beta: f64,
    pub nu: f64,
    pub mode: ClipMode,
}

impl ClipConfig {
    pub fn new(eta: f64, gamma: f64, beta: f64, nu: f64, mode: ClipMode) -> Result<Self> {
        let cfg = ClipConfig {
            eta,
            gamma,
            beta,
            nu,
            mode,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn hard(eta: f64, gamma: f64, beta: f64, nu: f64) -> Result<Self> {
        Self::new(eta, gamma, beta, nu, ClipMode::Hard)
    }

    pub fn soft(eta: f64, gamma: f64, beta: f64, nu: f64) -> Result<Self> {
        Self::new(eta, gamma, beta, nu, ClipMode::Soft)
    }

    pub fn normalized(eta: f64, beta: f64) -> Result<Self> {
        Self::new(eta, f64::INFINITY, beta, 1.0, ClipMode::Normalized)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::InvalidInput(format!("eta must be positive and finite, got {}", self.eta)));
        }
        if !(self.gamma > 0.0) {
            return Err(Error::InvalidInput(format!("gamma must be positive, got {}", self.gamma)));
        }
        if !(0.0..1.0).contains(&self.beta) {
            return Err(Error::InvalidInput(format!("beta must lie in [0, 1), got {}", self.beta)));
        }
        if !(0.0..=1.0).contains(&self.nu) {
            return Err(Error::InvalidInput(format!("nu must lie in [0, 1], got {}", self.nu)));
        }
        if self.mode == ClipMode::Normalized && self.nu != 1.0 {
            return Err(Error::InvalidInput(format!("normalized mode requires nu = 1, got {}", self.nu)));
        }
        Ok(())
    }

    /// Clipping threshold `ρ = γ/η` on the norm of the clipped vector.
    pub fn threshold(&self) -> f64 {
        self.gamma / self.eta
    }

    fn factor(&self, norm: f64) -> f64 {
        match self.mode {
            ClipMode::Hard => clip_factor_hard(self.eta, self.gamma, norm),
            ClipMode::Soft => clip_factor_soft(self.eta, self.gamma, norm),
            ClipMode::Normalized => {
                if norm == 0.0 {
                    0.0
                } else {
                    self.eta / norm
                }
            }
        }
    }
}

/// `min(η, γ/norm)`, or `η` when `norm = 0`.
pub fn clip_factor_hard(eta: f64, gamma: f64, norm: f64) -> f64 {
    if norm == 0.0 {
        eta
    } else {
        eta.min(gamma / norm)
    }
}

/// `η / (1 + η·norm/γ)`.
pub fn clip_factor_soft(eta: f64, gamma: f64, norm: f64) -> f64 {
    eta / (1.0 + eta * norm / gamma)
}

/// `β m + (1 − β) g`.
pub fn momentum_update(m: &ParamVector, g: &ParamVector, beta: f64) -> Result<ParamVector> {
    check_dim(m.dim(), g.dim())?;
    ParamVector::new(
        m.as_slice()
            .iter()
            .zip(g.as_slice())
            .map(|(mi, gi)| beta * mi + (1.0 - beta) * gi)
            .collect(),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    pub x: ParamVector,
    pub m: ParamVector,
    pub t: u64,
}

impl OptimizerState {
    pub fn new(x: ParamVector, m: ParamVector) -> Result<Self> {
        check_dim(x.dim(), m.dim())?;
        Ok(OptimizerState { x, m, t: 0 })
    }
}

/// In-place step. Writes the update vector into `update` and returns its norm.
fn step_in_place(x: &mut [f64], m: &mut [f64], g: &[f64], cfg: &ClipConfig, update: &mut [f64]) -> f64 {
    let beta = cfg.beta;
    for (mi, gi) in m.iter_mut().zip(g) {
        *mi = beta * *mi + (1.0 - beta) * gi;
    }
    match cfg.mode {
        ClipMode::Normalized => {
            let c = cfg.factor(norm(m));
            for (u, mi) in update.iter_mut().zip(m.iter()) {
                *u = c * mi;
            }
        }
        ClipMode::Hard | ClipMode::Soft => {
            let cm = cfg.factor(norm(m));
            let cg = cfg.factor(norm(g));
            let nu = cfg.nu;
            // Written as cg·g + ν(cm·m − cg·g) so that m = g gives the same
            // bits for every ν; the endpoints are evaluated directly.
            for ((u, mi), gi) in update.iter_mut().zip(m.iter()).zip(g) {
                *u = if nu == 1.0 {
                    cm * mi
                } else if nu == 0.0 {
                    cg * gi
                } else {
                    cg * gi + nu * (cm * mi - cg * gi)
                };
            }
        }
    }
    for (xi, u) in x.iter_mut().zip(update.iter()) {
        *xi -= u;
    }
    norm(update)
}

/// One optimizer step from `state` with gradient `g`.
pub fn step(state: &OptimizerState, g: &ParamVector, cfg: &ClipConfig) -> Result<OptimizerState> {
    cfg.validate()?;
    check_dim(state.x.dim(), g.dim())?;
    let mut next = state.clone();
    let mut update = vec![0.0; g.dim()];
    step_in_place(
        next.x.as_mut_slice(),
        next.m.as_mut_slice(),
        g.as_slice(),
        cfg,
        &mut update,
    );
    check_finite(next.x.as_slice(), "iterate after step")?;
    check_finite(next.m.as_slice(), "momentum after step")?;
    next.t += 1;
    Ok(next)
}

/// The update vector `x_t − x_{t+1}` that [`step`] would apply.
pub fn step_update(state: &OptimizerState, g: &ParamVector, cfg: &ClipConfig) -> Result<ParamVector> {
    cfg.validate()?;
    check_dim(state.x.dim(), g.dim())?;
    let mut x = state.x.as_slice().to_vec();
    let mut m = state.m.as_slice().to_vec();
    let mut update = vec![0.0; g.dim()];
    step_in_place(&mut x, &mut m, g.as_slice(), cfg, &mut update);
    ParamVector::new(update)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub t: u64,
    pub loss: f64,
    pub grad_norm: f64,
    pub lyapunov: f64,
    /// Norm of the update that produced this iterate (0 at `t = 0`).
    pub step_norm: f64,
    /// Full iterate, only when [`RunOptions::record_iterates`] is set.
    pub x: Option<ParamVector>,
}

/// Statistics accumulated over every step, independent of the record stride.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub steps: u64,
    /// `(1/T) Σ_{t=1}^{T} ‖∇F(x_t)‖`.
    pub mean_grad_norm: f64,
    pub min_grad_norm: f64,
    pub initial_loss: f64,
    pub initial_lyapunov: f64,
    pub final_loss: f64,
    pub final_grad_norm: f64,
    pub final_lyapunov: f64,
    /// Mean of `F(x_t)` over the last `tail_len` iterates.
    pub tail_mean_loss: f64,
    pub tail_len: u64,
    pub max_step_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub records: Vec<TrajectoryRecord>,
    pub summary: RunSummary,
    pub final_state: OptimizerState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    /// Record every `record_stride`-th iterate (the last one always).
    pub record_stride: u64,
    pub record_iterates: bool,
    /// Number of final iterates averaged into `tail_mean_loss`.
    pub tail_window: u64,
    /// Overrides the default `m_0` (the first gradient).
    pub initial_momentum: Option<ParamVector>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            record_stride: 1,
            record_iterates: false,
            tail_window: 1,
            initial_momentum: None,
        }
    }
}

/// A run that stopped early; `partial` ends at the last good state.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("run aborted at step {}: {error}", partial.final_state.t)]
pub struct RunFailure {
    pub error: Error,
    pub partial: Box<Trajectory>,
}

enum GradientSource<'a> {
    Exact,
    Stochastic(&'a mut RngStream),
}

struct Runner<'a> {
    obj: &'a dyn Objective,
    cfg: ClipConfig,
    opts: &'a RunOptions,
    steps: u64,
    records: Vec<TrajectoryRecord>,
    summary: RunSummary,
    grad_sum: f64,
    tail_sum: f64,
    tail_count: u64,
}

impl<'a> Runner<'a> {
    fn records_step(&self, t: u64) -> bool {
        t.is_multiple_of(self.opts.record_stride) || t == self.steps
    }

    fn in_tail(&self, t: u64) -> bool {
        t > 0 && t + self.opts.tail_window > self.steps
    }

    fn push(&mut self, t: u64, x: &[f64], loss: f64, grad_norm: f64, m_norm: f64, step_norm: f64) {
        self.records.push(TrajectoryRecord {
            t,
            loss,
            grad_norm,
            lyapunov: lyapunov_parts(loss, m_norm, &self.cfg),
            step_norm,
            x: self
                .opts
                .record_iterates
                .then(|| ParamVector::new(x.to_vec()).expect("finite iterate")),
        });
    }

    fn finish(mut self, state: OptimizerState, last_loss: f64, last_grad: f64) -> Trajectory {
        let t = state.t;
        self.summary.steps = t;
        self.summary.mean_grad_norm = if t > 0 { self.grad_sum / t as f64 } else { 0.0 };
        self.summary.final_loss = last_loss;
        self.summary.final_grad_norm = last_grad;
        self.summary.final_lyapunov = lyapunov_parts(last_loss, state.m.norm(), &self.cfg);
        let tail_len = self.tail_count;
        self.summary.tail_len = tail_len;
        self.summary.tail_mean_loss = if tail_len > 0 {
            self.tail_sum / tail_len as f64
        } else {
            last_loss
        };
        Trajectory {
            records: self.records,
            summary: self.summary,
            final_state: state,
        }
    }

    fn run(mut self, x0: &ParamVector, mut source: GradientSource<'_>) -> Result<Trajectory, Box<RunFailure>> {
        let d = self.obj.dim();
        let mut x = x0.as_slice().to_vec();
        let mut m = vec![0.0; d];
        let mut grad = vec![0.0; d];
        let mut sample = vec![0.0; d];
        let mut update = vec![0.0; d];
        let mut prev_x = x.clone();
        let mut prev_m = m.clone();

        let init = (|| -> Result<f64> {
            check_dim(d, x0.dim())?;
            let loss = self.obj.value(x0)?;
            self.obj.grad_into(&x, &mut grad)?;
            check_finite(&grad, "gradient")?;
            match (&self.opts.initial_momentum, &mut source) {
                (Some(m0), _) => {
                    check_dim(d, m0.dim())?;
                    m.copy_from_slice(m0.as_slice());
                }
                (None, GradientSource::Exact) => m.copy_from_slice(&grad),
                (None, GradientSource::Stochastic(rng)) => {
                    self.obj.noisy_grad_into(&x, rng, &mut sample)?;
                    check_finite(&sample, "stochastic gradient")?;
                    m.copy_from_slice(&sample);
                }
            }
            Ok(loss)
        })();
        let loss0 = match init {
            Ok(v) => v,
            Err(error) => {
                let state = OptimizerState {
                    x: x0.clone(),
                    m: ParamVector::zeros(x0.dim()),
                    t: 0,
                };
                let partial = Box::new(self.finish(state, f64::NAN, f64::NAN));
                return Err(Box::new(RunFailure { error, partial }));
            }
        };
        // A stochastic m_0 comes from the first draw, which step 0 reuses.
        let mut reuse_sample = self.opts.initial_momentum.is_none();

        let g0 = norm(&grad);
        self.summary.initial_loss = loss0;
        self.summary.initial_lyapunov = lyapunov_parts(loss0, norm(&m), &self.cfg);
        self.push(0, &x, loss0, g0, norm(&m), 0.0);

        let mut last_loss = loss0;
        let mut last_grad = g0;
        for t in 0..self.steps {
            prev_x.copy_from_slice(&x);
            prev_m.copy_from_slice(&m);
            let now = t + 1;
            let outcome = (|| -> Result<(f64, Option<f64>)> {
                let step_norm = match &mut source {
                    GradientSource::Exact => step_in_place(&mut x, &mut m, &grad, &self.cfg, &mut update),
                    GradientSource::Stochastic(rng) => {
                        if !reuse_sample {
                            self.obj.noisy_grad_into(&x, rng, &mut sample)?;
                            check_finite(&sample, "stochastic gradient")?;
                        }
                        reuse_sample = false;
                        step_in_place(&mut x, &mut m, &sample, &self.cfg, &mut update)
                    }
                };
                check_finite(&x, "iterate")?;
                check_finite(&m, "momentum")?;
                self.obj.grad_into(&x, &mut grad)?;
                check_finite(&grad, "gradient")?;
                let loss = if self.records_step(now) || self.in_tail(now) {
                    let v = self.obj.value_at(&x)?;
                    if !v.is_finite() {
                        return Err(Error::NonFinite {
                            context: "objective value",
                            index: 0,
                        });
                    }
                    Some(v)
                } else {
                    None
                };
                Ok((step_norm, loss))
            })();
            let (step_norm, loss) = match outcome {
                Ok(v) => v,
                Err(error) => {
                    let state = OptimizerState {
                        x: ParamVector::new(prev_x).expect("last good iterate is finite"),
                        m: ParamVector::new(prev_m).expect("last good momentum is finite"),
                        t,
                    };
                    let partial = Box::new(self.finish(state, last_loss, last_grad));
                    return Err(Box::new(RunFailure { error, partial }));
                }
            };
            let gn = norm(&grad);
            self.grad_sum += gn;
            self.summary.min_grad_norm = self.summary.min_grad_norm.min(gn);
            self.summary.max_step_norm = self.summary.max_step_norm.max(step_norm);
            last_grad = gn;
            if let Some(v) = loss {
                last_loss = v;
                if self.in_tail(now) {
                    self.tail_sum += v;
                    self.tail_count += 1;
                }
                if self.records_step(now) {
                    self.push(now, &x, v, gn, norm(&m), step_norm);
                }
            }
        }
        let state = OptimizerState {
            x: ParamVector::new(x).expect("finite"),
            m: ParamVector::new(m).expect("finite"),
            t: self.steps,
        };
        Ok(self.finish(state, last_loss, last_grad))
    }
}

fn runner<'a>(obj: &'a dyn Objective, cfg: &ClipConfig, steps: u64, opts: &'a RunOptions) -> Runner<'a> {
    Runner {
        obj,
        cfg: *cfg,
        opts,
        steps,
        records: Vec::new(),
        summary: RunSummary {
            steps: 0,
            mean_grad_norm: 0.0,
            min_grad_norm: f64::INFINITY,
            initial_loss: f64::NAN,
            initial_lyapunov: f64::NAN,
            final_loss: f64::NAN,
            final_grad_norm: f64::NAN,
            final_lyapunov: f64::NAN,
            tail_mean_loss: f64::NAN,
            tail_len: 0,
            max_step_norm: 0.0,
        },
        grad_sum: 0.0,
        tail_sum: 0.0,
        tail_count: 0,
    }
}

fn check_run_args(cfg: &ClipConfig, steps: u64, opts: &RunOptions) -> Result<()> {
    cfg.validate()?;
    if steps == 0 {
        return Err(Error::InvalidInput("T must be at least 1".into()));
    }
    if opts.record_stride == 0 {
        return Err(Error::InvalidInput("record stride must be at least 1".into()));
    }
    Ok(())
}

/// Runs `steps` iterations with exact gradients; `m_0 = ∇F(x_0)` unless
/// overridden.
pub fn run_deterministic(
    obj: &dyn Objective,
    cfg: &ClipConfig,
    x0: &ParamVector,
    steps: u64,
    opts: &RunOptions,
) -> Result<Trajectory, Box<RunFailure>> {
    let r = runner(obj, cfg, steps, opts);
    if let Err(e) = check_run_args(cfg, steps, opts) {
        let state = OptimizerState {
            x: x0.clone(),
            m: ParamVector::zeros(x0.dim()),
            t: 0,
        };
        return Err(Box::new(RunFailure {
            error: e,
            partial: Box::new(r.finish(state, f64::NAN, f64::NAN)),
        }));
    }
    r.run(x0, GradientSource::Exact)
}

/// Runs `steps` iterations with stochastic gradients drawn from `rng`;
/// `m_0 = ∇f(x_0, ξ_0)` unless overridden. Records carry the exact
/// gradient norm `‖∇F(x_t)‖`.
pub fn run_stochastic(
    obj: &dyn Objective,
    cfg: &ClipConfig,
    x0: &ParamVector,
    steps: u64,
    rng: &mut RngStream,
    opts: &RunOptions,
) -> Result<Trajectory, Box<RunFailure>> {
    let r = runner(obj, cfg, steps, opts);
    let pre = check_run_args(cfg, steps, opts).and_then(|_| {
        if obj.has_noisy_grad() {
            Ok(())
        } else {
            Err(obj.unsupported("stochastic gradients"))
        }
    });
    if let Err(e) = pre {
        let state = OptimizerState {
            x: x0.clone(),
            m: ParamVector::zeros(x0.dim()),
            t: 0,
        };
        return Err(Box::new(RunFailure {
            error: e,
            partial: Box::new(r.finish(state, f64::NAN, f64::NAN)),
        }));
    }
    r.run(x0, GradientSource::Stochastic(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::{make_noisy_quadratic, make_poly2d, make_quartic};
    use proptest::prelude::*;

    fn pv(v: &[f64]) -> ParamVector {
        ParamVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn hard_factor_examples() {
        assert_eq!(clip_factor_hard(1.0, 2.5, 5.0), 0.5);
        assert_eq!(clip_factor_hard(1.0, 10.0, 5.0), 1.0);
        assert_eq!(clip_factor_hard(1.0, 2.5, 0.0), 1.0);
        assert_eq!(clip_factor_hard(0.3, f64::INFINITY, 1e300), 0.3);
    }

    #[test]
    fn soft_factor_examples() {
        assert_eq!(clip_factor_soft(1.0, 1.0, 1.0), 0.5);
        assert_eq!(clip_factor_soft(0.7, 1.0, 0.0), 0.7);
        let l = 1e6;
        let s = clip_factor_soft(1.0, 1.0, l) * l;
        assert!(s < 1.0 && (s - l / (1.0 + l)).abs() < 1e-15);
    }

    #[test]
    fn momentum_examples() {
        let g = pv(&[0.3, -7.0]);
        assert_eq!(momentum_update(&pv(&[5.0, 5.0]), &g, 0.0).unwrap(), g);
        let m = momentum_update(&g, &g, 0.9).unwrap();
        for (a, b) in m.as_slice().iter().zip(g.as_slice()) {
            assert!((a - b).abs() <= 4.0 * f64::EPSILON * b.abs());
        }
        assert_eq!(momentum_update(&pv(&[2.0, 0.0]), &pv(&[0.0, 2.0]), 0.5).unwrap(), pv(&[1.0, 1.0]));
        assert!(matches!(
            momentum_update(&pv(&[1.0]), &g, 0.5),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn config_validation() {
        assert!(ClipConfig::hard(0.0, 1.0, 0.0, 0.0).is_err());
        assert!(ClipConfig::hard(1.0, 0.0, 0.0, 0.0).is_err());
        assert!(ClipConfig::hard(1.0, 1.0, 1.0, 0.0).is_err());
        assert!(ClipConfig::hard(1.0, 1.0, 0.5, 1.1).is_err());
        assert!(ClipConfig::new(1.0, 1.0, 0.5, 0.5, ClipMode::Normalized).is_err());
        assert!(ClipConfig::hard(1.0, f64::INFINITY, 0.5, 0.5).is_ok());
        assert_eq!(ClipConfig::hard(0.5, 2.0, 0.0, 0.0).unwrap().threshold(), 4.0);
    }

    #[test]
    fn step_example_is_nu_independent() {
        let state = OptimizerState::new(pv(&[0.0, 0.0]), pv(&[9.0, -1.0])).unwrap();
        for nu in [0.0, 0.3, 1.0] {
            let cfg = ClipConfig::hard(1.0, 2.5, 0.0, nu).unwrap();
            let next = step(&state, &pv(&[3.0, 4.0]), &cfg).unwrap();
            assert_eq!(next.x, pv(&[-1.5, -2.0]));
            assert_eq!(next.t, 1);
        }
    }

    #[test]
    fn sgd_branch_ignores_momentum() {
        let g = pv(&[1.0, -2.0]);
        let cfg = ClipConfig::hard(0.1, 0.5, 0.9, 0.0).unwrap();
        let a = step(&OptimizerState::new(pv(&[1.0, 1.0]), pv(&[0.0, 0.0])).unwrap(), &g, &cfg).unwrap();
        let b = step(&OptimizerState::new(pv(&[1.0, 1.0]), pv(&[50.0, 3.0])).unwrap(), &g, &cfg).unwrap();
        assert_eq!(a.x, b.x);
        assert_ne!(a.m, b.m);
    }

    #[test]
    fn normalized_zero_momentum_does_not_move() {
        let cfg = ClipConfig::normalized(0.1, 0.5).unwrap();
        let state = OptimizerState::new(pv(&[1.0]), pv(&[-1.0])).unwrap();
        let next = step(&state, &pv(&[1.0]), &cfg).unwrap();
        assert_eq!(next.x, state.x);
    }

    #[test]
    fn step_rejects_bad_gradient() {
        let state = OptimizerState::new(pv(&[1.0]), pv(&[0.0])).unwrap();
        let cfg = ClipConfig::hard(0.1, 1.0, 0.0, 0.0).unwrap();
        assert!(step(&state, &pv(&[1.0, 2.0]), &cfg).is_err());
        assert!(OptimizerState::new(pv(&[1.0]), pv(&[0.0, 0.0])).is_err());
    }

    #[test]
    fn fixed_point_at_minimum() {
        let cfg = ClipConfig::hard(0.01, 0.1, 0.9, 0.7).unwrap();
        let tr = run_deterministic(&make_poly2d(), &cfg, &pv(&[0.0, -2.0]), 50, &RunOptions::default()).unwrap();
        assert!(tr.records.iter().all(|r| r.grad_norm == 0.0 && r.loss == 0.0));
        assert_eq!(tr.final_state.x, pv(&[0.0, -2.0]));
    }

    #[test]
    fn record_counts() {
        let cfg = ClipConfig::hard(0.01, 0.1, 0.5, 0.5).unwrap();
        let obj = make_quartic();
        let tr = run_deterministic(&obj, &cfg, &pv(&[1.0]), 1, &RunOptions::default()).unwrap();
        assert_eq!(tr.records.len(), 2);
        let tr = run_deterministic(&obj, &cfg, &pv(&[1.0]), 37, &RunOptions::default()).unwrap();
        assert_eq!(tr.records.len(), 38);
        assert!(tr.records.windows(2).all(|w| w[1].t == w[0].t + 1));
        let opts = RunOptions {
            record_stride: 10,
            ..RunOptions::default()
        };
        let tr = run_deterministic(&obj, &cfg, &pv(&[1.0]), 37, &opts).unwrap();
        let ts: Vec<u64> = tr.records.iter().map(|r| r.t).collect();
        assert_eq!(ts, vec![0, 10, 20, 30, 37]);
        assert!(run_deterministic(&obj, &cfg, &pv(&[1.0]), 0, &opts).is_err());
    }

    #[test]
    fn summary_is_stride_independent() {
        let cfg = ClipConfig::soft(0.02, 0.2, 0.9, 0.7).unwrap();
        let obj = make_poly2d();
        let x0 = pv(&[0.5, 0.5]);
        let full = run_deterministic(&obj, &cfg, &x0, 500, &RunOptions::default()).unwrap();
        let sparse = run_deterministic(
            &obj,
            &cfg,
            &x0,
            500,
            &RunOptions {
                record_stride: 97,
                ..RunOptions::default()
            },
        )
        .unwrap();
        assert_eq!(full.summary, sparse.summary);
        let mean = full.records[1..].iter().map(|r| r.grad_norm).sum::<f64>() / 500.0;
        assert!((mean - full.summary.mean_grad_norm).abs() <= 1e-12 * mean);
    }

    #[test]
    fn hard_steps_bounded_along_run() {
        let cfg = ClipConfig::hard(0.1, 0.05, 0.9, 0.7).unwrap();
        let tr = run_deterministic(&make_quartic(), &cfg, &pv(&[5.0]), 200, &RunOptions::default()).unwrap();
        assert!(tr.records.iter().all(|r| r.step_norm <= cfg.gamma * (1.0 + 1e-15)));
    }

    #[test]
    fn divergence_keeps_last_good_state() {
        // No clipping and a huge step on the quartic: the iterate overflows.
        let cfg = ClipConfig::hard(1.0, f64::INFINITY, 0.0, 0.0).unwrap();
        let fail = run_deterministic(&make_quartic(), &cfg, &pv(&[10.0]), 100, &RunOptions::default()).unwrap_err();
        let last = &fail.partial.final_state;
        assert!(last.t > 0 && last.t < 100);
        assert!(last.x.as_slice()[0].is_finite());
        assert_eq!(fail.partial.records.len() as u64, last.t + 1);
    }

    #[test]
    fn stochastic_requires_capability() {
        let cfg = ClipConfig::hard(0.1, 1.0, 0.0, 0.0).unwrap();
        let mut rng = RngStream::new(1, 0);
        let e = run_stochastic(&make_quartic(), &cfg, &pv(&[1.0]), 10, &mut rng, &RunOptions::default()).unwrap_err();
        assert!(matches!(e.error, Error::Unsupported { .. }));
    }

    #[test]
    fn stochastic_is_seed_deterministic() {
        let cfg = ClipConfig::hard(0.3, 1.0, 0.9, 0.7).unwrap();
        let obj = make_noisy_quadratic();
        let run = |seed| {
            let mut rng = RngStream::new(seed, 0);
            run_stochastic(&obj, &cfg, &pv(&[1.0]), 300, &mut rng, &RunOptions::default()).unwrap()
        };
        assert_eq!(run(2020), run(2020));
        assert_ne!(run(2020), run(2021));
    }

    #[test]
    fn stochastic_first_momentum_is_first_draw() {
        let cfg = ClipConfig::hard(0.3, f64::INFINITY, 0.5, 1.0).unwrap();
        let obj = make_noisy_quadratic();
        let mut rng = RngStream::new(5, 0);
        let tr = run_stochastic(&obj, &cfg, &pv(&[1.0]), 1, &mut rng, &RunOptions::default()).unwrap();
        let mut probe = RngStream::new(5, 0);
        let g0 = obj.noisy_grad(&pv(&[1.0]), &mut probe).unwrap().as_slice()[0];
        // m_1 = β g0 + (1 − β) g0 = g0.
        assert!((tr.final_state.m.as_slice()[0] - g0).abs() < 1e-15);
        assert!((tr.final_state.x.as_slice()[0] - (1.0 - 0.3 * g0)).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn hard_step_norm_at_most_gamma(
            x in prop::collection::vec(-1e3f64..1e3, 3),
            m in prop::collection::vec(-1e3f64..1e3, 3),
            g in prop::collection::vec(-1e3f64..1e3, 3),
            eta in 1e-4f64..10.0,
            gamma in 1e-4f64..10.0,
            beta in 0.0f64..0.999,
            nu in 0.0f64..=1.0,
        ) {
            let cfg = ClipConfig::hard(eta, gamma, beta, nu).unwrap();
            let state = OptimizerState::new(pv(&x), pv(&m)).unwrap();
            let u = step_update(&state, &pv(&g), &cfg).unwrap();
            prop_assert!(u.norm() <= gamma * (1.0 + 8.0 * f64::EPSILON));
        }

        #[test]
        fn soft_sandwich(l in 0.0f64..1e9, eta in 1e-6f64..1e3, gamma in 1e-6f64..1e3) {
            let s = clip_factor_soft(eta, gamma, l) * l;
            let hard = (eta * l).min(gamma);
            prop_assert!(s <= hard * (1.0 + 4.0 * f64::EPSILON));
            prop_assert!(0.5 * hard <= s * (1.0 + 4.0 * f64::EPSILON));
        }

        #[test]
        fn normalized_step_has_length_eta(
            m in prop::collection::vec(-1e3f64..1e3, 4),
            g in prop::collection::vec(-1e3f64..1e3, 4),
            eta in 1e-4f64..10.0,
            beta in 0.0f64..0.999,
        ) {
            let cfg = ClipConfig::normalized(eta, beta).unwrap();
            let state = OptimizerState::new(ParamVector::zeros(4), pv(&m)).unwrap();
            let u = step_update(&state, &pv(&g), &cfg).unwrap();
            prop_assume!(u.norm() > 0.0);
            prop_assert!((u.norm() - eta).abs() <= 2.0 * f64::EPSILON * eta);
        }
    }
}
