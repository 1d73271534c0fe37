//! Step-size rules and iteration budgets.

use super::SmoothnessConstants;
use crate::error::{Error, Result};

/// `A = B = 1.06` in the deterministic rule (radius `c = 1/10`).
pub const THEOREM31_AB: f64 = 1.06;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetInputs {
    /// `Δ = F(x₀) − F*`.
    pub delta: f64,
    /// Target stationarity `ε`.
    pub epsilon: f64,
    /// Almost-sure gradient-noise bound `σ`.
    pub sigma: f64,
}

impl BudgetInputs {
    pub fn new(delta: f64, epsilon: f64, sigma: f64) -> Result<Self> {
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(Error::InvalidInput(format!("delta must be finite and >= 0, got {delta}")));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidInput(format!("epsilon must be positive, got {epsilon}")));
        }
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidInput(format!("sigma must be finite and >= 0, got {sigma}")));
        }
        Ok(BudgetInputs { delta, epsilon, sigma })
    }

    pub fn deterministic(delta: f64, epsilon: f64) -> Result<Self> {
        Self::new(delta, epsilon, 0.0)
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if (0.0..1.0).contains(&beta) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("beta must lie in [0, 1), got {beta}")))
    }
}

fn ceil_steps(t: f64) -> Result<u64> {
    if !t.is_finite() || t > u64::MAX as f64 {
        return Err(Error::Precondition(format!("iteration budget {t:e} is not representable")));
    }
    Ok((t.ceil() as u64).max(1))
}

/// Largest `(η, γ)` allowed by the deterministic rule:
/// `γ = (1−β)/(10·B·L1)`, `η = (1−β)/(10·A·L0)` with `A = B = 1.06`.
/// A zero `L1` yields `γ = ∞` (no clipping needed).
pub fn theorem31_step_sizes(consts: &SmoothnessConstants, beta: f64) -> Result<(f64, f64)> {
    check_beta(beta)?;
    if !(consts.l0 > 0.0) {
        return Err(Error::Precondition("L0 must be positive".into()));
    }
    let eta = (1.0 - beta) / (10.0 * THEOREM31_AB * consts.l0);
    let gamma = if consts.l1 == 0.0 {
        f64::INFINITY
    } else {
        (1.0 - beta) / (10.0 * THEOREM31_AB * consts.l1)
    };
    Ok((eta, gamma))
}

/// Errors naming the violated bound when `(η, γ)` exceed the deterministic rule.
pub fn check_theorem31_step_sizes(consts: &SmoothnessConstants, beta: f64, eta: f64, gamma: f64) -> Result<()> {
    let (eta_max, gamma_max) = theorem31_step_sizes(consts, beta)?;
    if eta > eta_max {
        return Err(Error::Precondition(format!(
            "eta = {eta} exceeds (1-beta)/(10 A L0) = {eta_max}"
        )));
    }
    if gamma > gamma_max {
        return Err(Error::Precondition(format!(
            "gamma = {gamma} exceeds (1-beta)/(10 B L1) = {gamma_max}"
        )));
    }
    Ok(())
}

/// `T = ⌈3Δ·max{1/(ε²η), 25η/γ²}⌉`, requiring `ε < γ/(5η)`.
pub fn theorem31_budget(inputs: &BudgetInputs, eta: f64, gamma: f64) -> Result<u64> {
    if !(eta > 0.0 && eta.is_finite()) || !(gamma > 0.0) {
        return Err(Error::InvalidInput(format!(
            "eta and gamma must be positive, got eta={eta}, gamma={gamma}"
        )));
    }
    let eps = inputs.epsilon;
    if !(eps < gamma / (5.0 * eta)) {
        return Err(Error::Precondition(format!(
            "epsilon = {eps} must be below gamma/(5 eta) = {}",
            gamma / (5.0 * eta)
        )));
    }
    let rate = (1.0 / (eps * eps * eta)).max(25.0 * eta / (gamma * gamma));
    ceil_steps(3.0 * inputs.delta * rate)
}

/// Which `A = B` constant the stochastic rule uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Theorem32Constants {
    /// `A = B = 1.01`, as stated with the theorem.
    #[default]
    Stated,
    /// `A = B = 1.002` (radius `c = 1/500`), the tighter value from the proof.
    Tight,
}

impl Theorem32Constants {
    pub fn value(self) -> f64 {
        match self {
            Theorem32Constants::Stated => 1.01,
            Theorem32Constants::Tight => 1.002,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Theorem32Params {
    pub eta: f64,
    pub gamma: f64,
    pub steps: u64,
}

/// Stochastic rule: `γ = ε/(2σ)·min{ε/(A L0), (1−β)/(A L0), (1−β)/(25 B L1)}`,
/// `η = γ/(5σ)`, `T = ⌈3Δ/(ε²η)⌉`. Requires `ε ≤ 0.1` and `σ ≥ 1`.
pub fn theorem32_params(
    inputs: &BudgetInputs,
    beta: f64,
    consts: &SmoothnessConstants,
    which: Theorem32Constants,
) -> Result<Theorem32Params> {
    check_beta(beta)?;
    let (eps, sigma) = (inputs.epsilon, inputs.sigma);
    if eps > 0.1 {
        return Err(Error::Precondition(format!("epsilon = {eps} violates epsilon <= 0.1")));
    }
    if sigma < 1.0 {
        return Err(Error::Precondition(format!("sigma = {sigma} violates sigma >= 1")));
    }
    if !(consts.l0 > 0.0) {
        return Err(Error::Precondition("L0 must be positive".into()));
    }
    let ab = which.value();
    let smoothness_term = if consts.l1 == 0.0 {
        f64::INFINITY
    } else {
        (1.0 - beta) / (25.0 * ab * consts.l1)
    };
    let inner = (eps / (ab * consts.l0))
        .min((1.0 - beta) / (ab * consts.l0))
        .min(smoothness_term);
    let gamma = eps / (2.0 * sigma) * inner;
    let eta = gamma / (5.0 * sigma);
    let steps = ceil_steps(3.0 * inputs.delta / (eps * eps * eta))?;
    Ok(Theorem32Params { eta, gamma, steps })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnmParams {
    pub eta: f64,
    /// `α = 1 − β`.
    pub alpha: f64,
    pub beta: f64,
    pub steps: u64,
}

/// Normalized-momentum schedule with unit order constants:
/// `α = ε²/σ²`, `η = min(1/L1, ε/L0)·α`, `T = ⌈Δ/(ηε)⌉`. Requires
/// `ε ≤ min(L0/L1, σ)`.
pub fn snm_params(inputs: &BudgetInputs, consts: &SmoothnessConstants) -> Result<SnmParams> {
    let (eps, sigma) = (inputs.epsilon, inputs.sigma);
    if !(sigma > 0.0) {
        return Err(Error::Precondition("sigma must be positive".into()));
    }
    if !(consts.l0 > 0.0) {
        return Err(Error::Precondition("L0 must be positive".into()));
    }
    let ratio = if consts.l1 == 0.0 {
        f64::INFINITY
    } else {
        consts.l0 / consts.l1
    };
    if eps > ratio.min(sigma) {
        return Err(Error::Precondition(format!(
            "epsilon = {eps} violates epsilon <= min(L0/L1, sigma) = {}",
            ratio.min(sigma)
        )));
    }
    let alpha = (eps / sigma).powi(2);
    if !(alpha < 1.0) && !(alpha > 0.0) {
        return Err(Error::Precondition(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    let inv_l1 = if consts.l1 == 0.0 { f64::INFINITY } else { 1.0 / consts.l1 };
    let eta = inv_l1.min(eps / consts.l0) * alpha;
    let steps = ceil_steps(inputs.delta / (eta * eps))?;
    Ok(SnmParams {
        eta,
        alpha,
        beta: 1.0 - alpha,
        steps,
    })
}
