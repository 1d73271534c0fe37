//! Checkable formulas from the convergence analysis of clipped momentum
//! methods under `(L0, L1)`-smoothness.

mod budgets;
mod constants;
mod lemmas;
mod lyapunov;
mod qhm;

pub use budgets::{
    check_theorem31_step_sizes, snm_params, theorem31_budget, theorem31_step_sizes,
    theorem32_params, BudgetInputs, SnmParams, Theorem32Constants, Theorem32Params,
};
pub use constants::{ab_constants, SmoothnessConstants, DEFAULT_RADIUS};
pub use lemmas::{
    check_descent_inequality, check_grad_lipschitz_local, check_grad_norm_bound,
    check_gradient_growth, check_smoothness_definition, estimate_infimum, run_lemma_suite,
    CheckReport, LemmaCheck, LemmaSuiteConfig, ROUND_OFF_SLACK,
};
pub use lyapunov::{lyapunov, lyapunov_parts};
pub use qhm::{
    qhm_limit_closed_form, qhm_limit_matrix_oracle, qhm_limit_monte_carlo, qhm_transition_matrix,
    MonteCarloEstimate,
};
