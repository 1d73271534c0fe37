mod common;

use cliplab::clipping::{run_deterministic, run_stochastic, ClipConfig, RunOptions};
use cliplab::objectives::{exp_loss_constants, gen_synthetic_dataset, make_exp_loss, make_noisy_quadratic, make_quartic, Objective};
use cliplab::theory::{
    qhm_limit_closed_form, qhm_limit_monte_carlo, snm_params, theorem31_budget, theorem31_step_sizes,
    BudgetInputs, SmoothnessConstants,
};
use cliplab::RngStream;
use common::*;

#[test]
fn quartic_meets_deterministic_budget() {
    let consts = SmoothnessConstants::with_default_radius(16.0, 1.0).unwrap();
    let obj = make_quartic();
    let x0 = pv(&[1.0]);
    let eps = 0.05;
    for beta in [0.0, 0.9] {
        for nu in [0.0, 0.7, 1.0] {
            let (eta, gamma) = theorem31_step_sizes(&consts, beta).unwrap();
            let delta = obj.value(&x0).unwrap();
            let steps = theorem31_budget(&BudgetInputs::deterministic(delta, eps).unwrap(), eta, gamma).unwrap();
            let cfg = ClipConfig::hard(eta, gamma, beta, nu).unwrap();
            let opts = RunOptions {
                record_stride: steps,
                ..RunOptions::default()
            };
            let tr = run_deterministic(&obj, &cfg, &x0, steps, &opts).unwrap();
            assert!(tr.summary.mean_grad_norm <= 2.0 * eps, "beta={beta} nu={nu}: {:?}", tr.summary);
            assert!(tr.summary.initial_lyapunov - tr.summary.final_lyapunov >= -1e-10);
        }
    }
}

#[test]
fn momentum_limit_on_noisy_quadratic() {
    // ν = 1, no clipping, η = β = 0.5: tail average of x²/2 over the last
    // 2000 of 10⁴ steps. One run has about 6% standard error, so the check
    // averages 16 independent streams.
    let obj = make_noisy_quadratic();
    let cfg = ClipConfig::hard(0.5, 1e300, 0.5, 1.0).unwrap();
    let opts = RunOptions {
        record_stride: u64::MAX,
        tail_window: 2000,
        ..RunOptions::default()
    };
    let runs = 16;
    let mean = (0..runs)
        .map(|s| {
            let mut rng = RngStream::new(2020, s);
            run_stochastic(&obj, &cfg, &pv(&[0.0]), 10_000, &mut rng, &opts)
                .unwrap()
                .summary
                .tail_mean_loss
        })
        .sum::<f64>()
        / runs as f64;
    let target = qhm_limit_closed_form(0.5, 0.5, 1.0).unwrap();
    assert!((target - 0.13636).abs() < 1e-5);
    assert!((mean - target).abs() <= 0.05 * target, "{mean} vs {target}");
}

#[test]
fn monte_carlo_agrees_with_closed_form() {
    for &(eta, beta, nu) in &[(0.5, 0.0, 0.0), (0.5, 0.5, 1.0), (0.3, 0.9, 0.7)] {
        let mc = qhm_limit_monte_carlo(eta, beta, nu, 10_000, 32, 2000, 99).unwrap();
        let cf = qhm_limit_closed_form(eta, beta, nu).unwrap();
        assert!((mc.mean - cf).abs() < 3.0 * mc.std_err, "{eta} {beta} {nu}: {mc:?} vs {cf}");
    }
}

#[test]
fn normalized_momentum_reduces_gradient() {
    let obj = make_noisy_quadratic();
    let consts = SmoothnessConstants::with_default_radius(1.0, 0.0).unwrap();
    let x0 = pv(&[5.0]);
    let eps = 0.5;
    let sigma = obj.noise_bound().unwrap();
    let p = snm_params(&BudgetInputs::new(obj.value(&x0).unwrap(), eps, sigma).unwrap(), &consts).unwrap();
    let cfg = ClipConfig::normalized(p.eta, p.beta).unwrap();
    let mut rng = RngStream::new(5, 0);
    let tr = run_stochastic(&obj, &cfg, &x0, p.steps, &mut rng, &RunOptions::default()).unwrap();
    let half = tr.records.len() / 2;
    let late = tr.records[half..].iter().map(|r| r.grad_norm).sum::<f64>() / (tr.records.len() - half) as f64;
    assert!(late < 0.2 * tr.records[0].grad_norm, "late mean {late}");
    assert!(tr.summary.mean_grad_norm < tr.records[0].grad_norm);
    assert!(tr.records[1..].iter().all(|r| (r.step_norm - p.eta).abs() <= 4.0 * f64::EPSILON * p.eta));
}

#[test]
fn full_batch_exp_loss_descends() {
    let mut rng = RngStream::new(2020, 0);
    let data = gen_synthetic_dataset(200, 2, 1.0, 1.0, &mut rng).unwrap();
    let obj = make_exp_loss(data, 0.02).unwrap();
    let consts = exp_loss_constants(1.0, 2, 0.02, 200, 0.5, 0.5).unwrap();
    let (eta, gamma) = theorem31_step_sizes(&consts, 0.0).unwrap();
    let cfg = ClipConfig::hard(eta, gamma, 0.0, 0.0).unwrap();
    let tr = run_deterministic(&obj, &cfg, &pv(&[0.0, 0.0]), 2000, &RunOptions::default()).unwrap();
    assert!(tr.records.windows(2).all(|w| w[1].loss < w[0].loss));
}

#[test]
fn exp_loss_clipped_momentum_with_practical_steps() {
    let mut rng = RngStream::new(1, 0);
    let data = gen_synthetic_dataset(200, 2, 1.0, 1.0, &mut rng).unwrap();
    let obj = make_exp_loss(data, 0.02).unwrap().with_batch_size(20).unwrap();
    let cfg = ClipConfig::hard(1.0, 0.5, 0.9, 0.7).unwrap();
    let mut rng = RngStream::new(2, 0);
    let opts = RunOptions {
        tail_window: 50,
        ..RunOptions::default()
    };
    let tr = run_stochastic(&obj, &cfg, &pv(&[0.0, 0.0]), 500, &mut rng, &opts).unwrap();
    assert!(tr.summary.tail_mean_loss < tr.summary.initial_loss);
}
