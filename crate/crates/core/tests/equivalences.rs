//! Special cases of the general update against straight-line references.

mod common;

use cliplab::clipping::{step_update, ClipConfig, OptimizerState};
use cliplab::{ParamVector, RngStream};
use common::*;

fn ulps(a: f64, b: f64) -> u64 {
    let key = |x: f64| {
        let i = x.to_bits() as i64;
        if i < 0 { i64::MIN - i } else { i }
    };
    key(a).abs_diff(key(b))
}

fn max_ulps(a: &ParamVector, b: &[f64]) -> u64 {
    a.as_slice().iter().zip(b).map(|(x, y)| ulps(*x, *y)).max().unwrap()
}

fn plain_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

struct Case {
    state: OptimizerState,
    g: Vec<f64>,
    eta: f64,
    gamma: f64,
    beta: f64,
    nu: f64,
}

fn cases(seed: u64) -> Vec<Case> {
    let mut rng = RngStream::new(seed, 0);
    (0..1000)
        .map(|_| {
            let d = 1 + rng.below(6);
            let scale = 10f64.powf(rng.uniform_in(-3.0, 3.0));
            let draw = |rng: &mut RngStream| (0..d).map(|_| scale * rng.standard_normal()).collect::<Vec<_>>();
            let x = draw(&mut rng);
            let m = draw(&mut rng);
            let g = draw(&mut rng);
            Case {
                state: OptimizerState::new(pv(&x), pv(&m)).unwrap(),
                g,
                eta: 10f64.powf(rng.uniform_in(-4.0, 0.0)),
                gamma: 10f64.powf(rng.uniform_in(-3.0, 1.0)),
                beta: rng.uniform_in(0.0, 0.99),
                nu: rng.uniform(),
            }
        })
        .collect()
}

#[test]
fn no_momentum_makes_nu_irrelevant() {
    for c in cases(1) {
        let base = step_update(&c.state, &pv(&c.g), &ClipConfig::hard(c.eta, c.gamma, 0.0, 0.0).unwrap()).unwrap();
        let mixed = step_update(&c.state, &pv(&c.g), &ClipConfig::hard(c.eta, c.gamma, 0.0, c.nu).unwrap()).unwrap();
        assert!(max_ulps(&mixed, base.as_slice()) <= 4);
    }
}

#[test]
fn nu_zero_is_clipped_sgd() {
    for c in cases(2) {
        let u = step_update(&c.state, &pv(&c.g), &ClipConfig::hard(c.eta, c.gamma, c.beta, 0.0).unwrap()).unwrap();
        let f = c.eta.min(c.gamma / plain_norm(&c.g));
        let reference: Vec<f64> = c.g.iter().map(|g| f * g).collect();
        assert!(max_ulps(&u, &reference) <= 4);
    }
}

#[test]
fn nu_one_is_momentum_clipping() {
    for c in cases(3) {
        let u = step_update(&c.state, &pv(&c.g), &ClipConfig::hard(c.eta, c.gamma, c.beta, 1.0).unwrap()).unwrap();
        let m: Vec<f64> = c.state.m.as_slice().iter().zip(&c.g).map(|(m, g)| c.beta * m + (1.0 - c.beta) * g).collect();
        let f = c.eta.min(c.gamma / plain_norm(&m));
        let reference: Vec<f64> = m.iter().map(|v| f * v).collect();
        assert!(max_ulps(&u, &reference) <= 4);
    }
}

#[test]
fn no_clipping_is_momentum_sgd() {
    for c in cases(4) {
        let u = step_update(&c.state, &pv(&c.g), &ClipConfig::hard(c.eta, f64::INFINITY, c.beta, 1.0).unwrap()).unwrap();
        let reference: Vec<f64> = c
            .state
            .m
            .as_slice()
            .iter()
            .zip(&c.g)
            .map(|(m, g)| c.eta * (c.beta * m + (1.0 - c.beta) * g))
            .collect();
        assert!(max_ulps(&u, &reference) <= 4);
    }
}

#[test]
fn normalized_steps_have_length_eta() {
    for c in cases(5) {
        let u = step_update(&c.state, &pv(&c.g), &ClipConfig::normalized(c.eta, c.beta).unwrap()).unwrap();
        assert!(ulps(plain_norm(u.as_slice()), c.eta) <= 4);
    }
}
