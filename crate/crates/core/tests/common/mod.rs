#![allow(dead_code)]

use cliplab::objectives::{gen_synthetic_dataset, make_exp_loss, ExpLoss};
use cliplab::{ParamVector, RngStream};

pub fn pv(v: &[f64]) -> ParamVector {
    ParamVector::new(v.to_vec()).unwrap()
}

/// `n = 100`, `d = 2`, `R = 1`, `λ = 0.5` on a fixed seed.
pub fn small_exp_loss() -> ExpLoss {
    let mut rng = RngStream::new(42, 0);
    let data = gen_synthetic_dataset(100, 2, 1.0, 1.0, &mut rng).unwrap();
    make_exp_loss(data, 0.5).unwrap()
}

pub fn random_in_box(rng: &mut RngStream, lo: &[f64], hi: &[f64]) -> ParamVector {
    pv(&lo.iter().zip(hi).map(|(&a, &b)| rng.uniform_in(a, b)).collect::<Vec<_>>())
}

/// Uniform in the Euclidean ball of radius `r`.
pub fn random_in_ball(rng: &mut RngStream, d: usize, r: f64) -> ParamVector {
    let u = rng.unit_direction(d);
    let s = r * rng.uniform().powf(1.0 / d as f64);
    pv(&u.iter().map(|x| s * x).collect::<Vec<_>>())
}

/// `‖a − b‖ / max(‖b‖, 1)`.
pub fn rel_err(a: &ParamVector, b: &ParamVector) -> f64 {
    let diff: Vec<f64> = a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| x - y).collect();
    ParamVector::new(diff).unwrap().norm() / b.norm().max(1.0)
}
