//! Clipped momentum methods for (L0,L1)-smooth non-convex objectives.
//!
//! The crate is organised bottom-up:
//!
//! - [`vector`], [`rng`], [`fd`]: dense parameter vectors, a counter-based
//!   splittable random stream, and finite-difference oracles.
//! - [`objectives`]: test problems with analytic gradients and
//!   Hessian-vector products, plus the exponential-loss classifier and its
//!   datasets.
//! - [`clipping`]: the general clipping optimizer (hard, soft and normalized
//!   updates) as a state machine over `(x, m)`, and the run loops.
//! - [`theory`]: smoothness constants, the Lyapunov potential, residual checks
//!   for the smoothness lemmas, step-size/budget schedules, and the limiting
//!   loss of mixed clipping on a stochastic quadratic.
//! - [`profiler`]: local smoothness estimation and `(L0, L1)` envelope fitting.
//!
//! All arithmetic is `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod clipping;
pub mod error;
pub mod fd;
pub mod objectives;
pub mod profiler;
pub mod rng;
pub mod theory;
pub mod vector;

pub use error::{Error, Result};
pub use rng::RngStream;
pub use vector::{l2_norm, ParamVector};
