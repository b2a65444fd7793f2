//! Primal-dual splitting for weakly convex saddle problems
//! `min_x max_y f(x) + <Lx, y> - g*(y)`.

// NaN must fail every range check, so negated comparisons are deliberate.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod image;
pub mod operators;
pub mod problems;
pub mod prox;
pub mod rng;
pub mod saddle;
pub mod solver;
pub mod trace;

pub use error::{Error, Result, StepPredicate, StepViolation};
