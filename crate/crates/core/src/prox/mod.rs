//! Function oracles: values, weak-convexity moduli, proximal maps.
//!
//! A [`ProxFunction`] with modulus `rho` has a single-valued proximal map
//! `argmin_u f(u) + |u - v|^2 / (2 gamma)` whenever `gamma * rho < 1`;
//! [`ProxFunction::prox`] enforces that contract before delegating to
//! [`ProxFunction::prox_raw`].

mod catalog;
mod scalar;

use std::fmt;
use std::sync::Arc;

use ndarray::{Array1, ArrayView1};

use crate::error::{Error, Result, StepPredicate, StepViolation};

pub use catalog::*;
pub use scalar::{ScalarPenalty, ScalarTerm};

pub type SharedFunction = Arc<dyn ProxFunction>;

pub trait ProxFunction: Send + Sync + fmt::Debug {
    fn name(&self) -> String;

    /// Point value; `f64::INFINITY` outside the domain.
    fn eval(&self, x: ArrayView1<'_, f64>) -> f64;

    /// Modulus of weak convexity.
    fn rho(&self) -> f64;

    /// Proximal map without the stepsize check.
    fn prox_raw(&self, gamma: f64, v: ArrayView1<'_, f64>) -> Result<Array1<f64>>;

    /// Convex subdifferential at `x`, where an oracle exists.
    fn subdifferential(&self, _x: ArrayView1<'_, f64>) -> Option<IntervalBox> {
        None
    }

    /// Value of the convex conjugate at `y`, where a closed form exists.
    fn conjugate_value(&self, _y: ArrayView1<'_, f64>) -> Option<f64> {
        None
    }

    fn prox(&self, gamma: f64, v: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        check_prox_step(gamma, self.rho())?;
        self.prox_raw(gamma, v)
    }
}

pub(crate) fn check_prox_step(gamma: f64, rho: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "prox stepsize must be positive, got {gamma}"
        )));
    }
    if gamma * rho >= 1.0 {
        return Err(Error::StepsizeViolation(StepViolation {
            predicate: StepPredicate::ProxStep,
            value: gamma * rho,
            bound: 1.0,
        }));
    }
    Ok(())
}

/// Product of closed intervals `[lo_i, hi_i]`; singletons have `lo_i == hi_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalBox {
    pub lo: Array1<f64>,
    pub hi: Array1<f64>,
}

impl IntervalBox {
    pub fn singleton(point: Array1<f64>) -> Self {
        IntervalBox {
            lo: point.clone(),
            hi: point,
        }
    }

    pub fn project(&self, y: ArrayView1<'_, f64>) -> Array1<f64> {
        ndarray::Zip::from(&y)
            .and(&self.lo)
            .and(&self.hi)
            .map_collect(|&v, &l, &h| v.clamp(l, h))
    }

    pub fn distance(&self, y: ArrayView1<'_, f64>) -> f64 {
        let p = self.project(y);
        (&y - &p).mapv(|d| d * d).sum().sqrt()
    }
}

/// `prox_{gamma g*}(v)` through the Moreau identity
/// `v = prox_{gamma g*}(v) + gamma prox_{g/gamma}(v/gamma)`.
pub fn prox_conjugate(
    g: &dyn ProxFunction,
    gamma: f64,
    v: ArrayView1<'_, f64>,
) -> Result<Array1<f64>> {
    if g.rho() > 0.0 {
        return Err(Error::InvalidArgument(format!(
            "conjugate prox needs a convex function, {} has rho = {}",
            g.name(),
            g.rho()
        )));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "prox stepsize must be positive, got {gamma}"
        )));
    }
    let inner = g.prox(1.0 / gamma, (&v / gamma).view())?;
    Ok(&v - &(inner * gamma))
}

/// The conjugate `g*` of a convex `g`, with its prox routed through
/// [`prox_conjugate`]. Values come from `g.conjugate_value` and are `NaN`
/// when `g` has no closed-form conjugate.
#[derive(Debug, Clone)]
pub struct Conjugate {
    g: SharedFunction,
}

impl Conjugate {
    pub fn new(g: SharedFunction) -> Result<Self> {
        if g.rho() > 0.0 {
            return Err(Error::InvalidArgument(format!(
                "{} is not convex",
                g.name()
            )));
        }
        Ok(Conjugate { g })
    }
}

impl ProxFunction for Conjugate {
    fn name(&self) -> String {
        format!("({})*", self.g.name())
    }
    fn eval(&self, y: ArrayView1<'_, f64>) -> f64 {
        self.g.conjugate_value(y).unwrap_or(f64::NAN)
    }
    fn rho(&self) -> f64 {
        0.0
    }
    fn prox_raw(&self, gamma: f64, v: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        prox_conjugate(self.g.as_ref(), gamma, v)
    }
}

/// Numeric scalar prox: minimizes `f(u) + (u - v)^2 / (2 gamma)` over `[lo, hi]`.
///
/// A uniform grid locates every local minimum; each is refined by
/// golden-section search on its neighbouring grid cells and the best refined
/// point wins (ties go to the point nearest `v`). Exact to `tol` for
/// piecewise-smooth `f` whose pieces are wider than the grid spacing.
pub fn brute_force_prox(
    f: &dyn Fn(f64) -> f64,
    gamma: f64,
    v: f64,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<f64> {
    if !(lo < hi) {
        return Err(Error::InvalidArgument(format!(
            "empty interval [{lo}, {hi}]"
        )));
    }
    if !(gamma > 0.0) || !(tol > 0.0) {
        return Err(Error::InvalidArgument(
            "gamma and tol must be positive".into(),
        ));
    }
    const GRID: usize = 8000;
    let obj = |u: f64| f(u) + (u - v) * (u - v) / (2.0 * gamma);
    let step = (hi - lo) / GRID as f64;
    let xs: Vec<f64> = (0..=GRID).map(|i| lo + step * i as f64).collect();
    let vals: Vec<f64> = xs.iter().map(|&u| obj(u)).collect();

    let mut best = (f64::INFINITY, f64::NAN);
    for i in 0..=GRID {
        let left = if i == 0 { f64::INFINITY } else { vals[i - 1] };
        let right = if i == GRID {
            f64::INFINITY
        } else {
            vals[i + 1]
        };
        if vals[i] > left || vals[i] > right {
            continue;
        }
        let a = xs[i.saturating_sub(1)];
        let b = xs[(i + 1).min(GRID)];
        let u = golden_section(&obj, a, b, tol * 1e-3);
        let cand = [(obj(u), u), (vals[i], xs[i])];
        for (val, x) in cand {
            let t = 1e-13 * (1.0 + val.abs());
            if val < best.0 - t || (val <= best.0 + t && (x - v).abs() < (best.1 - v).abs()) {
                best = (val.min(best.0), x);
            }
        }
    }
    Ok(best.1)
}

fn golden_section(obj: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (obj(c), obj(d));
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = obj(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = obj(d);
        }
    }
    0.5 * (a + b)
}
