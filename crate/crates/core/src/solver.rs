//! The two primal-dual iterations.
//!
//! Dual-first:
//! `y+ = prox_{tau g*}(y + tau L x)`, `yb = y+ + theta (y+ - y)`, `x+ = prox_{sigma f}(x - sigma L* yb)`.
//!
//! Primal-first:
//! `x+ = prox_{sigma f}(x - sigma L* y)`, `xb = x+ + theta (x+ - x)`, `y+ = prox_{tau g*}(y + tau L xb)`.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use ndarray::{Array1, ArrayView1};
use rayon::prelude::*;

use crate::error::{check_dim, Error, Result, StepPredicate, StepViolation};
use crate::saddle::{dist_to_points, dist_to_set, gap_h, Point, SaddleProblem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    DualFirst,
    PrimalFirst,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Regime::DualFirst => "dual-first",
            Regime::PrimalFirst => "primal-first",
        })
    }
}

impl FromStr for Regime {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dual-first" | "dual" => Ok(Regime::DualFirst),
            "primal-first" | "primal" => Ok(Regime::PrimalFirst),
            _ => Err(Error::InvalidArgument(format!("unknown regime '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepConfig {
    /// Primal stepsize.
    pub sigma: f64,
    /// Dual stepsize.
    pub tau: f64,
    /// Relaxation parameter in `[0, 1]`.
    pub theta: f64,
}

/// Checks the strict stepsize predicates of `regime` in order: domain,
/// `sigma rho < 1`, `sqrt(sigma tau) |L| < 1`, then the regime's own coupling.
pub fn validate_steps(
    cfg: &StepConfig,
    rho: f64,
    norm_l: f64,
    regime: Regime,
) -> Result<(), StepViolation> {
    let StepConfig { sigma, tau, theta } = *cfg;
    let domain_ok = sigma > 0.0
        && tau > 0.0
        && (0.0..=1.0).contains(&theta)
        && sigma.is_finite()
        && tau.is_finite();
    if !domain_ok {
        let value = if !(sigma > 0.0) {
            sigma
        } else if !(tau > 0.0) {
            tau
        } else {
            theta
        };
        return Err(StepViolation {
            predicate: StepPredicate::Domain,
            value,
            bound: 0.0,
        });
    }
    let c = (sigma * tau).sqrt() * norm_l;
    let checks = [
        (StepPredicate::PrimalProx, sigma * rho),
        (StepPredicate::Coupling, c),
        match regime {
            Regime::DualFirst => (StepPredicate::DualFirst, sigma * rho + theta * c),
            Regime::PrimalFirst => (StepPredicate::PrimalFirst, sigma * rho + c),
        },
    ];
    for (predicate, value) in checks {
        if !(value < 1.0) {
            return Err(StepViolation {
                predicate,
                value,
                bound: 1.0,
            });
        }
    }
    Ok(())
}

/// One trace row. Empty fields mean the quantity is not available for this problem.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TraceRow {
    pub n: usize,
    /// Distance to the saddle set, or of `x` to the primal solutions.
    pub dist: Option<f64>,
    pub h: Option<f64>,
    /// `dist(y_{n-1}, dg(L x_n))`.
    pub eps: Option<f64>,
    /// `f(x) + g(Lx)`.
    pub objective: Option<f64>,
    /// `|z_n - z_{n-1}|`.
    pub residual: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HaltReason {
    MaxIters,
    Residual,
    Distance,
}

impl fmt::Display for HaltReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            HaltReason::MaxIters => "max-iters",
            HaltReason::Residual => "residual",
            HaltReason::Distance => "distance",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stopping {
    pub max_iters: usize,
    pub residual_tol: Option<f64>,
    pub dist_tol: Option<f64>,
}

impl Stopping {
    pub fn iters(max_iters: usize) -> Self {
        Stopping {
            max_iters,
            residual_tol: None,
            dist_tol: None,
        }
    }
}

/// Decides whether to stop after the last recorded row.
pub fn stopping(trace: &IterateTrace, rules: &Stopping) -> Option<HaltReason> {
    trace.rows.last().and_then(|row| check_row(row, rules))
}

fn check_row(row: &TraceRow, rules: &Stopping) -> Option<HaltReason> {
    if row.n == 0 {
        return (rules.max_iters == 0).then_some(HaltReason::MaxIters);
    }
    if let (Some(tol), Some(r)) = (rules.residual_tol, row.residual) {
        if r <= tol {
            return Some(HaltReason::Residual);
        }
    }
    if let (Some(tol), Some(d)) = (rules.dist_tol, row.dist) {
        if d <= tol {
            return Some(HaltReason::Distance);
        }
    }
    (row.n >= rules.max_iters).then_some(HaltReason::MaxIters)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceMeta {
    pub regime: Regime,
    pub steps: StepConfig,
    pub seed: Option<u64>,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub struct IterateTrace {
    pub rows: Vec<TraceRow>,
    /// `(x_n, y_n)` for every row, when requested.
    pub iterates: Option<Vec<Point>>,
    /// Relaxed points `yb_n` (dual-first) or `xb_n` (primal-first), from `n = 1`.
    pub relaxed: Option<Vec<Array1<f64>>>,
    pub x: Array1<f64>,
    pub y: Array1<f64>,
    pub meta: TraceMeta,
    pub halt: HaltReason,
    pub elapsed: Duration,
}

impl IterateTrace {
    pub fn last_row(&self) -> &TraceRow {
        self.rows.last().expect("trace has row 0")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub stopping: Stopping,
    pub store_iterates: bool,
    pub store_relaxed: bool,
    /// Recorded in the metadata only.
    pub seed: Option<u64>,
}

impl SolveOptions {
    pub fn iters(max_iters: usize) -> Self {
        SolveOptions {
            stopping: Stopping::iters(max_iters),
            store_iterates: false,
            store_relaxed: false,
            seed: None,
        }
    }

    pub fn storing_iterates(mut self) -> Self {
        self.store_iterates = true;
        self
    }
}

/// Callbacks invoked as the iteration proceeds. Errors abort the solve.
pub trait Observer {
    fn on_row(&mut self, _row: &TraceRow) -> Result<()> {
        Ok(())
    }
    fn on_iterate(
        &mut self,
        _n: usize,
        _x: ArrayView1<'_, f64>,
        _y: ArrayView1<'_, f64>,
    ) -> Result<()> {
        Ok(())
    }
}

impl Observer for () {}

impl<O: Observer + ?Sized> Observer for &mut O {
    fn on_row(&mut self, row: &TraceRow) -> Result<()> {
        (**self).on_row(row)
    }
    fn on_iterate(
        &mut self,
        n: usize,
        x: ArrayView1<'_, f64>,
        y: ArrayView1<'_, f64>,
    ) -> Result<()> {
        (**self).on_iterate(n, x, y)
    }
}

/// `dist(y_n, dg(L x_{n+1}))`, exact for box-shaped subdifferentials.
pub fn epsilon_monitor(
    p: &SaddleProblem,
    y_n: ArrayView1<'_, f64>,
    x_next: ArrayView1<'_, f64>,
) -> Result<f64> {
    let g =
        p.g.as_ref()
            .ok_or_else(|| Error::SubdiffUnavailable("g".into()))?;
    let lx = p.op.apply(x_next);
    let sub = g
        .subdifferential(lx.view())
        .ok_or_else(|| Error::SubdiffUnavailable(g.name()))?;
    Ok(sub.distance(y_n))
}

pub fn solve_dual_first(
    p: &SaddleProblem,
    cfg: &StepConfig,
    z0: &Point,
    opts: &SolveOptions,
    obs: impl Observer,
) -> Result<IterateTrace> {
    solve(p, cfg, Regime::DualFirst, z0, opts, obs)
}

pub fn solve_primal_first(
    p: &SaddleProblem,
    cfg: &StepConfig,
    z0: &Point,
    opts: &SolveOptions,
    obs: impl Observer,
) -> Result<IterateTrace> {
    solve(p, cfg, Regime::PrimalFirst, z0, opts, obs)
}

struct Metrics<'a> {
    p: &'a SaddleProblem,
    eps_available: bool,
}

impl<'a> Metrics<'a> {
    fn new(p: &'a SaddleProblem) -> Self {
        let eps_available = p.g.as_ref().is_some_and(|g| {
            let probe = Array1::zeros(p.op.out_dim());
            g.subdifferential(probe.view()).is_some()
        });
        Metrics { p, eps_available }
    }

    fn row(
        &self,
        n: usize,
        x: &Array1<f64>,
        y: &Array1<f64>,
        prev: Option<&Point>,
    ) -> Result<TraceRow> {
        let p = self.p;
        let dist = match (&p.saddle_set, &p.primal_solutions) {
            (Some(s), _) => Some(dist_to_set(x.view(), y.view(), s)?),
            (None, Some(sp)) => Some(dist_to_points(x.view(), sp)?),
            _ => None,
        };
        let h = match &p.saddle_set {
            Some(_) => Some(gap_h(p, x.view(), y.view())?),
            None => None,
        };
        let lx = p.g.as_ref().map(|_| p.op.apply(x.view()));
        let objective = match (&p.g, &lx) {
            (Some(g), Some(lx)) => Some(p.f.eval(x.view()) + g.eval(lx.view())),
            _ => None,
        };
        let mut eps = None;
        let mut residual = None;
        if let Some((xp, yp)) = prev {
            if self.eps_available {
                let g = p.g.as_ref().expect("eps needs g");
                let lx = lx.as_ref().expect("computed with g");
                eps = g.subdifferential(lx.view()).map(|b| b.distance(yp.view()));
            }
            let dx = x - xp;
            let dy = y - yp;
            residual = Some((dx.dot(&dx) + dy.dot(&dy)).sqrt());
        }
        Ok(TraceRow {
            n,
            dist,
            h,
            eps,
            objective,
            residual,
        })
    }
}

/// Runs `regime` from `z0` until a stopping rule fires.
pub fn solve(
    p: &SaddleProblem,
    cfg: &StepConfig,
    regime: Regime,
    z0: &Point,
    opts: &SolveOptions,
    mut obs: impl Observer,
) -> Result<IterateTrace> {
    validate_steps(cfg, p.rho(), p.norm_l(), regime).map_err(Error::StepsizeViolation)?;
    check_dim(p.op.in_dim(), z0.0.len())?;
    check_dim(p.op.out_dim(), z0.1.len())?;
    let start = Instant::now();
    let StepConfig { sigma, tau, theta } = *cfg;
    let metrics = Metrics::new(p);

    let (mut x, mut y) = z0.clone();
    let mut rows = Vec::with_capacity(opts.stopping.max_iters.min(1 << 20) + 1);
    let mut iterates = opts.store_iterates.then(Vec::new);
    let mut relaxed = opts.store_relaxed.then(Vec::new);

    let row0 = metrics.row(0, &x, &y, None)?;
    obs.on_iterate(0, x.view(), y.view())?;
    obs.on_row(&row0)?;
    rows.push(row0);
    if let Some(it) = iterates.as_mut() {
        it.push((x.clone(), y.clone()));
    }
    let mut halt = check_row(&row0, &opts.stopping);

    let mut n = 0;
    while halt.is_none() {
        let (x1, y1, bar) = match regime {
            Regime::DualFirst => {
                let v = &y + &(p.op.apply(x.view()) * tau);
                let y1 = p.gstar.prox(tau, v.view())?;
                let ybar = &y1 + &((&y1 - &y) * theta);
                let w = &x - &(p.op.adjoint(ybar.view()) * sigma);
                let x1 = p.f.prox(sigma, w.view())?;
                (x1, y1, ybar)
            }
            Regime::PrimalFirst => {
                let w = &x - &(p.op.adjoint(y.view()) * sigma);
                let x1 = p.f.prox(sigma, w.view())?;
                let xbar = &x1 + &((&x1 - &x) * theta);
                let v = &y + &(p.op.apply(xbar.view()) * tau);
                let y1 = p.gstar.prox(tau, v.view())?;
                (x1, y1, xbar)
            }
        };
        n += 1;
        let prev = (std::mem::replace(&mut x, x1), std::mem::replace(&mut y, y1));
        let row = metrics.row(n, &x, &y, Some(&prev))?;
        obs.on_iterate(n, x.view(), y.view())?;
        obs.on_row(&row)?;
        rows.push(row);
        if let Some(it) = iterates.as_mut() {
            it.push((x.clone(), y.clone()));
        }
        if let Some(r) = relaxed.as_mut() {
            r.push(bar);
        }
        halt = check_row(&row, &opts.stopping);
    }

    Ok(IterateTrace {
        rows,
        iterates,
        relaxed,
        x,
        y,
        meta: TraceMeta {
            regime,
            steps: *cfg,
            seed: opts.seed,
            iterations: n,
        },
        halt: halt.expect("loop exits on a halt"),
        elapsed: start.elapsed(),
    })
}

/// Independent solves from several starts, run concurrently. Results keep
/// the order of `starts`; `make_observer(i)` builds the observer of start `i`.
pub fn solve_many<O, F>(
    p: &SaddleProblem,
    cfg: &StepConfig,
    regime: Regime,
    starts: &[Point],
    opts: &SolveOptions,
    make_observer: F,
) -> Vec<Result<IterateTrace>>
where
    O: Observer,
    F: Fn(usize) -> Result<O> + Sync,
{
    starts
        .par_iter()
        .enumerate()
        .map(|(i, z0)| solve(p, cfg, regime, z0, opts, make_observer(i)?))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::ScalarMap;
    use crate::prox::{abs_value, l1_norm, quad_fit, shared};
    use ndarray::array;
    use std::sync::Arc;

    fn example3() -> SaddleProblem {
        SaddleProblem::new(
            shared(abs_value()),
            shared(abs_value()),
            Arc::new(ScalarMap::identity(1)),
        )
        .with_saddle_set(vec![(array![0.0], array![0.0])])
        .unwrap()
    }

    const EX3: StepConfig = StepConfig {
        sigma: 0.75,
        tau: 0.25,
        theta: 1.0,
    };

    #[test]
    fn predicates() {
        let ex4 = StepConfig {
            sigma: 0.35,
            tau: 0.25,
            theta: 1.0,
        };
        assert!(validate_steps(&ex4, 2.0, 1.0, Regime::DualFirst).is_ok());
        let v = validate_steps(
            &StepConfig { sigma: 0.5, ..ex4 },
            2.0,
            1.0,
            Regime::DualFirst,
        )
        .unwrap_err();
        assert_eq!(v.predicate, StepPredicate::PrimalProx);
        assert_eq!(v.excess(), 0.0);
        let v = validate_steps(
            &StepConfig {
                sigma: 0.1,
                tau: 0.5,
                theta: 1.5,
            },
            0.0,
            1.0,
            Regime::DualFirst,
        )
        .unwrap_err();
        assert_eq!(v.predicate, StepPredicate::Domain);
        let v = validate_steps(
            &StepConfig {
                sigma: 0.35,
                tau: 0.5,
                theta: 0.0,
            },
            2.0,
            1.0,
            Regime::PrimalFirst,
        )
        .unwrap_err();
        assert_eq!(v.predicate, StepPredicate::PrimalFirst);
        assert!(validate_steps(
            &StepConfig {
                sigma: 0.35,
                tau: 0.5,
                theta: 0.0
            },
            2.0,
            1.0,
            Regime::DualFirst
        )
        .is_ok());
    }

    #[test]
    fn one_step_by_hand() {
        let p = example3();
        let z0 = (array![1.0], array![0.0]);
        let opts = SolveOptions::iters(1).storing_iterates();
        let t = solve_dual_first(&p, &EX3, &z0, &opts, ()).unwrap();
        assert_eq!(t.x, array![0.25]);
        assert_eq!(t.y, array![0.0]);
        let t = solve_primal_first(&p, &EX3, &z0, &opts, ()).unwrap();
        assert_eq!(t.x, array![0.25]);
        assert_eq!(t.y, array![0.0]);
        assert_eq!(t.rows.len(), 2);
        assert_eq!(t.iterates.unwrap().len(), 2);
    }

    #[test]
    fn saddle_is_fixed() {
        let p = example3();
        let z0 = (array![0.0], array![0.0]);
        for regime in [Regime::DualFirst, Regime::PrimalFirst] {
            let t = solve(&p, &EX3, regime, &z0, &SolveOptions::iters(20), ()).unwrap();
            assert!(t.rows.iter().all(|r| r.dist == Some(0.0)));
        }
    }

    #[test]
    fn residual_rule_stops_at_fixed_point() {
        let p = example3();
        let mut opts = SolveOptions::iters(100);
        opts.stopping.residual_tol = Some(0.0);
        let t = solve_dual_first(&p, &EX3, &(array![0.0], array![0.0]), &opts, ()).unwrap();
        assert_eq!(t.meta.iterations, 1);
        assert_eq!(t.halt, HaltReason::Residual);
        assert_eq!(stopping(&t, &opts.stopping), Some(HaltReason::Residual));
    }

    #[test]
    fn dist_rule() {
        let p = example3();
        let mut opts = SolveOptions::iters(100);
        opts.stopping.dist_tol = Some(1e-12);
        let t = solve_dual_first(&p, &EX3, &(array![3.0], array![-2.0]), &opts, ()).unwrap();
        assert_eq!(t.halt, HaltReason::Distance);
        assert!(t.meta.iterations < 100);
    }

    #[test]
    fn decoupled_regimes_agree() {
        let p = SaddleProblem::new(
            shared(abs_value()),
            shared(abs_value()),
            Arc::new(ScalarMap { scale: 0.0, dim: 1 }),
        );
        let cfg = StepConfig {
            sigma: 0.3,
            tau: 0.2,
            theta: 0.0,
        };
        let z0 = (array![2.0], array![-1.5]);
        let opts = SolveOptions::iters(10).storing_iterates();
        let a = solve_dual_first(&p, &cfg, &z0, &opts, ()).unwrap();
        let b = solve_primal_first(&p, &cfg, &z0, &opts, ()).unwrap();
        assert_eq!(a.iterates, b.iterates);
    }

    #[test]
    fn violation_checked_up_front() {
        let p = example3();
        let cfg = StepConfig {
            sigma: 2.0,
            tau: 0.5,
            theta: 1.0,
        };
        assert!(matches!(
            solve_dual_first(
                &p,
                &cfg,
                &(array![1.0], array![0.0]),
                &SolveOptions::iters(5),
                ()
            ),
            Err(Error::StepsizeViolation(_))
        ));
    }

    #[test]
    fn epsilon_cases() {
        let op = Arc::new(ScalarMap::identity(2));
        let p = SaddleProblem::from_g(shared(abs_value()), shared(l1_norm(2)), op.clone()).unwrap();
        assert_eq!(
            epsilon_monitor(&p, array![1.0, -1.0].view(), array![0.5, -2.0].view()).unwrap(),
            0.0
        );
        let p1 = SaddleProblem::from_g(
            shared(abs_value()),
            shared(l1_norm(1)),
            Arc::new(ScalarMap::identity(1)),
        )
        .unwrap();
        assert_eq!(
            epsilon_monitor(&p1, array![2.0].view(), array![0.0].view()).unwrap(),
            1.0
        );
        let b = array![0.5, -1.0];
        let pq = SaddleProblem::from_g(
            shared(abs_value()),
            shared(quad_fit(b.clone(), 1.0).unwrap()),
            op,
        )
        .unwrap();
        let (y, x) = (array![0.3, 0.4], array![1.0, 2.0]);
        let expect = (&y - &(&x - &b)).mapv(|v| v * v).sum().sqrt();
        assert!((epsilon_monitor(&pq, y.view(), x.view()).unwrap() - expect).abs() < 1e-15);
        assert!(matches!(
            epsilon_monitor(&example3(), y.view(), x.view()),
            Err(Error::SubdiffUnavailable(_))
        ));
    }

    #[test]
    fn many_starts_are_independent() {
        let p = example3();
        let starts: Vec<Point> = (0..8)
            .map(|i| (array![i as f64 - 4.0], array![1.5]))
            .collect();
        let opts = SolveOptions::iters(50);
        let all = solve_many(&p, &EX3, Regime::DualFirst, &starts, &opts, |_| Ok(()));
        for (z0, r) in starts.iter().zip(all) {
            let single = solve_dual_first(&p, &EX3, z0, &opts, ()).unwrap();
            assert_eq!(r.unwrap().rows, single.rows);
        }
    }
}
