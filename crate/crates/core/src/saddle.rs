//! Saddle problems `min_x max_y f(x) + <Lx, y> - g*(y)` and the analytics
//! built on them: Lagrangian, gap functions, inf-sharpness scans, distances
//! and the convergence constants of the two primal-dual iterations.

use std::io::{self, Write};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use ndarray::{aview1, Array1, ArrayView1};
use rand::Rng;
use rayon::prelude::*;

use crate::error::{check_dim, Error, Result};
use crate::operators::LinearMap;
use crate::prox::{Conjugate, ProxFunction, QuadraticShift, SharedFunction};
use crate::rng;
use crate::solver::{validate_steps, Regime, StepConfig};

/// Primal-dual pair `(x, y)`.
pub type Point = (Array1<f64>, Array1<f64>);

/// H values below this are counted as evidence of a wrong saddle set.
pub const H_NEGATIVE_TOL: f64 = 1e-12;

#[derive(Debug)]
pub struct SaddleProblem {
    pub f: SharedFunction,
    pub gstar: SharedFunction,
    /// The convex `g` itself, when known; enables objectives and the inexactness monitor.
    pub g: Option<SharedFunction>,
    pub op: Arc<dyn LinearMap>,
    pub saddle_set: Option<Vec<Point>>,
    pub primal_solutions: Option<Vec<Array1<f64>>>,
    pub dual_solutions: Option<Vec<Array1<f64>>>,
    negative_h: AtomicUsize,
}

impl SaddleProblem {
    pub fn new(f: SharedFunction, gstar: SharedFunction, op: Arc<dyn LinearMap>) -> Self {
        SaddleProblem {
            f,
            gstar,
            g: None,
            op,
            saddle_set: None,
            primal_solutions: None,
            dual_solutions: None,
            negative_h: AtomicUsize::new(0),
        }
    }

    /// Builds the problem from a convex `g`; the dual prox goes through the Moreau identity.
    pub fn from_g(f: SharedFunction, g: SharedFunction, op: Arc<dyn LinearMap>) -> Result<Self> {
        let gstar: SharedFunction = Arc::new(Conjugate::new(g.clone())?);
        Ok(Self::new(f, gstar, op).with_g(g))
    }

    pub fn with_g(mut self, g: SharedFunction) -> Self {
        self.g = Some(g);
        self
    }

    pub fn with_saddle_set(mut self, set: Vec<Point>) -> Result<Self> {
        for (x, y) in &set {
            check_dim(self.op.in_dim(), x.len())?;
            check_dim(self.op.out_dim(), y.len())?;
        }
        self.saddle_set = Some(set);
        Ok(self)
    }

    pub fn with_primal_solutions(mut self, set: Vec<Array1<f64>>) -> Result<Self> {
        for x in &set {
            check_dim(self.op.in_dim(), x.len())?;
        }
        self.primal_solutions = Some(set);
        Ok(self)
    }

    pub fn with_dual_solutions(mut self, set: Vec<Array1<f64>>) -> Result<Self> {
        for y in &set {
            check_dim(self.op.out_dim(), y.len())?;
        }
        self.dual_solutions = Some(set);
        Ok(self)
    }

    pub fn rho(&self) -> f64 {
        self.f.rho()
    }

    pub fn norm_l(&self) -> f64 {
        self.op.norm_bound()
    }

    /// Number of H evaluations that came out below `-H_NEGATIVE_TOL`.
    pub fn negative_h_count(&self) -> usize {
        self.negative_h.load(Ordering::Relaxed)
    }

    /// Primal objective `f(x) + g(Lx)`, when `g` is known.
    pub fn objective(&self, x: ArrayView1<'_, f64>) -> Option<f64> {
        let g = self.g.as_ref()?;
        Some(self.f.eval(x) + g.eval(self.op.apply(x).view()))
    }

    /// Largest violation of `K(x*, y) <= K(x*, y*) <= K(x, y*)` over `probes`
    /// random points around each listed saddle point.
    pub fn saddle_violation(&self, radius: f64, probes: usize, seed: u64) -> Result<f64> {
        let set = self.saddle_set.as_ref().ok_or(Error::MissingSaddleSet)?;
        let mut rng = rng::stream(seed);
        let mut worst = 0.0f64;
        for (xs, ys) in set {
            let k0 = lagrangian(self, xs.view(), ys.view())?;
            for _ in 0..probes {
                let x = xs + &rng::uniform_vec(&mut rng, xs.len(), -radius, radius);
                let y = ys + &rng::uniform_vec(&mut rng, ys.len(), -radius, radius);
                worst = worst.max(lagrangian(self, xs.view(), y.view())? - k0);
                worst = worst.max(k0 - lagrangian(self, x.view(), ys.view())?);
            }
        }
        Ok(worst)
    }
}

/// `K(x, y) = f(x) + <Lx, y> - g*(y)`; `+inf` whenever `f(x) = +inf`.
pub fn lagrangian(
    p: &SaddleProblem,
    x: ArrayView1<'_, f64>,
    y: ArrayView1<'_, f64>,
) -> Result<f64> {
    check_dim(p.op.in_dim(), x.len())?;
    check_dim(p.op.out_dim(), y.len())?;
    let fx = p.f.eval(x);
    if fx == f64::INFINITY {
        return Ok(f64::INFINITY);
    }
    let gy = p.gstar.eval(y);
    if gy == f64::INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(fx + p.op.apply(x).dot(&y) - gy)
}

/// Modified gap `H(x, y) = min over (xb, yb) in S of K(x, yb) - K(xb, y)`.
pub fn gap_h(p: &SaddleProblem, x: ArrayView1<'_, f64>, y: ArrayView1<'_, f64>) -> Result<f64> {
    let set = p.saddle_set.as_ref().ok_or(Error::MissingSaddleSet)?;
    if set.is_empty() {
        return Err(Error::MissingSaddleSet);
    }
    let mut h = f64::INFINITY;
    for (xb, yb) in set {
        h = h.min(lagrangian(p, x, yb.view())? - lagrangian(p, xb.view(), y)?);
    }
    if h < -H_NEGATIVE_TOL {
        p.negative_h.fetch_add(1, Ordering::Relaxed);
    }
    Ok(h.max(0.0))
}

/// Product-norm distance from `(x, y)` to the nearest listed pair.
pub fn dist_to_set(x: ArrayView1<'_, f64>, y: ArrayView1<'_, f64>, set: &[Point]) -> Result<f64> {
    if set.is_empty() {
        return Err(Error::InvalidArgument("distance to an empty set".into()));
    }
    let mut best = f64::INFINITY;
    for (xb, yb) in set {
        check_dim(xb.len(), x.len())?;
        check_dim(yb.len(), y.len())?;
        let d2 = sq_dist(x, xb.view()) + sq_dist(y, yb.view());
        best = best.min(d2);
    }
    Ok(best.sqrt())
}

/// Euclidean distance from `x` to the nearest listed point.
pub fn dist_to_points(x: ArrayView1<'_, f64>, set: &[Array1<f64>]) -> Result<f64> {
    if set.is_empty() {
        return Err(Error::InvalidArgument("distance to an empty set".into()));
    }
    let mut best = f64::INFINITY;
    for xb in set {
        check_dim(xb.len(), x.len())?;
        best = best.min(sq_dist(x, xb.view()));
    }
    Ok(best.sqrt())
}

fn sq_dist(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(u, v)| (u - v) * (u - v)).sum()
}

/// Axis-aligned rectangle `[x.0, x.1] x [y.0, y.1]` for grid scans.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridBox {
    pub x: (f64, f64),
    pub y: (f64, f64),
}

impl GridBox {
    pub fn square(lo: f64, hi: f64) -> Self {
        GridBox {
            x: (lo, hi),
            y: (lo, hi),
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x.0 && x <= self.x.1 && y >= self.y.0 && y <= self.y.1
    }
}

/// Grid `lo, lo + step, ...` up to `hi` (inclusive, up to rounding).
pub fn grid_axis(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "bad grid [{lo}, {hi}] step {step}"
        )));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    // keep points on multiples of step when lo is one, so 0 lands exactly on 0
    let k0 = (lo / step).round();
    if (lo / step - k0).abs() < 1e-9 {
        Ok((0..count).map(|i| (k0 + i as f64) * step).collect())
    } else {
        Ok((0..count).map(|i| lo + step * i as f64).collect())
    }
}

/// Scalar view of a problem with one-dimensional `x` and `y`.
struct ScalarK<'a> {
    p: &'a SaddleProblem,
    c: f64,
}

impl<'a> ScalarK<'a> {
    fn new(p: &'a SaddleProblem) -> Result<Self> {
        if p.op.in_dim() != 1 || p.op.out_dim() != 1 {
            return Err(Error::Unsupported(format!(
                "grid scans need scalar x and y, got dims {} and {}",
                p.op.in_dim(),
                p.op.out_dim()
            )));
        }
        let c = p.op.apply(aview1(&[1.0]))[0];
        Ok(ScalarK { p, c })
    }

    fn f(&self, x: f64) -> f64 {
        self.p.f.eval(aview1(&[x]))
    }

    fn gstar(&self, y: f64) -> f64 {
        self.p.gstar.eval(aview1(&[y]))
    }

    fn k(&self, x: f64, y: f64) -> f64 {
        let fx = self.f(x);
        if fx == f64::INFINITY {
            return f64::INFINITY;
        }
        let gy = self.gstar(y);
        if gy == f64::INFINITY {
            return f64::NEG_INFINITY;
        }
        fx + self.c * x * y - gy
    }

    fn saddle(&self) -> Result<Vec<(f64, f64)>> {
        let set = self.p.saddle_set.as_ref().ok_or(Error::MissingSaddleSet)?;
        if set.is_empty() {
            return Err(Error::MissingSaddleSet);
        }
        Ok(set.iter().map(|(x, y)| (x[0], y[0])).collect())
    }

    fn h(&self, set: &[(f64, f64)], x: f64, y: f64) -> f64 {
        let h = set
            .iter()
            .map(|&(xb, yb)| self.k(x, yb) - self.k(xb, y))
            .fold(f64::INFINITY, f64::min);
        if h < -H_NEGATIVE_TOL {
            self.p.negative_h.fetch_add(1, Ordering::Relaxed);
        }
        h.max(0.0)
    }

    fn dist(set: &[(f64, f64)], x: f64, y: f64) -> f64 {
        set.iter()
            .map(|&(xb, yb)| (x - xb).hypot(y - yb))
            .fold(f64::INFINITY, f64::min)
    }

    fn gap_g(&self, x: f64, y: f64, xs: &[f64], ys: &[f64]) -> f64 {
        let sup = ys
            .iter()
            .map(|&v| self.k(x, v))
            .fold(f64::NEG_INFINITY, f64::max);
        let inf = xs
            .iter()
            .map(|&u| self.k(u, y))
            .fold(f64::INFINITY, f64::min);
        sup - inf
    }
}

/// Standard gap `G(x, y) = sup_yh K(x, yh) - inf_xh K(xh, y)` with both
/// extrema taken over the grid of `domain` with spacing `step`.
pub fn gap_g(
    p: &SaddleProblem,
    x: ArrayView1<'_, f64>,
    y: ArrayView1<'_, f64>,
    domain: &GridBox,
    step: f64,
) -> Result<f64> {
    let k = ScalarK::new(p)?;
    check_dim(1, x.len())?;
    check_dim(1, y.len())?;
    let xs = grid_axis(domain.x.0, domain.x.1, step)?;
    let ys = grid_axis(domain.y.0, domain.y.1, step)?;
    Ok(k.gap_g(x[0], y[0], &xs, &ys))
}

/// Values of `H(z) - mu * dist(z, S)` on a rectangular grid.
#[derive(Debug, Clone)]
pub struct SharpnessGrid {
    pub mu: f64,
    pub step: f64,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// Row-major in `x`: entry `i * ys.len() + j` belongs to `(xs[i], ys[j])`.
    pub values: Vec<f64>,
}

impl SharpnessGrid {
    /// Minimum value and its point; ties go to the lowest linear index.
    pub fn min(&self) -> (f64, (f64, f64)) {
        let mut best = (f64::INFINITY, 0usize);
        for (idx, &v) in self.values.iter().enumerate() {
            if v < best.0 {
                best = (v, idx);
            }
        }
        let ny = self.ys.len();
        (best.0, (self.xs[best.1 / ny], self.ys[best.1 % ny]))
    }

    /// Writes `x,y,value` rows, one per grid point.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "x,y,value")?;
        let ny = self.ys.len();
        for (idx, v) in self.values.iter().enumerate() {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e}",
                self.xs[idx / ny],
                self.ys[idx % ny],
                v
            )?;
        }
        w.flush()
    }
}

pub fn sharpness_grid(
    p: &SaddleProblem,
    mu: f64,
    domain: &GridBox,
    step: f64,
) -> Result<SharpnessGrid> {
    let k = ScalarK::new(p)?;
    let set = k.saddle()?;
    let xs = grid_axis(domain.x.0, domain.x.1, step)?;
    let ys = grid_axis(domain.y.0, domain.y.1, step)?;
    let ny = ys.len();
    let values: Vec<f64> = (0..xs.len() * ny)
        .into_par_iter()
        .map(|idx| {
            let (x, y) = (xs[idx / ny], ys[idx % ny]);
            k.h(&set, x, y) - mu * ScalarK::dist(&set, x, y)
        })
        .collect();
    Ok(SharpnessGrid {
        mu,
        step,
        xs,
        ys,
        values,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SharpnessReport {
    pub mu: f64,
    /// `min over the grid of H(z) - mu * dist(z, S)`.
    pub min_value: f64,
    pub witness: (f64, f64),
    pub grid_step: f64,
    pub points: usize,
}

impl SharpnessReport {
    pub const TOL: f64 = 1e-9;

    pub fn is_inf_sharp(&self) -> bool {
        self.min_value >= -Self::TOL
    }
}

pub fn verify_inf_sharpness(
    p: &SaddleProblem,
    mu: f64,
    domain: &GridBox,
    step: f64,
) -> Result<SharpnessReport> {
    let grid = sharpness_grid(p, mu, domain, step)?;
    let (min_value, witness) = grid.min();
    Ok(SharpnessReport {
        mu,
        min_value,
        witness,
        grid_step: step,
        points: grid.values.len(),
    })
}

/// Largest violation of the weak-convexity inequality
/// `G(l z1 + (1-l) z2) <= l G(z1) + (1-l) G(z2) + l (1-l) (rho/2) |z1 - z2|^2`
/// over `samples` random triples with `z1, z2` in `domain`. `G` is evaluated
/// with the grid of `domain` at spacing `step`.
pub fn gap_weak_convexity_check(
    p: &SaddleProblem,
    rho_f: f64,
    samples: usize,
    seed: u64,
    domain: &GridBox,
    step: f64,
) -> Result<f64> {
    let k = ScalarK::new(p)?;
    let xs = grid_axis(domain.x.0, domain.x.1, step)?;
    let ys = grid_axis(domain.y.0, domain.y.1, step)?;
    let mut rng = rng::stream(seed);
    let triples: Vec<[f64; 5]> = (0..samples)
        .map(|_| {
            [
                rng.random_range(domain.x.0..=domain.x.1),
                rng.random_range(domain.y.0..=domain.y.1),
                rng.random_range(domain.x.0..=domain.x.1),
                rng.random_range(domain.y.0..=domain.y.1),
                rng.random_range(0.0..=1.0),
            ]
        })
        .collect();
    let worst = triples
        .par_iter()
        .map(|&[x1, y1, x2, y2, l]| {
            let g1 = k.gap_g(x1, y1, &xs, &ys);
            let g2 = k.gap_g(x2, y2, &xs, &ys);
            let gm = k.gap_g(l * x1 + (1.0 - l) * x2, l * y1 + (1.0 - l) * y2, &xs, &ys);
            let d2 = (x1 - x2).powi(2) + (y1 - y2).powi(2);
            let rhs = l * g1 + (1.0 - l) * g2 + l * (1.0 - l) * 0.5 * rho_f * d2;
            (gm - rhs).max(0.0)
        })
        .reduce(|| 0.0, f64::max);
    Ok(worst)
}

/// Contraction constants and ball radius of one regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusReport {
    /// Constant of the dual-first iteration.
    pub a: f64,
    /// Constant of the primal-first iteration.
    pub a1: f64,
    pub ball_radius: f64,
    pub regime: Regime,
    pub mu: f64,
    pub sigma: f64,
    pub tau: f64,
}

impl RadiusReport {
    /// `A` or `A1`, whichever belongs to the regime.
    pub fn regime_constant(&self) -> f64 {
        match self.regime {
            Regime::DualFirst => self.a,
            Regime::PrimalFirst => self.a1,
        }
    }

    /// `max{1/(2 sigma), 1/(2 tau)}`.
    pub fn step_scale(&self) -> f64 {
        (0.5 / self.sigma).max(0.5 / self.tau)
    }
}

pub fn radius_report(
    rho: f64,
    mu: f64,
    norm_l: f64,
    cfg: &StepConfig,
    regime: Regime,
) -> Result<RadiusReport> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "sharpness constant must be positive, got {mu}"
        )));
    }
    validate_steps(cfg, rho, norm_l, regime).map_err(Error::StepsizeViolation)?;
    let StepConfig { sigma, tau, theta } = *cfg;
    let c = (sigma * tau).sqrt() * norm_l;
    let a = ((1.0 - c) / (2.0 * tau)).min((1.0 - sigma * rho - theta * c) / (2.0 * sigma));
    let a1 = ((1.0 - theta * c) / (2.0 * tau)).min((1.0 - sigma * rho - c) / (2.0 * sigma));
    let mut report = RadiusReport {
        a,
        a1,
        ball_radius: f64::NAN,
        regime,
        mu,
        sigma,
        tau,
    };
    let denom = report.step_scale() - report.regime_constant();
    if !(denom > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "nonpositive radius denominator {denom}"
        )));
    }
    report.ball_radius = mu / denom;
    Ok(report)
}

/// `B = max{1/(2 sigma), 1/(2 tau)} / (A + mu / dist0)`; zero when `dist0 = 0`.
pub fn rate_constant_b(report: &RadiusReport, dist0: f64) -> Result<f64> {
    if !(dist0 >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "distance must be nonnegative, got {dist0}"
        )));
    }
    if dist0 >= report.ball_radius {
        return Err(Error::OutOfBall {
            dist: dist0,
            radius: report.ball_radius,
        });
    }
    if dist0 == 0.0 {
        return Ok(0.0);
    }
    Ok(report.step_scale() / (report.regime_constant() + report.mu / dist0))
}

/// Distance bounds `E-` and `E+` for the primal iterates under primal sharpness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonBounds {
    /// `mu^2 sigma tau > (sigma rho + sqrt(sigma tau) |L|) eps^2`.
    pub feasible: bool,
    /// `NaN` when the discriminant is negative.
    pub e_plus: f64,
    pub e_minus: f64,
}

pub fn epsilon_bounds(
    mu: f64,
    rho: f64,
    norm_l: f64,
    sigma: f64,
    tau: f64,
    eps: f64,
) -> EpsilonBounds {
    let k = sigma * rho + (sigma * tau).sqrt() * norm_l;
    let disc = mu * mu - eps * eps * k / (sigma * tau);
    let feasible = mu * mu * sigma * tau > k * eps * eps;
    if disc < 0.0 || k <= 0.0 {
        return EpsilonBounds {
            feasible,
            e_plus: f64::NAN,
            e_minus: f64::NAN,
        };
    }
    let r = disc.sqrt();
    EpsilonBounds {
        feasible,
        e_plus: sigma * (mu + r) / k,
        e_minus: sigma * (mu - r) / k,
    }
}

/// Interval of `sigma` on which both the bound condition and the
/// primal-first stepsize predicate hold, for fixed `tau`. Edges are located
/// by a grid scan and refined by bisection; `None` if no `sigma` qualifies.
pub fn feasibility_interval(
    mu: f64,
    rho: f64,
    norm_l: f64,
    tau: f64,
    eps: f64,
) -> Result<Option<(f64, f64)>> {
    if !(tau > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tau must be positive, got {tau}"
        )));
    }
    let mut sigma_max = f64::INFINITY;
    if rho > 0.0 {
        sigma_max = sigma_max.min(1.0 / rho);
    }
    if norm_l > 0.0 {
        sigma_max = sigma_max.min(1.0 / (tau * norm_l * norm_l));
    }
    if !sigma_max.is_finite() {
        return Err(Error::InvalidArgument(
            "need rho > 0 or |L| > 0 to bound sigma".into(),
        ));
    }
    let ok = |s: f64| {
        epsilon_bounds(mu, rho, norm_l, s, tau, eps).feasible
            && s * rho + (s * tau).sqrt() * norm_l < 1.0
    };
    const SCAN: usize = 20_000;
    let at = |i: usize| sigma_max * i as f64 / SCAN as f64;
    let Some(first) = (1..SCAN).find(|&i| ok(at(i))) else {
        return Ok(None);
    };
    let last = (first..SCAN)
        .take_while(|&i| ok(at(i)))
        .last()
        .unwrap_or(first);
    let bisect = |mut bad: f64, mut good: f64| {
        for _ in 0..200 {
            let mid = 0.5 * (bad + good);
            if ok(mid) {
                good = mid;
            } else {
                bad = mid;
            }
        }
        good
    };
    let lo = bisect(at(first - 1), at(first));
    let hi = bisect(at(last + 1), at(last));
    Ok(Some((lo, hi)))
}

/// `F(x) = f(x) - (rho_g / 2) |Lx|^2`, modulus `rho_f + rho_g |L|^2`.
#[derive(Debug, Clone)]
pub struct ReducedPrimal {
    f: SharedFunction,
    op: Arc<dyn LinearMap>,
    rho_g: f64,
}

impl ProxFunction for ReducedPrimal {
    fn name(&self) -> String {
        format!("{} - {}/2*|Lx|^2", self.f.name(), self.rho_g)
    }
    fn eval(&self, x: ArrayView1<'_, f64>) -> f64 {
        let lx = self.op.apply(x);
        self.f.eval(x) - 0.5 * self.rho_g * lx.dot(&lx)
    }
    fn rho(&self) -> f64 {
        let n = self.op.norm_bound();
        self.f.rho() + self.rho_g * n * n
    }
    fn prox_raw(&self, gamma: f64, v: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        let c = self
            .op
            .as_scalar()
            .ok_or_else(|| Error::ProxUnavailable(self.name()))?;
        QuadraticShift::new(self.f.clone(), -self.rho_g * c * c, None)?.prox(gamma, v)
    }
}

/// Moves the weak concavity of `g` into the primal term: returns
/// `F = f - (rho_g/2)|L.|^2` and the convex `G = g + (rho_g/2)|.|^2`.
pub fn reduce_fully_weakly_convex(
    f: SharedFunction,
    g: SharedFunction,
    op: Arc<dyn LinearMap>,
) -> Result<(SharedFunction, SharedFunction)> {
    let rho_g = g.rho();
    if rho_g == 0.0 {
        return Ok((f, g));
    }
    let big_g: SharedFunction = Arc::new(QuadraticShift::new(g, rho_g, None)?);
    let big_f: SharedFunction = Arc::new(ReducedPrimal { f, op, rho_g });
    Ok((big_f, big_g))
}
