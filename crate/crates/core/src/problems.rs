//! Experiment builders: one-dimensional saddle examples, sparse recovery,
//! deblurring and total-variation denoising, with noise and PSNR helpers.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use ndarray::{Array1, ArrayView1};
use rand::Rng;

use crate::error::{check_dim, Error, Result};
use crate::image::ImageGrid;
use crate::operators::{
    gaussian_blur_map, grad_map, LinearMap, MatrixMap, ScalarMap, DEFAULT_POWER_ITERS,
};
use crate::prox::{
    abs_norm_sq_shift, abs_norm_sq_shift_weighted, abs_value, elementwise_sq_l1, group_l1, l1_norm,
    linf_ball_indicator, quad_fit, shared, shifted_l1, QuadraticShift, ScalarPenalty, ScalarTerm,
    Separable, SharedFunction,
};
use crate::rng;
use crate::saddle::{epsilon_bounds, GridBox, Point, SaddleProblem};
use crate::solver::{
    solve, validate_steps, IterateTrace, Observer, Regime, SolveOptions, StepConfig,
};

/// PSNR reported for identical images.
pub const PSNR_CAP: f64 = 99.0;

/// Half-width of the inside-ball start box of the weakly convex example.
pub const INSIDE_BOX: f64 = 0.3199;

#[derive(Debug, Clone, PartialEq)]
pub enum StartPolicy {
    Zeros,
    /// Every coordinate of `x` and `y` uniform in `[-half, half]`.
    Box {
        half: f64,
    },
    /// `x0 = scale * x* / |x*|` for the first primal solution, `y0 = 0`.
    ScaledSolution {
        scale: f64,
    },
    Fixed(Point),
}

/// Clean and observed images of an imaging experiment.
#[derive(Debug, Clone)]
pub struct ImageContext {
    pub side: usize,
    pub clean: Array1<f64>,
    pub observed: Array1<f64>,
}

#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub name: String,
    pub problem: Arc<SaddleProblem>,
    pub steps: StepConfig,
    pub regime: Regime,
    pub start: StartPolicy,
    pub iters: usize,
    pub seed: Option<u64>,
    /// Default sharpness constant.
    pub mu: Option<f64>,
    /// Default box for sharpness scans.
    pub sharpness_box: Option<GridBox>,
    pub image: Option<ImageContext>,
    /// Extra metadata, such as model parameters.
    pub notes: Vec<(String, String)>,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        validate_steps(
            &self.steps,
            self.problem.rho(),
            self.problem.norm_l(),
            self.regime,
        )
        .map_err(Error::StepsizeViolation)
    }

    /// Whether the start or the data depend on the seed.
    pub fn randomized(&self) -> bool {
        matches!(self.start, StartPolicy::Box { .. }) || self.notes.iter().any(|(k, _)| k == "data")
    }

    /// Start `index`, drawn from an independent sub-stream of the seed.
    pub fn start_point(&self, index: usize) -> Result<Point> {
        let (nx, ny) = (self.problem.op.in_dim(), self.problem.op.out_dim());
        match &self.start {
            StartPolicy::Zeros => Ok((Array1::zeros(nx), Array1::zeros(ny))),
            StartPolicy::Box { half } => {
                let seed = self
                    .seed
                    .ok_or_else(|| Error::InvalidArgument("random starts need a seed".into()))?;
                let mut s = rng::substream(seed, index as u64 + 1);
                let x = rng::uniform_vec(&mut s, nx, -half, *half);
                let y = rng::uniform_vec(&mut s, ny, -half, *half);
                Ok((x, y))
            }
            StartPolicy::ScaledSolution { scale } => {
                let xs = self
                    .problem
                    .primal_solutions
                    .as_ref()
                    .and_then(|v| v.first())
                    .ok_or_else(|| {
                        Error::InvalidArgument("scaled start needs a primal solution".into())
                    })?;
                let norm = xs.dot(xs).sqrt();
                if norm == 0.0 {
                    return Err(Error::InvalidArgument("primal solution is zero".into()));
                }
                Ok((xs * (*scale / norm), Array1::zeros(ny)))
            }
            StartPolicy::Fixed(z) => {
                check_dim(nx, z.0.len())?;
                check_dim(ny, z.1.len())?;
                Ok(z.clone())
            }
        }
    }

    pub fn options(&self) -> SolveOptions {
        SolveOptions {
            seed: self.seed,
            ..SolveOptions::iters(self.iters)
        }
    }

    /// Solves from start `index` with the spec's defaults.
    pub fn run(&self, index: usize, obs: impl Observer) -> Result<IterateTrace> {
        let z0 = self.start_point(index)?;
        solve(
            &self.problem,
            &self.steps,
            self.regime,
            &z0,
            &self.options(),
            obs,
        )
    }
}

/// `tau = min{0.99, (1 - sigma rho)^2 / (|L|^2 sigma)}`, shrunk by `1e-6` so
/// the strict coupling predicate holds rather than sitting on its boundary.
/// With `sigma rho >= 1` no `tau` is admissible and the plain cap is
/// returned, leaving the primal predicate to report the violation.
pub fn tau_rule(sigma: f64, rho: f64, norm_l: f64) -> f64 {
    let slack = 1.0 - sigma * rho;
    let cap = if norm_l > 0.0 && slack > 0.0 {
        slack * slack / (norm_l * norm_l * sigma)
    } else {
        f64::INFINITY
    };
    0.99f64.min(cap) * (1.0 - 1e-6)
}

fn origin_saddle(f: SharedFunction, gstar: SharedFunction, scale: f64) -> Result<SaddleProblem> {
    SaddleProblem::new(f, gstar, Arc::new(ScalarMap { scale, dim: 1 }))
        .with_saddle_set(vec![(Array1::zeros(1), Array1::zeros(1))])
}

#[allow(clippy::too_many_arguments)]
fn scalar_example(
    name: &str,
    problem: SaddleProblem,
    steps: StepConfig,
    half: f64,
    iters: usize,
    mu: f64,
    sharp: f64,
    seed: Option<u64>,
) -> ExperimentSpec {
    ExperimentSpec {
        name: name.into(),
        problem: Arc::new(problem),
        steps,
        regime: Regime::DualFirst,
        start: StartPolicy::Box { half },
        iters,
        seed,
        mu: Some(mu),
        sharpness_box: Some(GridBox::square(-sharp, sharp)),
        image: None,
        notes: Vec::new(),
    }
}

const ABS_STEPS: StepConfig = StepConfig {
    sigma: 0.75,
    tau: 0.25,
    theta: 1.0,
};
const QUARTIC_STEPS: StepConfig = StepConfig {
    sigma: 0.35,
    tau: 0.25,
    theta: 1.0,
};

/// `K(x, y) = |x| - |y|` (no coupling).
pub fn example_abs_difference(seed: Option<u64>) -> Result<ExperimentSpec> {
    let p = origin_saddle(shared(abs_value()), shared(abs_value()), 0.0)?;
    Ok(scalar_example(
        "example1", p, ABS_STEPS, 10.0, 2001, 1.0, 5.0, seed,
    ))
}

/// `L(x, y) = |x| + xy - y^2 / 8`.
pub fn example_abs_quadratic_dual(seed: Option<u64>) -> Result<ExperimentSpec> {
    let gstar = shared(quad_fit(Array1::zeros(1), 0.25)?);
    let p = origin_saddle(shared(abs_value()), gstar, 1.0)?;
    Ok(scalar_example(
        "example2", p, ABS_STEPS, 10.0, 2001, 1.0, 1.0, seed,
    ))
}

/// `L(x, y) = |x| + xy - |y|`.
pub fn example_abs_bilinear(seed: Option<u64>) -> Result<ExperimentSpec> {
    let p = origin_saddle(shared(abs_value()), shared(abs_value()), 1.0)?;
    Ok(scalar_example(
        "example3", p, ABS_STEPS, 10.0, 2001, 1.0, 3.0, seed,
    ))
}

/// `|u| + |u^2 - c|` on the real line.
pub fn abs_plus_abs_quadratic(c: f64) -> Result<Separable> {
    let r = c.sqrt();
    let p = ScalarPenalty::new(vec![
        ScalarTerm::Abs {
            center: 0.0,
            weight: 1.0,
        },
        ScalarTerm::AbsQuadratic {
            a: -r,
            b: r,
            weight: 1.0,
        },
    ])?;
    Ok(Separable::new(vec![p], format!("|x|+|x^2-{c}|")))
}

/// Where the weakly convex example draws its starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuarticStart {
    /// `[-0.3199, 0.3199]^2`
    Inside,
    /// `[-10, 10]^2`
    Outside,
}

/// `L(x, y) = |x| + |x^2 - 2| + xy - |y| - |y^2 - 2|`.
pub fn example_wc_quartic(start: QuarticStart, seed: Option<u64>) -> Result<ExperimentSpec> {
    quartic("example4", 2.0, start, seed, 0.9)
}

/// `K(x, y) = |x| + |x^2 - 1| + xy - |y| - |y^2 - 1|`.
pub fn example_wc_quartic_variant(
    start: QuarticStart,
    seed: Option<u64>,
) -> Result<ExperimentSpec> {
    quartic("example4-variant", 1.0, start, seed, 1.0)
}

fn quartic(
    name: &str,
    c: f64,
    start: QuarticStart,
    seed: Option<u64>,
    mu: f64,
) -> Result<ExperimentSpec> {
    let h = shared(abs_plus_abs_quadratic(c)?);
    let p = origin_saddle(h.clone(), h, 1.0)?;
    let half = match start {
        QuarticStart::Inside => INSIDE_BOX,
        QuarticStart::Outside => 10.0,
    };
    Ok(scalar_example(
        name,
        p,
        QUARTIC_STEPS,
        half,
        200,
        mu,
        2.0,
        seed,
    ))
}

/// Noise recipes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseKind {
    /// `eps * N(0, 1)` entrywise.
    Gaussian { eps: f64 },
    /// `scale * U[-range, range)` entrywise.
    UniformScaled { range: f64, scale: f64 },
    /// Every entry equal to `c`.
    Constant(f64),
}

pub fn make_noise(kind: NoiseKind, seed: u64, dim: usize) -> Array1<f64> {
    let mut s = rng::stream(seed);
    match kind {
        NoiseKind::Gaussian { eps } => rng::gaussian_vec(&mut s, dim) * eps,
        NoiseKind::UniformScaled { range, scale } => {
            if range > 0.0 {
                rng::uniform_vec(&mut s, dim, -range, range) * scale
            } else {
                Array1::zeros(dim)
            }
        }
        NoiseKind::Constant(c) => Array1::from_elem(dim, c),
    }
}

/// `10 log10(1 / MSE)` for intensities in `[0, 1]`; capped at [`PSNR_CAP`].
pub fn psnr(reference: ArrayView1<'_, f64>, test: ArrayView1<'_, f64>) -> Result<f64> {
    check_dim(reference.len(), test.len())?;
    if reference.is_empty() {
        return Err(Error::InvalidArgument("empty image".into()));
    }
    let mse = reference
        .iter()
        .zip(test.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / reference.len() as f64;
    if mse == 0.0 {
        return Ok(PSNR_CAP);
    }
    Ok((10.0 * (1.0 / mse).log10()).min(PSNR_CAP))
}

/// Noise model of the sparse-recovery data `b = A x* + delta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum L1Noise {
    /// `delta` constant in every entry.
    Constant(f64),
    /// `delta = |A x*| U` with `U` uniform in `[-range, range)`.
    UniformScaled(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum L1Start {
    Zeros,
    /// `x0 = E0+ x* / |x*|`.
    Warm,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L1Config {
    pub n: usize,
    pub m: usize,
    pub density: f64,
    pub noise: L1Noise,
    pub sigma: f64,
    pub seed: u64,
    pub start: L1Start,
    pub iters: usize,
    /// Constants of the warm-start distance `E0+`.
    pub mu: f64,
    pub rho: f64,
    pub eps0_sq: f64,
}

impl L1Config {
    pub fn desk(seed: u64) -> Self {
        L1Config {
            n: 300,
            m: 200,
            density: 0.1,
            noise: L1Noise::Constant(0.1),
            sigma: 0.1,
            seed,
            start: L1Start::Zeros,
            iters: 5000,
            mu: 0.99,
            rho: 2.0,
            eps0_sq: 1e-7,
        }
    }
}

/// Random data of a sparse-recovery instance.
#[derive(Debug, Clone)]
pub struct L1Data {
    pub a: Arc<MatrixMap>,
    pub x_star: Array1<f64>,
    pub b: Array1<f64>,
}

pub fn l1_data(cfg: &L1Config) -> Result<L1Data> {
    if !(cfg.density > 0.0 && cfg.density <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "density must lie in (0, 1], got {}",
            cfg.density
        )));
    }
    if cfg.n == 0 || cfg.m == 0 {
        return Err(Error::InvalidArgument("n and m must be positive".into()));
    }
    let mut s = rng::stream(cfg.seed);
    let a = rng::gaussian_matrix(&mut s, cfg.m, cfg.n);
    let k = ((cfg.density * cfg.n as f64).round() as usize).clamp(1, cfg.n);
    let mut x_star = Array1::zeros(cfg.n);
    for i in rand::seq::index::sample(&mut s, cfg.n, k) {
        x_star[i] = s.random_range(0.0..1.0);
    }
    let a = Arc::new(MatrixMap::with_norm_estimate(
        a,
        DEFAULT_POWER_ITERS,
        cfg.seed,
    )?);
    let ax = a.apply(x_star.view());
    let delta = match cfg.noise {
        L1Noise::Constant(c) => make_noise(NoiseKind::Constant(c), cfg.seed, cfg.m),
        L1Noise::UniformScaled(r) => {
            let scale = ax.dot(&ax).sqrt();
            make_noise(
                NoiseKind::UniformScaled { range: r, scale },
                cfg.seed.wrapping_add(1),
                cfg.m,
            )
        }
    };
    let b = &ax + &delta;
    Ok(L1Data { a, x_star, b })
}

/// `E0+` with the weakly convex model's stepsizes, shared by both models so
/// their warm starts coincide.
pub fn l1_warm_distance(cfg: &L1Config, norm_a: f64) -> f64 {
    let tau = tau_rule(cfg.sigma, cfg.rho, norm_a);
    epsilon_bounds(cfg.mu, cfg.rho, norm_a, cfg.sigma, tau, cfg.eps0_sq.sqrt()).e_plus
}

fn l1_spec(name: &str, f: SharedFunction, data: L1Data, cfg: &L1Config) -> Result<ExperimentSpec> {
    let norm_a = data.a.norm_bound();
    let g = shared(quad_fit(data.b.clone(), 1.0)?);
    let op: Arc<dyn LinearMap> = data.a.clone();
    let problem =
        SaddleProblem::from_g(f, g, op)?.with_primal_solutions(vec![data.x_star.clone()])?;
    let rho = problem.rho();
    let steps = StepConfig {
        sigma: cfg.sigma,
        tau: tau_rule(cfg.sigma, rho, norm_a),
        theta: 1.0,
    };
    let start = match cfg.start {
        L1Start::Zeros => StartPolicy::Zeros,
        L1Start::Warm => StartPolicy::ScaledSolution {
            scale: l1_warm_distance(cfg, norm_a),
        },
    };
    Ok(ExperimentSpec {
        name: name.into(),
        problem: Arc::new(problem),
        steps,
        regime: Regime::PrimalFirst,
        start,
        iters: cfg.iters,
        seed: Some(cfg.seed),
        mu: None,
        sharpness_box: None,
        image: None,
        notes: vec![
            (
                "data".into(),
                format!("n={} m={} density={}", cfg.n, cfg.m, cfg.density),
            ),
            ("norm_a".into(), norm_a.to_string()),
        ],
    })
}

/// `min |x|_1 + |Ax - b|^2 / 2`.
pub fn l1_convex(cfg: &L1Config) -> Result<ExperimentSpec> {
    let data = l1_data(cfg)?;
    l1_spec("l1", shared(l1_norm(cfg.n)), data, cfg)
}

/// `min | |x|^2 - |x*|^2 | + |Ax - b|^2 / 2`.
pub fn l1_weakly_convex(cfg: &L1Config) -> Result<ExperimentSpec> {
    let data = l1_data(cfg)?;
    let c = data.x_star.dot(&data.x_star);
    l1_spec("l1wc", shared(abs_norm_sq_shift(c)?), data, cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeblurModel {
    /// `|Ax - b|^2 / 2 + |x|_1`
    Convex,
    /// `| |x|^2 - |x0|^2 | + |Ax - b|^2 / 2`
    WeaklyConvex,
}

impl fmt::Display for DeblurModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            DeblurModel::Convex => "convex",
            DeblurModel::WeaklyConvex => "wc",
        })
    }
}

impl FromStr for DeblurModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "convex" => Ok(DeblurModel::Convex),
            "wc" | "weakly-convex" => Ok(DeblurModel::WeaklyConvex),
            _ => Err(Error::InvalidArgument(format!(
                "unknown deblur model '{s}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeblurConfig {
    pub model: DeblurModel,
    pub std: f64,
    pub eps_noise: f64,
    pub seed: u64,
    pub sigma: f64,
    pub iters: usize,
}

impl DeblurConfig {
    pub fn new(model: DeblurModel, seed: u64) -> Self {
        DeblurConfig {
            model,
            std: 4.0,
            eps_noise: 0.01,
            seed,
            sigma: 0.1,
            iters: 1000,
        }
    }
}

pub fn deblur_spec(image: &ImageGrid, cfg: &DeblurConfig) -> Result<ExperimentSpec> {
    let n = image.n;
    let blur = Arc::new(gaussian_blur_map(n, cfg.std)?);
    let x0 = &image.pixels;
    let b = blur.apply(x0.view())
        + make_noise(NoiseKind::Gaussian { eps: cfg.eps_noise }, cfg.seed, n * n);
    let f: SharedFunction = match cfg.model {
        DeblurModel::Convex => shared(l1_norm(n * n)),
        DeblurModel::WeaklyConvex => shared(abs_norm_sq_shift(x0.dot(x0))?),
    };
    let g = shared(quad_fit(b.clone(), 1.0)?);
    let op: Arc<dyn LinearMap> = blur;
    let op_out = op.out_dim();
    let problem = SaddleProblem::from_g(f, g, op)?.with_primal_solutions(vec![x0.clone()])?;
    let steps = StepConfig {
        sigma: cfg.sigma,
        tau: tau_rule(cfg.sigma, problem.rho(), problem.norm_l()),
        theta: 1.0,
    };
    Ok(ExperimentSpec {
        name: "deblur".into(),
        problem: Arc::new(problem),
        steps,
        regime: Regime::PrimalFirst,
        start: StartPolicy::Fixed((b.clone(), Array1::zeros(op_out))),
        iters: cfg.iters,
        seed: Some(cfg.seed),
        mu: None,
        sharpness_box: None,
        image: Some(ImageContext {
            side: n,
            clean: x0.clone(),
            observed: b,
        }),
        notes: vec![
            ("model".into(), cfg.model.to_string()),
            ("std".into(), cfg.std.to_string()),
            ("eps".into(), cfg.eps_noise.to_string()),
        ],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TvModel {
    /// `(l/2)|x - b|^2`
    Convex,
    /// `l | |x|^2 - t |` with a scalar target `t`
    Wc1,
    /// `| |x|^2 - |x0|^2 | + (l/2)|x - b|^2`
    Wc2,
    /// `|x - x0|_1 + (l/2)|x - b|^2`
    Wc3,
    /// `|x^2 - x0^2|_1 + (l/2)|x - b|^2`
    Wc4,
}

impl TvModel {
    pub const ALL: [TvModel; 5] = [
        TvModel::Convex,
        TvModel::Wc1,
        TvModel::Wc2,
        TvModel::Wc3,
        TvModel::Wc4,
    ];

    pub fn default_lambda(self) -> f64 {
        match self {
            TvModel::Wc1 => 1.0,
            _ => 8.0,
        }
    }
}

impl fmt::Display for TvModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            TvModel::Convex => "convex",
            TvModel::Wc1 => "wc1",
            TvModel::Wc2 => "wc2",
            TvModel::Wc3 => "wc3",
            TvModel::Wc4 => "wc4",
        })
    }
}

impl FromStr for TvModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "").as_str() {
            "convex" => Ok(TvModel::Convex),
            "wc1" => Ok(TvModel::Wc1),
            "wc2" => Ok(TvModel::Wc2),
            "wc3" => Ok(TvModel::Wc3),
            "wc4" => Ok(TvModel::Wc4),
            _ => Err(Error::InvalidArgument(format!("unknown TV model '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TvConfig {
    pub model: TvModel,
    /// Defaults to [`TvModel::default_lambda`].
    pub lambda: Option<f64>,
    pub noise_sigma: f64,
    pub seed: u64,
    pub sigma: f64,
    pub iters: usize,
    /// Scalar target of WC-1; defaults to `|b|^2`.
    pub wc1_target: Option<f64>,
}

impl TvConfig {
    pub fn new(model: TvModel, seed: u64) -> Self {
        TvConfig {
            model,
            lambda: None,
            noise_sigma: 0.1,
            seed,
            sigma: 0.1,
            iters: 2000,
            wc1_target: None,
        }
    }
}

pub fn tv_spec(image: &ImageGrid, cfg: &TvConfig) -> Result<ExperimentSpec> {
    let n = image.n;
    let dim = n * n;
    let x0 = &image.pixels;
    let b = x0
        + &make_noise(
            NoiseKind::Gaussian {
                eps: cfg.noise_sigma,
            },
            cfg.seed,
            dim,
        );
    let lambda = cfg.lambda.unwrap_or(cfg.model.default_lambda());
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    let fit = |inner: SharedFunction| -> Result<SharedFunction> {
        Ok(shared(QuadraticShift::new(inner, lambda, Some(b.clone()))?))
    };
    let mut notes = vec![
        ("model".into(), cfg.model.to_string()),
        ("lambda".into(), lambda.to_string()),
    ];
    let f: SharedFunction = match cfg.model {
        TvModel::Convex => shared(quad_fit(b.clone(), lambda)?),
        TvModel::Wc1 => {
            let t = cfg.wc1_target.unwrap_or_else(|| b.dot(&b));
            notes.push(("target".into(), t.to_string()));
            shared(abs_norm_sq_shift_weighted(t, lambda)?)
        }
        TvModel::Wc2 => fit(shared(abs_norm_sq_shift(x0.dot(x0))?))?,
        TvModel::Wc3 => fit(shared(shifted_l1(x0.view(), 1.0)?))?,
        TvModel::Wc4 => fit(shared(elementwise_sq_l1(x0.view(), 1.0)?))?,
    };
    let op: Arc<dyn LinearMap> = Arc::new(grad_map(n)?);
    let op_out = op.out_dim();
    let problem = SaddleProblem::new(f, shared(linf_ball_indicator(dim)), op)
        .with_g(shared(group_l1(dim)))
        .with_primal_solutions(vec![x0.clone()])?;
    let steps = StepConfig {
        sigma: cfg.sigma,
        tau: tau_rule(cfg.sigma, problem.rho(), problem.norm_l()),
        theta: 1.0,
    };
    Ok(ExperimentSpec {
        name: "tv".into(),
        problem: Arc::new(problem),
        steps,
        regime: Regime::PrimalFirst,
        start: StartPolicy::Fixed((b.clone(), Array1::zeros(op_out))),
        iters: cfg.iters,
        seed: Some(cfg.seed),
        mu: None,
        sharpness_box: None,
        image: Some(ImageContext {
            side: n,
            clean: x0.clone(),
            observed: b,
        }),
        notes,
    })
}

/// Names accepted by [`experiment`].
pub const KNOWN_EXPERIMENTS: [&str; 7] = [
    "example1",
    "example2",
    "example3",
    "example4",
    "example4-variant",
    "l1",
    "l1wc",
];

/// Start choices understood by [`experiment`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StartChoice {
    Zeros,
    Random,
    Inside,
    Outside,
    Warm,
}

impl FromStr for StartChoice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zeros" => Ok(StartChoice::Zeros),
            "random" => Ok(StartChoice::Random),
            "inside" => Ok(StartChoice::Inside),
            "outside" => Ok(StartChoice::Outside),
            "warm" => Ok(StartChoice::Warm),
            _ => Err(Error::InvalidArgument(format!(
                "unknown start policy '{s}'"
            ))),
        }
    }
}

/// Overrides for [`experiment`]; `None` keeps the experiment default.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ExperimentParams {
    pub seed: Option<u64>,
    pub start: Option<StartChoice>,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub density: Option<f64>,
    pub noise: Option<L1Noise>,
    pub sigma: Option<f64>,
}

fn unknown(name: &str) -> Error {
    Error::UnknownExperiment {
        name: name.into(),
        known: KNOWN_EXPERIMENTS.join(", "),
    }
}

/// Builds a named experiment.
pub fn experiment(name: &str, params: &ExperimentParams) -> Result<ExperimentSpec> {
    let seed = params.seed;
    let bad_start =
        |c: StartChoice| Error::InvalidArgument(format!("start {c:?} does not apply to {name}"));
    let mut spec = match name {
        "example1" | "example2" | "example3" => {
            let mut spec = match name {
                "example1" => example_abs_difference(seed)?,
                "example2" => example_abs_quadratic_dual(seed)?,
                _ => example_abs_bilinear(seed)?,
            };
            match params.start {
                None | Some(StartChoice::Random) => {}
                Some(StartChoice::Zeros) => spec.start = StartPolicy::Zeros,
                Some(c) => return Err(bad_start(c)),
            }
            spec
        }
        "example4" | "example4-variant" => {
            let start = match params.start {
                None | Some(StartChoice::Inside) | Some(StartChoice::Random) => {
                    QuarticStart::Inside
                }
                Some(StartChoice::Outside) => QuarticStart::Outside,
                Some(c) => return Err(bad_start(c)),
            };
            if name == "example4" {
                example_wc_quartic(start, seed)?
            } else {
                example_wc_quartic_variant(start, seed)?
            }
        }
        "l1" | "l1wc" => {
            let seed =
                seed.ok_or_else(|| Error::InvalidArgument(format!("{name} needs a seed")))?;
            let mut cfg = L1Config::desk(seed);
            cfg.n = params.n.unwrap_or(cfg.n);
            cfg.m = params.m.unwrap_or(cfg.m);
            cfg.density = params.density.unwrap_or(cfg.density);
            cfg.noise = params.noise.unwrap_or(cfg.noise);
            cfg.sigma = params.sigma.unwrap_or(cfg.sigma);
            cfg.start = match params.start {
                None | Some(StartChoice::Zeros) => L1Start::Zeros,
                Some(StartChoice::Warm) => L1Start::Warm,
                Some(c) => return Err(bad_start(c)),
            };
            if name == "l1" {
                l1_convex(&cfg)?
            } else {
                l1_weakly_convex(&cfg)?
            }
        }
        _ => return Err(unknown(name)),
    };
    if let (Some(s), false) = (params.sigma, name.starts_with("l1")) {
        spec.steps.sigma = s;
    }
    Ok(spec)
}
