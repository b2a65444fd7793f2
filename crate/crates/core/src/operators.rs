//! Bounded linear maps with adjoints and operator-norm bounds.
//!
//! Vectors are flat `Array1<f64>`. Images of side `n` are stored row-major,
//! pixel `(i, j)` at index `i * n + j`. The image gradient stacks its two
//! components: the first `n * n` entries hold the row-direction differences,
//! the next `n * n` the column-direction differences.

use std::fmt;

use ndarray::{Array1, Array2, ArrayView1};

use crate::error::{Error, Result};
use crate::rng;

/// Safety factor applied to power-iteration estimates so that stepsize
/// conditions built on them stay conservative.
pub const NORM_SAFETY: f64 = 1.0 + 1e-6;

/// Iterations used when a map estimates its own norm at construction.
pub const DEFAULT_POWER_ITERS: usize = 200;

const DEFAULT_POWER_SEED: u64 = 0x5eed;

pub trait LinearMap: Send + Sync + fmt::Debug {
    fn in_dim(&self) -> usize;
    fn out_dim(&self) -> usize;
    fn apply(&self, x: ArrayView1<'_, f64>) -> Array1<f64>;
    fn adjoint(&self, y: ArrayView1<'_, f64>) -> Array1<f64>;
    /// Upper estimate of the spectral norm.
    fn norm_bound(&self) -> f64;
    /// `Some(c)` when the map is `c` times the identity.
    fn as_scalar(&self) -> Option<f64> {
        None
    }
}

/// Dense `m x n` matrix.
#[derive(Debug, Clone)]
pub struct MatrixMap {
    a: Array2<f64>,
    norm: f64,
}

impl MatrixMap {
    pub fn new(a: Array2<f64>) -> Result<Self> {
        Self::with_norm_estimate(a, DEFAULT_POWER_ITERS, DEFAULT_POWER_SEED)
    }

    pub fn with_norm_estimate(a: Array2<f64>, iters: usize, seed: u64) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::InvalidArgument("empty matrix".into()));
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "matrix has non-finite entries".into(),
            ));
        }
        let mut map = MatrixMap { a, norm: 0.0 };
        map.norm = power_iteration(&map, iters, seed)?;
        Ok(map)
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.a
    }
}

/// Builds a [`MatrixMap`] whose norm bound comes from [`power_iteration`].
pub fn matrix_map(a: Array2<f64>) -> Result<MatrixMap> {
    MatrixMap::new(a)
}

impl LinearMap for MatrixMap {
    fn in_dim(&self) -> usize {
        self.a.ncols()
    }
    fn out_dim(&self) -> usize {
        self.a.nrows()
    }
    fn apply(&self, x: ArrayView1<'_, f64>) -> Array1<f64> {
        self.a.dot(&x)
    }
    fn adjoint(&self, y: ArrayView1<'_, f64>) -> Array1<f64> {
        self.a.t().dot(&y)
    }
    fn norm_bound(&self) -> f64 {
        self.norm
    }
}

/// `c * I` on a space of dimension `dim`.
#[derive(Debug, Clone, Copy)]
pub struct ScalarMap {
    pub scale: f64,
    pub dim: usize,
}

impl ScalarMap {
    pub fn identity(dim: usize) -> Self {
        ScalarMap { scale: 1.0, dim }
    }
}

impl LinearMap for ScalarMap {
    fn in_dim(&self) -> usize {
        self.dim
    }
    fn out_dim(&self) -> usize {
        self.dim
    }
    fn apply(&self, x: ArrayView1<'_, f64>) -> Array1<f64> {
        &x * self.scale
    }
    fn adjoint(&self, y: ArrayView1<'_, f64>) -> Array1<f64> {
        &y * self.scale
    }
    fn norm_bound(&self) -> f64 {
        self.scale.abs()
    }
    fn as_scalar(&self) -> Option<f64> {
        Some(self.scale)
    }
}

/// Forward-difference image gradient with zero last row/column.
#[derive(Debug, Clone, Copy)]
pub struct GradMap {
    n: usize,
}

pub fn grad_map(n: usize) -> Result<GradMap> {
    if n == 0 {
        return Err(Error::InvalidArgument("image side must be positive".into()));
    }
    Ok(GradMap { n })
}

impl GradMap {
    pub fn side(&self) -> usize {
        self.n
    }

    /// Discrete divergence, the negative adjoint of the gradient: backward
    /// differences with the last row/column of each component truncated.
    pub fn divergence(&self, p: ArrayView1<'_, f64>) -> Array1<f64> {
        let n = self.n;
        let nn = n * n;
        assert_eq!(p.len(), 2 * nn, "divergence input length");
        let (p1, p2) = (p.slice(ndarray::s![..nn]), p.slice(ndarray::s![nn..]));
        let mut out = Array1::zeros(nn);
        for i in 0..n {
            for j in 0..n {
                let k = i * n + j;
                let mut v = 0.0;
                if i + 1 < n {
                    v += p1[k];
                }
                if i > 0 {
                    v -= p1[k - n];
                }
                if j + 1 < n {
                    v += p2[k];
                }
                if j > 0 {
                    v -= p2[k - 1];
                }
                out[k] = v;
            }
        }
        out
    }
}

impl LinearMap for GradMap {
    fn in_dim(&self) -> usize {
        self.n * self.n
    }
    fn out_dim(&self) -> usize {
        2 * self.n * self.n
    }
    fn apply(&self, x: ArrayView1<'_, f64>) -> Array1<f64> {
        let n = self.n;
        let nn = n * n;
        assert_eq!(x.len(), nn, "gradient input length");
        let mut out = Array1::zeros(2 * nn);
        for i in 0..n {
            for j in 0..n {
                let k = i * n + j;
                if i + 1 < n {
                    out[k] = x[k + n] - x[k];
                }
                if j + 1 < n {
                    out[nn + k] = x[k + 1] - x[k];
                }
            }
        }
        out
    }
    fn adjoint(&self, y: ArrayView1<'_, f64>) -> Array1<f64> {
        -self.divergence(y)
    }
    /// Exact norm `2 sqrt(2) cos(pi / 2n)`: the largest eigenvalue of the
    /// Neumann Laplacian on the grid is `8 cos^2(pi / 2n)`.
    fn norm_bound(&self) -> f64 {
        let c = (std::f64::consts::PI / (2.0 * self.n as f64)).cos();
        8f64.sqrt() * c * (1.0 + 1e-12)
    }
}

/// Gaussian blur on an `n x n` image: separable truncated kernel, zero padding.
#[derive(Debug, Clone)]
pub struct GaussianBlurMap {
    n: usize,
    kernel: Vec<f64>,
}

pub fn gaussian_blur_map(n: usize, std: f64) -> Result<GaussianBlurMap> {
    if n == 0 {
        return Err(Error::InvalidArgument("image side must be positive".into()));
    }
    if !(std > 0.0 && std.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "blur std must be positive, got {std}"
        )));
    }
    let radius = (3.0 * std).ceil() as i64;
    let mut kernel: Vec<f64> = (-radius..=radius)
        .map(|t| (-(t * t) as f64 / (2.0 * std * std)).exp())
        .collect();
    let total: f64 = kernel.iter().sum();
    kernel.iter_mut().for_each(|k| *k /= total);
    Ok(GaussianBlurMap { n, kernel })
}

impl GaussianBlurMap {
    pub fn radius(&self) -> usize {
        self.kernel.len() / 2
    }

    pub fn kernel(&self) -> &[f64] {
        &self.kernel
    }

    fn convolve(&self, x: ArrayView1<'_, f64>) -> Array1<f64> {
        let n = self.n;
        assert_eq!(x.len(), n * n, "blur input length");
        let r = self.radius() as isize;
        let mut tmp = Array1::zeros(n * n);
        // rows
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for (t, k) in self.kernel.iter().enumerate() {
                    let jj = j as isize + t as isize - r;
                    if jj >= 0 && (jj as usize) < n {
                        acc += k * x[i * n + jj as usize];
                    }
                }
                tmp[i * n + j] = acc;
            }
        }
        // columns
        let mut out = Array1::zeros(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for (t, k) in self.kernel.iter().enumerate() {
                    let ii = i as isize + t as isize - r;
                    if ii >= 0 && (ii as usize) < n {
                        acc += k * tmp[ii as usize * n + j];
                    }
                }
                out[i * n + j] = acc;
            }
        }
        out
    }
}

impl LinearMap for GaussianBlurMap {
    fn in_dim(&self) -> usize {
        self.n * self.n
    }
    fn out_dim(&self) -> usize {
        self.n * self.n
    }
    fn apply(&self, x: ArrayView1<'_, f64>) -> Array1<f64> {
        self.convolve(x)
    }
    // symmetric kernel with zero padding gives a symmetric matrix
    fn adjoint(&self, y: ArrayView1<'_, f64>) -> Array1<f64> {
        self.convolve(y)
    }
    /// A nonnegative kernel summing to one has norm at most one.
    fn norm_bound(&self) -> f64 {
        1.0
    }
}

/// Power iteration on `L* L` from a seeded Gaussian start.
///
/// Returns the square root of the last Rayleigh quotient times
/// [`NORM_SAFETY`]; a map that annihilates the start returns 0.
pub fn power_iteration(map: &dyn LinearMap, iters: usize, seed: u64) -> Result<f64> {
    let trace = rayleigh_estimates(map, iters, seed)?;
    let last = trace.last().copied().unwrap_or(0.0);
    Ok(last.max(0.0).sqrt() * NORM_SAFETY)
}

/// The Rayleigh quotients `<x_k, L* L x_k>` produced by power iteration.
pub fn rayleigh_estimates(map: &dyn LinearMap, iters: usize, seed: u64) -> Result<Vec<f64>> {
    if iters == 0 {
        return Err(Error::InvalidArgument(
            "power iteration needs iters >= 1".into(),
        ));
    }
    let mut s = rng::stream(seed);
    let mut x = rng::gaussian_vec(&mut s, map.in_dim());
    let nx = x.dot(&x).sqrt();
    if nx == 0.0 {
        return Ok(vec![0.0]);
    }
    x /= nx;
    let mut out = Vec::with_capacity(iters);
    for _ in 0..iters {
        let w = map.adjoint(map.apply(x.view()).view());
        let lambda = x.dot(&w);
        out.push(lambda);
        let nw = w.dot(&w).sqrt();
        if nw == 0.0 {
            break;
        }
        x = w / nw;
    }
    Ok(out)
}
