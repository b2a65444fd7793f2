use std::sync::Arc;

use ndarray::{Array1, ArrayView1, Zip};

use super::scalar::{ScalarPenalty, ScalarTerm};
use super::{IntervalBox, ProxFunction, SharedFunction};
use crate::error::{check_dim, Error, Result};

const FEAS_TOL: f64 = 1e-12;

pub fn soft_threshold(v: f64, gamma: f64) -> f64 {
    if v >= gamma {
        v - gamma
    } else if v <= -gamma {
        v + gamma
    } else {
        0.0
    }
}

/// The zero function.
#[derive(Debug, Clone, Copy, Default)]
pub struct Zero;

impl ProxFunction for Zero {
    fn name(&self) -> String {
        "0".into()
    }
    fn eval(&self, _x: ArrayView1<'_, f64>) -> f64 {
        0.0
    }
    fn rho(&self) -> f64 {
        0.0
    }
    fn prox_raw(&self, _gamma: f64, v: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        Ok(v.to_owned())
    }
    fn subdifferential(&self, x: ArrayView1<'_, f64>) -> Option<IntervalBox> {
        Some(IntervalBox::singleton(Array1::zeros(x.len())))
    }
    fn conjugate_value(&self, y: ArrayView1<'_, f64>) -> Option<f64> {
        Some(if y.iter().all(|v| v.abs() <= FEAS_TOL) {
            0.0
        } else {
            f64::INFINITY
        })
    }
}

/// `weight * ||x||_1`.
#[derive(Debug, Clone, Copy)]
pub struct L1Norm {
    pub dim: usize,
    pub weight: f64,
}

pub fn l1_norm(dim: usize) -> L1Norm {
    L1Norm { dim, weight: 1.0 }
}

/// `|x|` on the real line.
pub fn abs_value() -> L1Norm {
    l1_norm(1)
}

impl ProxFunction for L1Norm {
    fn name(&self) -> String {
        format!("{}*|x|_1", self.weight)
    }
    fn eval(&self, x: ArrayView1<'_, f64>) -> f64 {
        self.weight * x.iter().map(|v| v.abs()).sum::<f64>()
    }
    fn rho(&self) -> f64 {
        0.0
    }
    fn prox_raw(&self, gamma: f64, v: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        check_dim(self.dim, v.len())?;
        let t = gamma * self.weight;
        Ok(v.mapv(|x| soft_threshold(x, t)))
    }
    fn subdifferential(&self, x: ArrayView1<'_, f64>) -> Option<IntervalBox> {
        let w = self.weight;
        let lo = x.mapv(|v| if v == 0.0 { -w } else { w * v.signum() });
        let hi = x.mapv(|v| if v == 0.0 { w } else { w * v.signum() });
        Some(IntervalBox { lo, hi })
    }
    fn conjugate_value(&self, y: ArrayView1<'_, f64>) -> Option<f64> {
        let inside = y.iter().all(|v| v.abs() <= self.weight + FEAS_TOL);
        Some(if inside { 0.0 } else { f64::INFINITY })
    }
}

/// `(weight / 2) ||x - b||^2`.
#[derive(Debug, Clone)]
pub struct QuadFit {
    pub b: Array1<f64>,
    pub weight: f64,
}

pub fn quad_fit(b: Array1<f64>, weight: f64) -> Result<QuadFit> {
    if !(weight > 0.0 && weight.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "quad_fit weight must be positive, got {weight}"
        )));
    }
    Ok(QuadFit { b, weight })
}

impl ProxFunction for QuadFit {
    fn name(&self) -> String {
        format!("{}/2*|x-b|^2", self.weight)
    }
    fn eval(&self, x: ArrayView1<'_, f64>) -> f64 {
        0.5 * self.weight * (&x - &self.b).mapv(|d| d * d).sum()
    }
    fn rho(&self) -> f64 {
        0.0
    }
    fn prox_raw(&self, gamma: f64, v: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        check_dim(self.b.len(), v.len())?;
        let gw = gamma * self.weight;
        Ok((&v + &(&self.b * gw)) / (1.0 + gw))
    }
    fn subdifferential(&self, x: ArrayView1<'_, f64>) -> Option<IntervalBox> {
        Some(IntervalBox::singleton((&x - &self.b) * self.weight))
    }
    fn conjugate_value(&self, y: ArrayView1<'_, f64>) -> Option<f64> {
        Some(y.dot(&y) / (2.0 * self.weight) + y.dot(&self.b))
    }
}

/// `weight * | ||x||^2 - c |`, weakly convex with modulus `2 * weight`.
#[derive(Debug, Clone, Copy)]
pub struct AbsNormSqShift {
    pub c: f64,
    pub weight: f64,
}

pub fn abs_norm_sq_shift(c: f64) -> Result<AbsNormSqShift> {
    abs_norm_sq_shift_weighted(c, 1.0)
}

pub fn abs_norm_sq_shift_weighted(c: f64, weight: f64) -> Result<AbsNormSqShift> {
    if !(c >= 0.0 && c.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "shift must be nonnegative, got {c}"
        )));
    }
    if !(weight > 0.0 && weight.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "weight must be positive, got {weight}"
        )));
    }
    Ok(AbsNormSqShift { c, weight })
}

impl AbsNormSqShift {
    /// Radius of the prox output for an input of norm `r` (radial profile).
    pub fn radial_prox(&self, gamma: f64, r: f64) -> f64 {
        let s = gamma * self.weight;
        let r2 = r * r;
        if r2 > (1.0 + 2.0 * s).powi(2) * self.c {
            r / (1.0 + 2.0 * s)
        } else if r2 < (1.0 - 2.0 * s).powi(2) * self.c {
            r / (1.0 - 2.0 * s)
        } else {
            self.c.sqrt()
        }
    }
}

impl ProxFunction for AbsNormSqShift {
    fn name(&self) -> String {
        format!("{}*| |x|^2 - {} |", self.weight, self.c)
    }
    fn eval(&self, x: ArrayView1<'_, f64>) -> f64 {
        self.weight * (x.dot(&x) - self.c).abs()
    }
    fn rho(&self) -> f64 {
        2.0 * self.weight
    }
    fn prox_raw(&self, gamma: f64, v: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        let r = v.dot(&v).sqrt();
        if r == 0.0 {
            // middle band at the origin: zero is a minimizer by symmetry
            return Ok(Array1::zeros(v.len()));
        }
        let target = self.radial_prox(gamma, r);
        Ok(&v * (target / r))
    }
}

/// Sum of per-coordinate scalar penalties.
#[derive(Debug, Clone)]
pub struct Separable {
    coords: Vec<ScalarPenalty>,
    rho: f64,
    label: String,
}

impl Separable {
    pub fn new(coords: Vec<ScalarPenalty>, label: impl Into<String>) -> Self {
        let rho = coords.iter().map(|c| c.rho()).fold(0.0, f64::max);
        Separable {
            coords,
            rho,
            label: label.into(),
        }
    }

    /// The same penalty on every one of `dim` coordinates.
    pub fn uniform(penalty: ScalarPenalty, dim: usize, label: impl Into<String>) -> Self {
        Self::new(vec![penalty; dim], label)
    }

    pub fn coordinate(&self, i: usize) -> &ScalarPenalty {
        &self.coords[i]
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

impl ProxFunction for Separable {
    fn name(&self) -> String {
        self.label.clone()
    }
    fn eval(&self, x: ArrayView1<'_, f64>) -> f64 {
        self.coords
            .iter()
            .zip(x.iter())
            .map(|(p, &u)| p.eval(u))
            .sum()
    }
    fn rho(&self) -> f64 {
        self.rho
    }
    fn prox_raw(&self, gamma: f64, v: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        check_dim(self.coords.len(), v.len())?;
        Ok(Array1::from_iter(
            self.coords
                .iter()
                .zip(v.iter())
                .map(|(p, &u)| p.prox(gamma, u)),
        ))
    }
}

/// `|(x - a)(x - b)|` on the real line, modulus 2.
pub fn abs_quadratic(a: f64, b: f64) -> Result<Separable> {
    if !(a < b) {
        return Err(Error::InvalidArgument(format!(
            "abs_quadratic needs a < b, got a={a}, b={b}"
        )));
    }
    let p = ScalarPenalty::new(vec![ScalarTerm::AbsQuadratic { a, b, weight: 1.0 }])?;
    Ok(Separable::new(vec![p], format!("|(x-{a})(x-{b})|")))
}

/// `weight * ||x - x0||_1`.
pub fn shifted_l1(x0: ArrayView1<'_, f64>, weight: f64) -> Result<Separable> {
    let coords = x0
        .iter()
        .map(|&c| ScalarPenalty::new(vec![ScalarTerm::Abs { center: c, weight }]))
        .collect::<Result<Vec<_>>>()?;
    Ok(Separable::new(coords, format!("{weight}*|x-x0|_1")))
}

/// `weight * ||x^2 - x0^2||_1` with squares taken elementwise, modulus `2 * weight`.
pub fn elementwise_sq_l1(x0: ArrayView1<'_, f64>, weight: f64) -> Result<Separable> {
    let coords = x0
        .iter()
        .map(|&c| {
            let r = c.abs();
            ScalarPenalty::new(vec![ScalarTerm::AbsQuadratic {
                a: -r,
                b: r,
                weight,
            }])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Separable::new(coords, format!("{weight}*|x^2-x0^2|_1")))
}

/// Indicator of the pointwise unit ball over paired components: entry `k` of
/// the first half and entry `k` of the second half form one 2-vector.
#[derive(Debug, Clone, Copy)]
pub struct LinfBallIndicator {
    pub pairs: usize,
    pub radius: f64,
}

pub fn linf_ball_indicator(pairs: usize) -> LinfBallIndicator {
    LinfBallIndicator { pairs, radius: 1.0 }
}

impl LinfBallIndicator {
    /// Largest pointwise magnitude `max_k |(y1_k, y2_k)|`.
    pub fn max_magnitude(&self, y: ArrayView1<'_, f64>) -> f64 {
        let (a, b) = y.split_at(ndarray::Axis(0), self.pairs);
        Zip::from(&a)
            .and(&b)
            .fold(0.0f64, |m, &p, &q| m.max(p.hypot(q)))
    }
}

impl ProxFunction for LinfBallIndicator {
    fn name(&self) -> String {
        "indicator(|y_ij| <= 1)".into()
    }
    fn eval(&self, y: ArrayView1<'_, f64>) -> f64 {
        if self.max_magnitude(y) <= self.radius + FEAS_TOL {
            0.0
        } else {
            f64::INFINITY
        }
    }
    fn rho(&self) -> f64 {
        0.0
    }
    fn prox_raw(&self, _gamma: f64, v: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        check_dim(2 * self.pairs, v.len())?;
        let mut out = v.to_owned();
        let k = self.pairs;
        for i in 0..k {
            let (p, q) = (v[i], v[i + k]);
            let scale = (p.hypot(q) / self.radius).max(1.0);
            out[i] = p / scale;
            out[i + k] = q / scale;
        }
        Ok(out)
    }
}

/// Sum of pointwise magnitudes over paired components, the isotropic total
/// variation of a stacked gradient field. Its conjugate is [`LinfBallIndicator`].
#[derive(Debug, Clone, Copy)]
pub struct GroupL1 {
    pub pairs: usize,
}

pub fn group_l1(pairs: usize) -> GroupL1 {
    GroupL1 { pairs }
}

impl ProxFunction for GroupL1 {
    fn name(&self) -> String {
        "sum_ij |y_ij|".into()
    }
    fn eval(&self, y: ArrayView1<'_, f64>) -> f64 {
        let (a, b) = y.split_at(ndarray::Axis(0), self.pairs);
        Zip::from(&a).and(&b).fold(0.0, |s, &p, &q| s + p.hypot(q))
    }
    fn rho(&self) -> f64 {
        0.0
    }
    fn prox_raw(&self, gamma: f64, v: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        check_dim(2 * self.pairs, v.len())?;
        let mut out = v.to_owned();
        let k = self.pairs;
        for i in 0..k {
            let r = v[i].hypot(v[i + k]);
            let scale = if r > gamma { 1.0 - gamma / r } else { 0.0 };
            out[i] *= scale;
            out[i + k] *= scale;
        }
        Ok(out)
    }
    fn conjugate_value(&self, y: ArrayView1<'_, f64>) -> Option<f64> {
        Some(linf_ball_indicator(self.pairs).eval(y))
    }
}

/// `inner(x) + (weight / 2) ||x - center||^2`; `weight` may be negative.
///
/// The prox folds the quadratic into the proximity term:
/// `prox_{gamma h}(v) = prox_{gamma' inner}(w)` with `gamma' = gamma / (1 + weight gamma)`
/// and `w = gamma' (weight center + v / gamma)`.
#[derive(Debug, Clone)]
pub struct QuadraticShift {
    inner: SharedFunction,
    weight: f64,
    center: Option<Array1<f64>>,
}

impl QuadraticShift {
    /// `center = None` means the origin.
    pub fn new(inner: SharedFunction, weight: f64, center: Option<Array1<f64>>) -> Result<Self> {
        if !weight.is_finite() {
            return Err(Error::InvalidArgument(
                "quadratic weight must be finite".into(),
            ));
        }
        Ok(QuadraticShift {
            inner,
            weight,
            center,
        })
    }

    pub fn inner(&self) -> &SharedFunction {
        &self.inner
    }
}

impl ProxFunction for QuadraticShift {
    fn name(&self) -> String {
        format!("{} + {}/2*|x-c|^2", self.inner.name(), self.weight)
    }
    fn eval(&self, x: ArrayView1<'_, f64>) -> f64 {
        let sq = match &self.center {
            Some(c) => (&x - c).mapv(|d| d * d).sum(),
            None => x.dot(&x),
        };
        self.inner.eval(x) + 0.5 * self.weight * sq
    }
    fn rho(&self) -> f64 {
        (self.inner.rho() - self.weight).max(0.0)
    }
    fn prox_raw(&self, gamma: f64, v: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        let denom = 1.0 + self.weight * gamma;
        if denom <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "stepsize {gamma} too large for quadratic weight {}",
                self.weight
            )));
        }
        let g2 = gamma / denom;
        let w = match &self.center {
            Some(c) => {
                check_dim(c.len(), v.len())?;
                (&(c * (self.weight * gamma)) + &v) / denom
            }
            None => &v / denom,
        };
        self.inner.prox(g2, w.view())
    }
    fn subdifferential(&self, x: ArrayView1<'_, f64>) -> Option<IntervalBox> {
        let base = self.inner.subdifferential(x)?;
        let shift = match &self.center {
            Some(c) => (&x - c) * self.weight,
            None => &x * self.weight,
        };
        Some(IntervalBox {
            lo: base.lo + &shift,
            hi: base.hi + &shift,
        })
    }
}

/// Convenience: wrap any catalog entry as a shared function.
pub fn shared<F: ProxFunction + 'static>(f: F) -> SharedFunction {
    Arc::new(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prox::prox_conjugate;
    use ndarray::array;

    fn close(a: &Array1<f64>, b: &Array1<f64>, tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn abs_value_cases() {
        let f = abs_value();
        assert_eq!(f.prox(0.5, array![2.0].view()).unwrap(), array![1.5]);
        assert_eq!(f.prox(0.25, array![0.25].view()).unwrap(), array![0.0]);
        assert!(close(
            &f.prox(0.3, array![-1.0].view()).unwrap(),
            &array![-0.7],
            1e-15
        ));
    }

    #[test]
    fn l1_componentwise() {
        let f = l1_norm(3);
        assert_eq!(
            f.prox(1.0, array![2.0, -0.5, 0.0].view()).unwrap(),
            array![1.0, 0.0, 0.0]
        );
        assert!(matches!(
            f.prox(1.0, array![1.0].view()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn quad_fit_cases() {
        let f = quad_fit(array![0.0], 1.0).unwrap();
        assert!(close(
            &f.prox(0.5, array![1.0].view()).unwrap(),
            &array![2.0 / 3.0],
            1e-15
        ));
        let f = quad_fit(array![0.3, -1.0], 2.5).unwrap();
        assert!(close(
            &f.prox(0.7, array![0.3, -1.0].view()).unwrap(),
            &array![0.3, -1.0],
            1e-15
        ));
        let f = quad_fit(array![1.0, 1.0], 1.0).unwrap();
        assert_eq!(
            f.prox(1.0, array![3.0, 3.0].view()).unwrap(),
            array![2.0, 2.0]
        );
        assert!(quad_fit(array![1.0], 0.0).is_err());
    }

    #[test]
    fn abs_norm_sq_shift_cases() {
        let f = abs_norm_sq_shift(1.0).unwrap();
        let x = array![1.2, 1.6]; // norm 2
        assert!(close(&f.prox(0.1, x.view()).unwrap(), &(&x / 1.2), 1e-15));
        let x = array![0.6, 0.8]; // norm 1
        assert!(close(&f.prox(0.1, x.view()).unwrap(), &x, 1e-15));
        let f = abs_norm_sq_shift(4.0).unwrap();
        let x = array![0.24, 0.32]; // norm 0.4
        assert!(close(&f.prox(0.2, x.view()).unwrap(), &(&x / 0.6), 1e-15));
        assert!(matches!(
            f.prox(0.5, x.view()),
            Err(Error::StepsizeViolation(_))
        ));
        assert_eq!(
            f.prox(0.2, array![0.0, 0.0].view()).unwrap(),
            array![0.0, 0.0]
        );
        assert!(abs_norm_sq_shift(-1.0).is_err());
    }

    #[test]
    fn abs_quadratic_fixes_roots() {
        let f = abs_quadratic(-0.5, 2.0).unwrap();
        assert_eq!(f.prox(0.3, array![-0.5].view()).unwrap(), array![-0.5]);
        assert_eq!(f.prox(0.3, array![2.0].view()).unwrap(), array![2.0]);
        let s = 2f64.sqrt();
        let f = abs_quadratic(-s, s).unwrap();
        assert_eq!(f.prox(0.2, array![0.0].view()).unwrap(), array![0.0]);
        assert!(f.prox(0.5, array![0.0].view()).is_err());
        assert!(abs_quadratic(1.0, 1.0).is_err());
    }

    #[test]
    fn linf_projection() {
        let f = linf_ball_indicator(1);
        assert_eq!(
            f.prox(1.0, array![0.3, 0.4].view()).unwrap(),
            array![0.3, 0.4]
        );
        assert!(close(
            &f.prox(1.0, array![3.0, 4.0].view()).unwrap(),
            &array![0.6, 0.8],
            1e-15
        ));
        assert_eq!(
            f.prox(1.0, array![0.0, 0.0].view()).unwrap(),
            array![0.0, 0.0]
        );
        assert_eq!(f.eval(array![3.0, 4.0].view()), f64::INFINITY);
    }

    #[test]
    fn group_l1_shrinks_pairs() {
        let g = group_l1(2);
        assert_eq!(g.eval(array![3.0, 0.0, 4.0, 0.0].view()), 5.0);
        let p = g.prox(1.0, array![3.0, 0.1, 4.0, 0.0].view()).unwrap();
        assert!(close(&p, &array![2.4, 0.0, 3.2, 0.0], 1e-15));
        let m = prox_conjugate(&g, 0.5, array![3.0, 0.1, 4.0, 0.0].view()).unwrap();
        let direct = linf_ball_indicator(2)
            .prox(0.5, array![3.0, 0.1, 4.0, 0.0].view())
            .unwrap();
        assert!(close(&m, &direct, 1e-14));
    }

    #[test]
    fn shifted_and_elementwise_l1() {
        let f = shifted_l1(array![1.0, 1.0].view(), 1.0).unwrap();
        assert_eq!(
            f.prox(0.5, array![2.0, 1.0].view()).unwrap(),
            array![1.5, 1.0]
        );
        let f = elementwise_sq_l1(array![0.0].view(), 1.0).unwrap();
        assert!(close(
            &f.prox(0.2, array![0.7].view()).unwrap(),
            &array![0.7 / 1.4],
            1e-15
        ));
        let x0 = array![0.4, -0.9];
        let f = elementwise_sq_l1(x0.view(), 1.0).unwrap();
        assert_eq!(f.rho(), 2.0);
        assert_eq!(f.prox(0.3, x0.view()).unwrap(), x0);
    }

    #[test]
    fn quadratic_shift_matches_direct_formula() {
        // 0 + (w/2)|x-b|^2 must agree with quad_fit
        let b = array![0.5, -1.0];
        let h = QuadraticShift::new(shared(Zero), 3.0, Some(b.clone())).unwrap();
        let q = quad_fit(b, 3.0).unwrap();
        let v = array![2.0, 0.1];
        assert!(close(
            &h.prox(0.4, v.view()).unwrap(),
            &q.prox(0.4, v.view()).unwrap(),
            1e-14
        ));
    }

    #[test]
    fn negative_quadratic_raises_modulus() {
        let h = QuadraticShift::new(shared(Zero), -2.0, None).unwrap();
        assert_eq!(h.rho(), 2.0);
        let h2 = QuadraticShift::new(shared(h), 2.0, None).unwrap();
        assert_eq!(h2.rho(), 0.0);
        assert_eq!(h2.eval(array![1.5, -3.0].view()), 0.0);
    }
}
