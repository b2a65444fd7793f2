//! Scalar penalties built from absolute-value and quadratic pieces.
//!
//! A [`ScalarPenalty`] is a finite sum of [`ScalarTerm`]s. Between consecutive
//! kinks it is a single quadratic, so its proximal map is solved exactly by
//! minimizing `h(u) + (u - v)^2 / (2 gamma)` on every piece and keeping the best
//! candidate.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalarTerm {
    /// `weight * |u - center|`
    Abs { center: f64, weight: f64 },
    /// `weight * |(u - a)(u - b)|`, `a <= b`
    AbsQuadratic { a: f64, b: f64, weight: f64 },
    /// `(weight / 2) * (u - center)^2`
    Quadratic { center: f64, weight: f64 },
}

impl ScalarTerm {
    fn eval(&self, u: f64) -> f64 {
        match *self {
            ScalarTerm::Abs { center, weight } => weight * (u - center).abs(),
            ScalarTerm::AbsQuadratic { a, b, weight } => weight * ((u - a) * (u - b)).abs(),
            ScalarTerm::Quadratic { center, weight } => 0.5 * weight * (u - center).powi(2),
        }
    }

    fn kinks(&self, out: &mut Vec<f64>) {
        match *self {
            ScalarTerm::Abs { center, .. } => out.push(center),
            ScalarTerm::AbsQuadratic { a, b, .. } => {
                out.push(a);
                out.push(b);
            }
            ScalarTerm::Quadratic { .. } => {}
        }
    }

    /// Coefficients `(c2, c1)` of `c2 u^2 + c1 u + const` on a piece containing `probe`.
    fn local_quadratic(&self, probe: f64) -> (f64, f64) {
        match *self {
            ScalarTerm::Abs { center, weight } => {
                let s = if probe >= center { 1.0 } else { -1.0 };
                (0.0, s * weight)
            }
            ScalarTerm::AbsQuadratic { a, b, weight } => {
                let s = if (probe - a) * (probe - b) >= 0.0 {
                    1.0
                } else {
                    -1.0
                };
                (s * weight, -s * weight * (a + b))
            }
            ScalarTerm::Quadratic { center, weight } => (0.5 * weight, -weight * center),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            ScalarTerm::Abs { center, weight } => {
                center.is_finite() && weight >= 0.0 && weight.is_finite()
            }
            ScalarTerm::AbsQuadratic { a, b, weight } => {
                a.is_finite() && b.is_finite() && a <= b && weight >= 0.0 && weight.is_finite()
            }
            ScalarTerm::Quadratic { center, weight } => center.is_finite() && weight.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "invalid scalar term {self:?}"
            )))
        }
    }
}

/// Sum of scalar terms with its piece decomposition precomputed.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarPenalty {
    terms: Vec<ScalarTerm>,
    kinks: Vec<f64>,
    rho: f64,
}

impl ScalarPenalty {
    pub fn new(terms: Vec<ScalarTerm>) -> Result<Self> {
        for t in &terms {
            t.validate()?;
        }
        let mut kinks = Vec::new();
        terms.iter().for_each(|t| t.kinks(&mut kinks));
        kinks.sort_by(|a, b| a.total_cmp(b));
        kinks.dedup();
        let mut p = ScalarPenalty {
            terms,
            kinks,
            rho: 0.0,
        };
        // Kinks of |q| are convex, so the modulus comes from the most concave piece.
        let worst = p
            .piece_probes()
            .map(|probe| p.coefficients(probe).0)
            .fold(f64::INFINITY, f64::min);
        p.rho = (-2.0 * worst).max(0.0);
        Ok(p)
    }

    pub fn terms(&self) -> &[ScalarTerm] {
        &self.terms
    }

    pub fn eval(&self, u: f64) -> f64 {
        self.terms.iter().map(|t| t.eval(u)).sum()
    }

    /// Weak-convexity modulus: `h + (rho/2) u^2` is convex.
    pub fn rho(&self) -> f64 {
        self.rho
    }

    fn coefficients(&self, probe: f64) -> (f64, f64) {
        self.terms.iter().fold((0.0, 0.0), |(a, b), t| {
            let (c2, c1) = t.local_quadratic(probe);
            (a + c2, b + c1)
        })
    }

    /// One interior point per piece.
    fn piece_probes(&self) -> impl Iterator<Item = f64> + '_ {
        let k = &self.kinks;
        let first = k.first().map(|&a| a - 1.0).unwrap_or(0.0);
        let last = k.last().map(|&b| b + 1.0);
        std::iter::once(first)
            .chain(k.windows(2).map(|w| 0.5 * (w[0] + w[1])))
            .chain(last)
    }

    fn pieces(&self) -> Vec<(f64, f64)> {
        let mut bounds = Vec::with_capacity(self.kinks.len() + 2);
        bounds.push(f64::NEG_INFINITY);
        bounds.extend_from_slice(&self.kinks);
        bounds.push(f64::INFINITY);
        bounds.windows(2).map(|w| (w[0], w[1])).collect()
    }

    /// Exact minimizer of `h(u) + (u - v)^2 / (2 gamma)`, assuming `gamma * rho < 1`.
    ///
    /// Candidates are the clipped stationary point of every piece plus the
    /// kinks; ties go to the candidate nearest `v`.
    pub fn prox(&self, gamma: f64, v: f64) -> f64 {
        let objective = |u: f64| self.eval(u) + (u - v) * (u - v) / (2.0 * gamma);
        let mut best = f64::NAN;
        let mut best_val = f64::INFINITY;
        let mut consider = |u: f64| {
            if !u.is_finite() {
                return;
            }
            let val = objective(u);
            let tol = 1e-14 * (1.0 + val.abs());
            if val < best_val - tol || (val <= best_val + tol && (u - v).abs() < (best - v).abs()) {
                best = u;
                best_val = val.min(best_val);
            }
        };
        for &k in &self.kinks {
            consider(k);
        }
        for (lo, hi) in self.pieces() {
            let probe = match (lo.is_finite(), hi.is_finite()) {
                (true, true) => 0.5 * (lo + hi),
                (true, false) => lo + 1.0,
                (false, true) => hi - 1.0,
                (false, false) => 0.0,
            };
            let (c2, c1) = self.coefficients(probe);
            let a = c2 + 0.5 / gamma;
            let b = c1 - v / gamma;
            if a > 0.0 {
                consider((-b / (2.0 * a)).clamp(lo, hi));
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn abs_quadratic_modulus_is_twice_weight() {
        let p = ScalarPenalty::new(vec![ScalarTerm::AbsQuadratic {
            a: -1.0,
            b: 2.0,
            weight: 1.5,
        }])
        .unwrap();
        assert_eq!(p.rho(), 3.0);
    }

    #[test]
    fn quadratic_offsets_concavity() {
        let p = ScalarPenalty::new(vec![
            ScalarTerm::AbsQuadratic {
                a: -1.0,
                b: 1.0,
                weight: 1.0,
            },
            ScalarTerm::Quadratic {
                center: 0.3,
                weight: 8.0,
            },
        ])
        .unwrap();
        assert_eq!(p.rho(), 0.0);
    }

    #[test]
    fn soft_threshold_cases() {
        let p = ScalarPenalty::new(vec![ScalarTerm::Abs {
            center: 0.0,
            weight: 1.0,
        }])
        .unwrap();
        assert_eq!(p.prox(0.5, 2.0), 1.5);
        assert_eq!(p.prox(0.25, 0.25), 0.0);
        assert!((p.prox(0.3, -1.0) + 0.7).abs() < 1e-15);
    }

    #[test]
    fn invalid_terms_rejected() {
        assert!(ScalarPenalty::new(vec![ScalarTerm::AbsQuadratic {
            a: 1.0,
            b: 0.0,
            weight: 1.0
        }])
        .is_err());
        assert!(ScalarPenalty::new(vec![ScalarTerm::Abs {
            center: 0.0,
            weight: -1.0
        }])
        .is_err());
    }

    #[test]
    fn degenerate_abs_quadratic_is_square() {
        // |u^2| with gamma: u = v / (1 + 2 gamma)
        let p = ScalarPenalty::new(vec![ScalarTerm::AbsQuadratic {
            a: 0.0,
            b: 0.0,
            weight: 1.0,
        }])
        .unwrap();
        assert!((p.prox(0.2, 1.4) - 1.4 / 1.4).abs() < 1e-15);
    }
}
