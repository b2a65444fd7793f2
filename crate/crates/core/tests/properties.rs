use std::sync::Arc;

use ndarray::Array1;
use proptest::prelude::*;

use wcpd::operators::{gaussian_blur_map, grad_map, rayleigh_estimates, LinearMap, MatrixMap};
use wcpd::problems::abs_plus_abs_quadratic;
use wcpd::prox::{
    abs_norm_sq_shift, abs_quadratic, brute_force_prox, elementwise_sq_l1, group_l1, l1_norm,
    linf_ball_indicator, prox_conjugate, quad_fit, shared, shifted_l1, Conjugate, ProxFunction,
    QuadraticShift,
};
use wcpd::rng;
use wcpd::saddle::SaddleProblem;
use wcpd::solver::{solve, Regime, SolveOptions, StepConfig};

fn vec_strategy(dim: usize, r: f64) -> impl Strategy<Value = Array1<f64>> {
    prop::collection::vec(-r..r, dim).prop_map(Array1::from)
}

fn prox_objective(f: &dyn ProxFunction, gamma: f64, v: &Array1<f64>, u: &Array1<f64>) -> f64 {
    let d = u - v;
    f.eval(u.view()) + d.dot(&d) / (2.0 * gamma)
}

/// `prox(gamma, v)` is no worse than random competitors near it.
fn assert_prox_optimal(
    f: &dyn ProxFunction,
    gamma: f64,
    v: &Array1<f64>,
    seed: u64,
) -> Result<(), TestCaseError> {
    let w = f.prox(gamma, v.view()).unwrap();
    let best = prox_objective(f, gamma, v, &w);
    let mut s = rng::stream(seed);
    for k in 0..200 {
        let scale = [0.01, 0.3, 3.0][k % 3];
        let u = &w + &(rng::gaussian_vec(&mut s, v.len()) * scale);
        prop_assert!(
            best <= prox_objective(f, gamma, v, &u) + 1e-9,
            "{} beaten at {u:?}",
            f.name()
        );
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn prox_optimality(v in vec_strategy(3, 4.0), gamma in 0.01f64..0.49, seed in any::<u64>()) {
        let c = Array1::from(vec![0.5, -1.0, 2.0]);
        let fs: Vec<Box<dyn ProxFunction>> = vec![
            Box::new(l1_norm(3)),
            Box::new(quad_fit(c.clone(), 2.0).unwrap()),
            Box::new(abs_norm_sq_shift(2.0).unwrap()),
            Box::new(shifted_l1(c.view(), 1.0).unwrap()),
            Box::new(elementwise_sq_l1(c.view(), 1.0).unwrap()),
        ];
        for f in &fs {
            assert_prox_optimal(f.as_ref(), gamma, &v, seed)?;
        }
        let v4 = Array1::from(vec![v[0], v[1], v[2], -v[0]]);
        assert_prox_optimal(&group_l1(2), gamma, &v4, seed)?;
        assert_prox_optimal(&linf_ball_indicator(2), gamma, &v4, seed)?;
    }

    #[test]
    fn composite_prox_optimality(v in vec_strategy(3, 3.0), gamma in 0.01f64..0.45, w in 0.1f64..10.0) {
        let x0 = Array1::from(vec![0.3, 0.8, -0.2]);
        let b = Array1::from(vec![0.1, 0.9, 0.0]);
        let inners = [
            shared(abs_norm_sq_shift(x0.dot(&x0)).unwrap()),
            shared(shifted_l1(x0.view(), 1.0).unwrap()),
            shared(elementwise_sq_l1(x0.view(), 1.0).unwrap()),
        ];
        for inner in inners {
            let f = QuadraticShift::new(inner, w, Some(b.clone())).unwrap();
            assert_prox_optimal(&f, gamma, &v, 9)?;
        }
    }

    #[test]
    fn scalar_prox_matches_oracle(v in -5.0f64..5.0, gamma in 0.01f64..0.49, c in 0.1f64..4.0) {
        let f = abs_plus_abs_quadratic(c).unwrap();
        let got = f.prox(gamma, Array1::from(vec![v]).view()).unwrap()[0];
        let want = brute_force_prox(&|u: f64| u.abs() + (u * u - c).abs(), gamma, v, -8.0, 8.0, 1e-12).unwrap();
        let obj = |u: f64| u.abs() + (u * u - c).abs() + (u - v).powi(2) / (2.0 * gamma);
        prop_assert!((got - want).abs() < 1e-6 || (obj(got) - obj(want)).abs() < 1e-12);
    }

    /// `h + (rho/2)|.|^2` is convex along random segments.
    #[test]
    fn weak_convexity_certificate(a in vec_strategy(2, 3.0), b in vec_strategy(2, 3.0), t in 0.0f64..1.0) {
        let aq = abs_quadratic(-1.0, 1.5).unwrap();
        let fs: Vec<Box<dyn ProxFunction>> = vec![
            Box::new(abs_norm_sq_shift(1.0).unwrap()),
            Box::new(elementwise_sq_l1(Array1::from(vec![1.0, 0.5]).view(), 1.0).unwrap()),
            Box::new(l1_norm(2)),
        ];
        let check = |f: &dyn ProxFunction, a: &Array1<f64>, b: &Array1<f64>| {
            let rho = f.rho();
            let m = a * t + b * (1.0 - t);
            let lhs = f.eval(m.view());
            let d = a - b;
            let rhs = t * f.eval(a.view()) + (1.0 - t) * f.eval(b.view()) + 0.5 * rho * t * (1.0 - t) * d.dot(&d);
            lhs <= rhs + 1e-9
        };
        for f in &fs {
            prop_assert!(check(f.as_ref(), &a, &b), "{}", f.name());
        }
        let (a1, b1) = (Array1::from(vec![a[0]]), Array1::from(vec![b[0]]));
        prop_assert!(check(&aq, &a1, &b1));
    }

    /// `v = prox_{gamma g*}(v) + gamma prox_{g/gamma}(v/gamma)` and the
    /// conjugate prox coincides with the catalogued one.
    #[test]
    fn moreau_bridge(v in vec_strategy(4, 3.0), gamma in 0.05f64..3.0) {
        let g = group_l1(2);
        let direct = linf_ball_indicator(2).prox(gamma, v.view()).unwrap();
        let bridged = prox_conjugate(&g, gamma, v.view()).unwrap();
        prop_assert!((&direct - &bridged).iter().all(|d| d.abs() < 1e-12));

        let b = Array1::from(vec![1.0, -2.0, 0.5, 0.0]);
        let q = quad_fit(b.clone(), 1.0).unwrap();
        let conj = Conjugate::new(shared(q)).unwrap();
        let y = conj.prox(gamma, v.view()).unwrap();
        // g*(y) = |y|^2/2 + <b, y>, so the prox is (v - gamma b) / (1 + gamma)
        let want = (&v - &(&b * gamma)) / (1.0 + gamma);
        prop_assert!((&y - &want).iter().all(|d| d.abs() < 1e-12));
        let back = gamma * q_prox(&b, 1.0 / gamma, &(&v / gamma));
        prop_assert!((&(&y + &back) - &v).iter().all(|d| d.abs() < 1e-12));
    }

    #[test]
    fn adjoint_identities(seed in any::<u64>(), rows in 1usize..8, cols in 1usize..8) {
        let mut s = rng::stream(seed);
        let a = MatrixMap::new(rng::gaussian_matrix(&mut s, rows, cols)).unwrap();
        let maps: Vec<Arc<dyn LinearMap>> = vec![
            Arc::new(a),
            Arc::new(grad_map(1 + rows).unwrap()),
            Arc::new(gaussian_blur_map(2 + cols, 1.5).unwrap()),
        ];
        for m in maps {
            let x = rng::gaussian_vec(&mut s, m.in_dim());
            let y = rng::gaussian_vec(&mut s, m.out_dim());
            let lhs = m.apply(x.view()).dot(&y);
            let rhs = x.dot(&m.adjoint(y.view()));
            prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
            let bound = m.norm_bound();
            let ax = m.apply(x.view());
            prop_assert!(ax.dot(&ax).sqrt() <= bound * x.dot(&x).sqrt() * (1.0 + 1e-9));
        }
    }

    #[test]
    fn rayleigh_quotients_increase(seed in any::<u64>(), n in 2usize..12) {
        let g = grad_map(n).unwrap();
        let r = rayleigh_estimates(&g, 50, seed).unwrap();
        prop_assert!(r.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        prop_assert!(*r.last().unwrap() <= g.norm_bound().powi(2) * (1.0 + 1e-9));
    }

    /// Identical inputs give bit-identical traces.
    #[test]
    fn solver_is_deterministic(x0 in -5.0f64..5.0, y0 in -5.0f64..5.0) {
        let h = shared(abs_plus_abs_quadratic(2.0).unwrap());
        let p = SaddleProblem::new(h.clone(), h, Arc::new(wcpd::operators::ScalarMap::identity(1)));
        let cfg = StepConfig { sigma: 0.35, tau: 0.25, theta: 1.0 };
        let z0 = (Array1::from(vec![x0]), Array1::from(vec![y0]));
        let a = solve(&p, &cfg, Regime::DualFirst, &z0, &SolveOptions::iters(40), ()).unwrap();
        let b = solve(&p, &cfg, Regime::DualFirst, &z0, &SolveOptions::iters(40), ()).unwrap();
        prop_assert_eq!(a.x, b.x);
        prop_assert_eq!(a.y, b.y);
    }
}

/// `prox_{gamma (1/2)|. - b|^2}(v)`, written out independently.
fn q_prox(b: &Array1<f64>, gamma: f64, v: &Array1<f64>) -> Array1<f64> {
    (v + &(b * gamma)) / (1.0 + gamma)
}

#[test]
fn grad_norm_matches_dense_svd() {
    use nalgebra::DMatrix;
    for n in [4, 9, 16] {
        let g = grad_map(n).unwrap();
        let dense = DMatrix::from_fn(2 * n * n, n * n, |i, j| {
            let mut e = Array1::zeros(n * n);
            e[j] = 1.0;
            g.apply(e.view())[i]
        });
        let top = dense.singular_values().max();
        assert!(
            (top - g.norm_bound()).abs() < 1e-9,
            "n={n}: {top} vs {}",
            g.norm_bound()
        );
    }
}
