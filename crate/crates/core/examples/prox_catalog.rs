//! Closed-form proximal maps next to a brute-force scalar minimizer.

use ndarray::array;
use wcpd::prox::{
    abs_norm_sq_shift, abs_quadratic, brute_force_prox, l1_norm, quad_fit, ProxFunction,
};

fn main() -> wcpd::Result<()> {
    let v = array![2.0, -0.5, 0.0];
    println!(
        "soft threshold  {:?}",
        l1_norm(3).prox(1.0, v.view())?.to_vec()
    );
    println!(
        "quadratic fit   {:?}",
        quad_fit(array![1.0, 1.0], 1.0)?
            .prox(1.0, array![3.0, 3.0].view())?
            .to_vec()
    );

    let f = abs_norm_sq_shift(1.0)?;
    for r in [0.5, 1.0, 2.0] {
        println!(
            "|r^2 - 1| radial prox at r={r}: {:.6}",
            f.radial_prox(0.1, r)
        );
    }

    let r2 = 2f64.sqrt();
    let g = abs_quadratic(-r2, r2)?;
    println!("\n   v    exact       grid search");
    for v in [-2.0, -0.7, 0.0, 1.3, 3.0] {
        let exact = g.prox(0.2, array![v].view())?[0];
        let oracle = brute_force_prox(&|u: f64| (u * u - 2.0).abs(), 0.2, v, -6.0, 6.0, 1e-12)?;
        println!("{v:5.1}  {exact:10.6}  {oracle:10.6}");
    }

    // outside the valid range the prox refuses to run
    println!(
        "\ngamma = 0.5: {}",
        g.prox(0.5, array![1.0].view()).unwrap_err()
    );
    Ok(())
}
