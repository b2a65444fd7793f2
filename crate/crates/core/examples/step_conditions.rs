//! Stepsize predicates, contraction constants and the sigma window that
//! keeps the primal distance bounds real.

use wcpd::saddle::{epsilon_bounds, feasibility_interval, radius_report};
use wcpd::solver::{validate_steps, Regime, StepConfig};

fn main() -> wcpd::Result<()> {
    let cfg = StepConfig {
        sigma: 0.35,
        tau: 0.25,
        theta: 1.0,
    };
    for regime in [Regime::DualFirst, Regime::PrimalFirst] {
        let r = radius_report(2.0, 0.9, 1.0, &cfg, regime)?;
        println!(
            "{regime}: A={:.6} A1={:.6} radius={:.4}",
            r.a, r.a1, r.ball_radius
        );
    }
    let bad = StepConfig {
        sigma: 0.45,
        tau: 0.5,
        theta: 1.0,
    };
    if let Err(v) = validate_steps(&bad, 2.0, 1.0, Regime::PrimalFirst) {
        println!("sigma=0.45, tau=0.5: {v}");
    }

    let eps = 0.1f64.sqrt();
    if let Some((lo, hi)) = feasibility_interval(1.0, 2.0, 1.0, 0.5, eps)? {
        println!("feasible sigma in ({lo:.5}, {hi:.5})");
        let mid = 0.5 * (lo + hi);
        let e = epsilon_bounds(1.0, 2.0, 1.0, mid, 0.5, eps);
        println!(
            "at sigma={mid:.4}: E- = {:.4}, E+ = {:.4}",
            e.e_minus, e.e_plus
        );
    }
    Ok(())
}
