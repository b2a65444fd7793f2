//! The weakly convex quartic example: starts inside the contraction ball
//! reach the saddle point at a linear rate, far starts may stall elsewhere.

use wcpd::problems::{example_wc_quartic, QuarticStart};
use wcpd::saddle::{radius_report, rate_constant_b};

fn main() -> wcpd::Result<()> {
    let inside = example_wc_quartic(QuarticStart::Inside, Some(7))?;
    let report = radius_report(2.0, 0.9, 1.0, &inside.steps, inside.regime)?;
    println!(
        "A = {:.6}, ball radius = {:.4}",
        report.a, report.ball_radius
    );

    for i in 0..3 {
        let t = inside.run(i, ())?;
        let d0 = t.rows[0].dist.unwrap();
        let b = rate_constant_b(&report, d0)?;
        let hit = t.rows.iter().position(|r| r.dist == Some(0.0));
        println!("inside  start {i}: dist0 {d0:.4}, B {b:.4}, exact zero at {hit:?}");
    }

    let outside = example_wc_quartic(QuarticStart::Outside, Some(7))?;
    for i in 0..5 {
        let t = outside.run(i, ())?;
        println!(
            "outside start {i}: dist0 {:.3} -> ({:+.4}, {:+.4})",
            t.rows[0].dist.unwrap(),
            t.x[0],
            t.y[0]
        );
    }
    Ok(())
}
