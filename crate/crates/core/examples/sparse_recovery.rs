//! Sparse recovery with the l1 penalty and with the weakly convex
//! norm-matching penalty, from zero and from a warm start.

use wcpd::problems::{l1_convex, l1_weakly_convex, L1Config, L1Start};

fn main() -> wcpd::Result<()> {
    let seed = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(1);
    for start in [L1Start::Zeros, L1Start::Warm] {
        let cfg = L1Config {
            start,
            iters: 2000,
            ..L1Config::desk(seed)
        };
        for spec in [l1_convex(&cfg)?, l1_weakly_convex(&cfg)?] {
            let t = spec.run(0, ())?;
            let last = t.last_row();
            println!(
                "{:<5} {start:?}: tau {:.2e}, |x - x*| {:.4} -> {:.4}, objective {:.4}, {:.2?}",
                spec.name,
                spec.steps.tau,
                t.rows[0].dist.unwrap(),
                last.dist.unwrap(),
                last.objective.unwrap(),
                t.elapsed
            );
        }
    }
    Ok(())
}
