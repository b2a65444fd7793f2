//! Concurrent multi-start solves streaming CSV traces.

use std::path::PathBuf;

use wcpd::problems::example_abs_bilinear;
use wcpd::solver::solve_many;
use wcpd::trace::{parse_trace_csv, CsvTrace};

fn main() -> wcpd::Result<()> {
    let dir = std::env::temp_dir().join("wcpd-traces");
    std::fs::create_dir_all(&dir)?;
    let spec = example_abs_bilinear(Some(42))?;
    let starts = (0..4)
        .map(|i| spec.start_point(i))
        .collect::<wcpd::Result<Vec<_>>>()?;
    let path = |i: usize| -> PathBuf { dir.join(format!("example3.{i}.csv")) };
    let runs = solve_many(
        &spec.problem,
        &spec.steps,
        spec.regime,
        &starts,
        &spec.options(),
        |i| Ok(CsvTrace::create(&path(i))?),
    );
    for (i, r) in runs.into_iter().enumerate() {
        let t = r?;
        let rows = parse_trace_csv(&std::fs::read_to_string(path(i))?)?;
        let first_zero = rows.iter().position(|r| r.dist == Some(0.0));
        println!(
            "{}: {} rows, exact zero at {first_zero:?}, {:?}",
            path(i).display(),
            rows.len(),
            t.halt
        );
    }
    Ok(())
}
