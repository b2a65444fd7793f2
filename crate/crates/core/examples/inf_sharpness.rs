//! Inf-sharpness verdicts for the scalar examples, and a contour grid.
//!
//! Pass a path to write the `x,y,value` grid of the second example.

use std::fs::File;
use std::io::BufWriter;

use wcpd::problems::{
    example_abs_bilinear, example_abs_difference, example_abs_quadratic_dual,
    example_wc_quartic_variant, QuarticStart,
};
use wcpd::saddle::{sharpness_grid, verify_inf_sharpness, GridBox};

fn main() -> wcpd::Result<()> {
    let cases = [
        ("|x| - |y|", example_abs_difference(None)?, 5.0, 1.0),
        (
            "|x| + xy - y^2/8",
            example_abs_quadratic_dual(None)?,
            1.0,
            1.0,
        ),
        (
            "|x| + xy - y^2/8",
            example_abs_quadratic_dual(None)?,
            1.0,
            0.1,
        ),
        ("|x| + xy - |y|", example_abs_bilinear(None)?, 3.0, 1.0),
        (
            "|x|+|x^2-1| + xy - ...",
            example_wc_quartic_variant(QuarticStart::Inside, None)?,
            2.0,
            1.0,
        ),
    ];
    for (label, spec, half, mu) in &cases {
        let r = verify_inf_sharpness(&spec.problem, *mu, &GridBox::square(-half, *half), 0.01)?;
        println!(
            "{label:<24} mu={mu:<4} min {:+.4e} at ({:+.2}, {:+.2})  sharp: {}",
            r.min_value,
            r.witness.0,
            r.witness.1,
            r.is_inf_sharp()
        );
    }
    if let Some(path) = std::env::args().nth(1) {
        let grid = sharpness_grid(&cases[1].1.problem, 1.0, &GridBox::square(-1.0, 1.0), 0.02)?;
        grid.write_csv(BufWriter::new(File::create(&path)?))?;
        println!("wrote {} points to {path}", grid.values.len());
    }
    Ok(())
}
