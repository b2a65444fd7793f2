//! Norm estimates of the built-in linear maps.

use wcpd::operators::{
    gaussian_blur_map, grad_map, power_iteration, rayleigh_estimates, LinearMap,
};

fn main() -> wcpd::Result<()> {
    for n in [8, 32, 64] {
        let g = grad_map(n)?;
        let est = power_iteration(&g, 500, 1)?;
        println!(
            "grad {n:>3}x{n:<3} power {est:.6}  exact {:.6}",
            g.norm_bound()
        );
    }
    let blur = gaussian_blur_map(64, 4.0)?;
    println!(
        "blur std 4: radius {} px, norm estimate {:.6}",
        blur.radius(),
        power_iteration(&blur, 100, 1)?
    );

    let g = grad_map(16)?;
    let r = rayleigh_estimates(&g, 40, 7)?;
    for k in [0, 4, 9, 19, 39] {
        println!("iteration {:>2}: {:.8}", k + 1, r[k].sqrt());
    }
    Ok(())
}
