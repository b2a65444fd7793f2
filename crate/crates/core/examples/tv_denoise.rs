//! Total-variation denoising of the phantom under every fidelity model.

use wcpd::image::phantom;
use wcpd::problems::{psnr, tv_spec, TvConfig, TvModel};

fn main() -> wcpd::Result<()> {
    let img = phantom(64)?;
    for model in TvModel::ALL {
        let spec = tv_spec(
            &img,
            &TvConfig {
                iters: 500,
                ..TvConfig::new(model, 1)
            },
        )?;
        let ctx = spec.image.as_ref().expect("image experiment");
        let t = spec.run(0, ())?;
        println!(
            "{model:<6} noisy {:.2} dB -> {:.2} dB",
            psnr(ctx.clean.view(), ctx.observed.view())?,
            psnr(ctx.clean.view(), t.x.view())?
        );
    }
    Ok(())
}
