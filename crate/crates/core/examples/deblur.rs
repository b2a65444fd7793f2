//! Gaussian deblurring with the l1 and the weakly convex model.

use wcpd::image::phantom;
use wcpd::problems::{deblur_spec, psnr, DeblurConfig, DeblurModel};

fn main() -> wcpd::Result<()> {
    let img = phantom(64)?;
    for model in [DeblurModel::Convex, DeblurModel::WeaklyConvex] {
        let spec = deblur_spec(&img, &DeblurConfig::new(model, 1))?;
        let ctx = spec.image.as_ref().expect("image experiment");
        let t = spec.run(0, ())?;
        println!(
            "{model:<7} observed {:.2} dB -> {:.2} dB",
            psnr(ctx.clean.view(), ctx.observed.view())?,
            psnr(ctx.clean.view(), t.x.view())?
        );
    }
    Ok(())
}
