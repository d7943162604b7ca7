//! Colour image restoration. Each channel is blurred by a Gaussian PSF and the
//! channels are mixed by a 3x3 cross-channel matrix, so the observation is
//! `C = A X A_c^T`. The restored image is written as PPM files.

use axb_kaczmarz::imaging::{
    blur_matrix, deblur, gaussian_kernel, psnr, synthetic_image, BlurModel, Boundary, CrossChannelMatrix,
};
use axb_kaczmarz::{Method, SolverConfig, StopRule};

fn main() -> axb_kaczmarz::Result<()> {
    let (h, w) = (32, 32);
    let img = synthetic_image(h, w, 0)?;
    let a = blur_matrix(&gaussian_kernel(5, 6.0)?, h, w, Boundary::Reflexive)?;
    let model = BlurModel::new(a, CrossChannelMatrix::standard(), h, w)?;
    let observed = model.forward(&img)?;
    let blurred = model.observed_image(&observed)?;
    println!("blurred   PSNR {}", psnr(&img, &blurred)?);

    let cfg = SolverConfig::default().with_stop(StopRule::RseBelow(8e-2)).with_max_iters(5_000_000);
    for method in [Method::Mwrbk, Method::Grbk, Method::Gi] {
        let (restored, rep) = deblur(&observed, &model, Some(&img), method, &cfg)?;
        println!(
            "{:<6} PSNR {}  {:>7} steps  {:.3} s",
            method.name(),
            psnr(&img, &restored)?,
            rep.iterations,
            rep.wall_seconds
        );
        if method == Method::Mwrbk {
            let dir = std::env::temp_dir().join("axb_deblur");
            std::fs::create_dir_all(&dir)?;
            img.write_ppm(dir.join("original.ppm"))?;
            blurred.write_ppm(dir.join("blurred.ppm"))?;
            restored.write_ppm(dir.join("restored.ppm"))?;
            println!("       images written to {}", dir.display());
        }
    }
    Ok(())
}
