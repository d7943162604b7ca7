//! One cyclic sweep is a linear map on the error. Its spectral radius,
//! restricted to the subspace the iterates live in, is below one for every
//! step size in (0, 2).

use axb_kaczmarz::analysis::{restricted_spectral_radius_fullcol, restricted_spectral_radius_fullrow, spectral_radius_fullrow};
use axb_kaczmarz::harness::randn;
use axb_kaczmarz::linalg::qr_thin;
use axb_kaczmarz::SparseRowMat;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> axb_kaczmarz::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let tall = SparseRowMat::from_dense(&randn(&mut rng, 12, 5));
    let wide = SparseRowMat::from_dense(&randn(&mut rng, 5, 12));
    let q = qr_thin(&randn(&mut rng, 6, 3))?.q;

    println!("{:>6} {:>12} {:>12} {:>12}", "alpha", "tall A", "wide A", "fullcol Q");
    for i in 0..10 {
        let alpha = 0.1 + 0.2 * i as f64;
        println!(
            "{alpha:>6.1} {:>12.6} {:>12.6} {:>12.6}",
            spectral_radius_fullrow(&tall, alpha)?,
            restricted_spectral_radius_fullrow(&wide, alpha)?,
            restricted_spectral_radius_fullcol(&wide, &q, alpha)?,
        );
    }
    Ok(())
}
