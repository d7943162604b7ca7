//! Colour-image restoration: blur model `A X A_c^T = C`, channel packing,
//! PSNR, PPM/PGM I/O and the deblurring pipeline.

mod blur;
mod image;
mod pipeline;

pub use blur::{blur_matrix, gaussian_kernel, Boundary, CrossChannelMatrix, PsfKernel, BLUR_MAX_PIXELS};
pub use image::{to_byte, RgbImage};
pub use pipeline::{
    channels_to_columns, columns_to_channels, BlurModel, columns_to_channels_clamped, deblur, forward_blur, psnr,
    synthetic_corpus, synthetic_image, Psnr, SYNTHETIC_TEXTURE,
};
