//! Convergence-factor bounds, cyclic sweep operators and spectral radii.

mod bounds;
mod spectral;
mod sweep;

pub use bounds::{
    delta_bound, delta_k_theta_bound, fro_sq, omega_from_norms, omega_set, BoundContext, BoundReport, OmegaSet,
};
pub use spectral::{
    eigenvalues, restricted_spectral_radius_fullcol, restricted_spectral_radius_fullrow, spectral_radius, spectral_radius_fullcol,
    spectral_radius_fullrow, x_star_0, FULLROW_MAX_COLS,
};
pub use sweep::{build_sweep_operator, SweepOperator, SWEEP_MAX_ROWS};
