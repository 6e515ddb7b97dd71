//! Bloch fibers, band structures, gaps and spectral projectors.

mod bands;
mod bloch;
mod projector;

pub use bands::{band_structure, bz_grid, check_grid, find_gaps, find_refined_gaps, operator_norm, refine_gap, BandStructure, SpectralGap};
pub use bloch::{bloch_matrix, fiber_eigenvalues, hermitian_eigen, periodic_spectrum, Fibered, StripFibers};
pub use projector::{
    kernel_decay_fit, lp_norm_probe, projection_convergence, LpCertificate, ProjectorKernel, Side, SpectralProjector,
};
