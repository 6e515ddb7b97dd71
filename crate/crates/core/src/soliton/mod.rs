//! Gap solitons: energy functional, linking construction, Newton
//! refinement, period sweeps, decay fits and certification.

mod certify;
mod decay;
mod energy;
mod linking;
mod newton;
mod problem;
mod sweep;

pub use certify::{certify, failures, Certification, Checks};
pub use decay::{decay_rate, peak_site, ring_distance};
pub use energy::{energy, energy_gradient};
pub use linking::{
    build_linking_set, critical_floor, linking_maximize, reference_overlap, reference_vector, LinkingMaximum, LinkingSet,
};
pub use newton::{newton_refine, residual_tolerance, NewtonOutcome};
pub use problem::{Geometry, ProblemSpec};
pub use sweep::{default_reference_period, k_sweep, solve, SolitonResult, SweepReport};

use crate::lattice::Site;
use crate::{Error, Result};

/// Solve on the half-space strip of `spec`; see [`solve`].
pub fn halfspace_solve(spec: &ProblemSpec, k: usize, seed: Site, k_ref: usize) -> Result<SolitonResult> {
    if !matches!(spec.geometry(), Geometry::HalfSpace { .. }) {
        return Err(Error::WindowMismatch);
    }
    solve(spec, k, seed, k_ref, None)
}
