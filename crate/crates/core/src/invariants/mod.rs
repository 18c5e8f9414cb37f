//! Symplectic invariants of torus maps: flux and action.

mod action;
mod flux;

pub use action::{
    action_profile, check_action_additivity, check_disk_support, ActionOptions, ActionProfile,
    AdditivityReport,
};
pub use flux::{
    flux_vector, is_exact, iterate_flux_vectors, loop_flux, loop_flux_raw, Cycle, FluxVector,
    DEFAULT_EXACT_TOL,
};
