//! Random-matrix reference quantities: Marchenko–Pastur law, fixed-point
//! Stieltjes solvers, edge and spike formulas, concentration and
//! perturbation bounds.

mod bounds;
mod edge;
mod law;
mod stieltjes;

pub use bounds::{azuma_bound, scaled_wielandt_gap_bound, wielandt_gap_bound};
pub use edge::{
    bbp_params, johnstone_params, mp_cdf, mp_density, mp_support, phase_transition, EdgeParams, SpikeParams,
    SpikeRegime,
};
pub use law::DiscreteLaw;
pub use stieltjes::{companion_to_stieltjes, mp_stieltjes, weighted_stieltjes, SolverOptions, StieltjesSolution};
