//! From profile curves to normal graphs over the cone, and the checks made on
//! them: minimal-surface residuals, asymptotic decay, density ratios and, in
//! the lowest dimension, the boundary flux.

mod decay;
mod density;
mod graph;
mod torus;

pub use decay::{fit_decay, fit_decay_in, DecayFit, DecayKind};
pub use density::{density_at_pole, density_profile, DensityProfile, PoleDensity};
pub use graph::{
    profile_to_graph, residual_invariant, GraphSample, InvariantResidual, RadialGraph,
};
pub use torus::{
    flux, residual_full_torus, sigma_torus, synthetic_flux_limit, FluxResult, TorusGraph,
    TorusResidual,
};
