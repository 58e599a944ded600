//! Minimal hypersurfaces asymptotic to the cones `C_{n,p}` over
//! `S^p(√(p/n)) × S^{q}(√(q/n))`: the cone geometry, its Jacobi spectrum, the
//! reduced phase-plane flow and its orbits, and numerical checks of the
//! asymptotic behaviour of the resulting surfaces.

pub mod asymptotics;
pub mod cli;
pub mod cone;
pub mod error;
pub mod flow;
pub mod mesh;
pub mod ode;
pub mod portrait;
pub mod quadrature;
pub(crate) mod rk;
pub mod spectral;
pub mod verify;

pub use cone::ConeParams;
pub use error::{Error, Result};
pub use flow::{generate_sigma, OrbitControls, ProfileCurve, Sign};
pub use spectral::{indicial_roots, IndicialRoots, ModeIndex};
