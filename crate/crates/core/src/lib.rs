//! Gaussian random band matrices on the discrete torus ℤ_L^d: variance
//! profiles, sampling, resolvents, diffusive propagators, atomic graphs and
//! the spectral statistics built on them, plus a reproducible experiment
//! harness.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod graphcalc;
mod fourier;
pub mod harness;
pub mod lattice;
pub mod profile;
pub mod propagators;
pub mod sampler;
pub mod spectral;
pub mod stats;

pub use error::{Error, Result};
pub use lattice::TorusLattice;
pub use profile::{build_profile, mean_field_profile, ShapeFunction, VarianceProfile};
