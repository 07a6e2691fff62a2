//! Thermodynamic formalism for locally constant matrix cocycles over
//! two-sided subshifts of finite type.
//!
//! The crate computes bracketed estimates of subadditive topological
//! pressure for singular-value potentials, the Legendre-transform entropy
//! spectrum of Lyapunov exponents, upper and lower joint spectral radii,
//! cone-based almost-multiplicativity certificates and pinching/twisting
//! typicality checks.
//!
//! Module map:
//!
//! - [`subshift`]: transition matrices, admissible words, connectors, entropy.
//! - [`matkernel`]: small dense matrix kernel with log-domain products.
//! - [`cocycle`]: the cocycle object, word products and cylinder norms.
//! - [`pressure`]: partition sums, pressure brackets, growth extremes.
//! - [`spectrum`]: Legendre transform, spectrum curves, Gibbs reports.
//! - [`cones`]: Hilbert metric, Birkhoff contraction, kappa certificates.
//! - [`typicality`]: periodic products, holonomy loops, pinching and twisting.

pub mod cocycle;
pub mod cones;
mod error;
pub mod matkernel;
pub mod presets;
pub mod pressure;
pub mod spectrum;
pub mod subshift;
pub mod typicality;

pub use cocycle::{CocycleSpec, CylinderNormTable};
pub use error::{Error, Result};
pub use matkernel::{Matrix, ScaledProduct};
pub use subshift::{TransitionMatrix, Word};
