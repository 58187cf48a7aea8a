//! Extended-Lagrangian relativistic point dynamics and its proper-time
//! path-integral propagator.
//!
//! The crate is organised bottom-up:
//!
//! * [`metric`], [`grid`], [`field`], [`potential`]: space-time conventions
//!   (η = diag(-1, +1, …), q⁰ = c t), periodic grids and complex fields.
//! * [`classical`]: the quadratic extended Lagrangian, its Euler–Lagrange flow
//!   in the parameter s and the hypersurface constraint u·u = -c².
//! * [`kernel`]: one proper-time step of the path integral, either in closed
//!   form on the Fourier lattice or as a position-space quadrature.
//! * [`kg`]: Klein–Gordon operators and the checks that the step generates
//!   Klein–Gordon dynamics at first order in ε.
//! * [`oracle`]: damped Fresnel quadrature used to pin the Gaussian moments.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classical;
pub mod constants;
pub mod error;
pub(crate) mod fft;
pub mod field;
pub mod grid;
pub mod kernel;
pub mod kg;
pub mod metric;
pub mod oracle;
pub mod potential;

pub use constants::PhysicalConstants;
pub use error::{Error, Result};
pub use field::WaveField;
pub use grid::SpacetimeGrid;
pub use metric::{minkowski_contract, MetricSignature};
pub use potential::{PotentialField, PotentialKind, WaveComponent};
