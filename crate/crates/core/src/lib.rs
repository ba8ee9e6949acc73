//! Verification-grade numerics for the mixing relaxation of the 2-D
//! incompressible porous media system with viscosity contrast.
//!
//! The crate implements the pointwise geometry of the constitutive set and
//! its relaxations, wave-cone directions and localized plane waves, the
//! spectral velocity recovery on the torus, constructive lamination
//! segments and hull decompositions, the entropy profile of the associated
//! scalar conservation law together with a finite-volume solver and the
//! confined free-boundary evolution, subsolution checks, and the lattice
//! exchange toy model of the mixing process.

pub mod atwood;
pub mod entropy_claw;
pub mod error;
pub mod field;
pub mod io;
pub mod lamination;
pub mod plane;
pub mod random_walk;
pub mod spectral;
pub mod state_geometry;
pub mod subsolution;
pub mod wave_cone;

pub use atwood::{make_atwood, AtwoodParams, BoundParams};
pub use error::{Error, Result};
pub use plane::PlaneVec;
pub use state_geometry::State;
