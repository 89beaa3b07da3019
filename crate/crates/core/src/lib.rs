//! Spatially consistent geometry-based stochastic channel simulation.
//!
//! Small-scale fading parameters (cluster delays, powers, angles and
//! polarization phases) are drawn from 3D spatially correlated Gaussian
//! fields built with the sum-of-sinusoids method, so that two users standing
//! close to each other observe the same scattering clusters. The [`metrics`]
//! module quantifies how similar the channels of two users are, and
//! [`experiment`] runs the two-user drift sweep end to end.

pub mod antenna;
pub mod coeff;
pub mod error;
pub mod experiment;
pub mod geometry;
mod kv;
pub mod metrics;
pub mod rng;
pub mod scenario;
pub mod smallscale;
pub mod sosfield;
pub mod validation;

pub use error::{Error, Result};
pub use geometry::{SphericalAngle, Track, Vec3};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
