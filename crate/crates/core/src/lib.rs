//! Spectral recovery of planted partitions in symmetric stochastic block models.
//!
//! The crate covers dense symmetric linear algebra ([`linalg`]), seeded
//! planted-partition samplers ([`model`]), the power-iteration and
//! eigenspace-projection clustering algorithms ([`clustering`]) and the
//! comparison of recovered groups against planted labels ([`evaluation`]).

pub mod clustering;
pub mod error;
pub mod evaluation;
pub mod linalg;
pub mod model;
pub mod rng;

pub use error::{Error, Result};
