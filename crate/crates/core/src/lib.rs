//! Computer algebra for the free post-Lie algebra on planar rooted trees,
//! Lie–Butcher series, and Lie group integrators on the sphere.

pub mod cli;
pub mod error;
pub mod freealg;
pub mod geoint;
pub mod lbseries;
pub mod matpostlie;
pub mod postlie;
pub mod ptrees;

pub use error::{Error, Result};
