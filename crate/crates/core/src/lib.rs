//! Spectral-element simulation of acoustic-gravity waves in a stratified,
//! free-surface ocean over arbitrary bathymetry.

// `!(x > 0.0)` deliberately rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod assembly;
pub mod basis;
pub mod error;
pub mod mesh;
pub mod scenario;
pub mod sources;
pub mod solver;
pub mod sparse;
pub mod stratification;
pub mod verify;

pub use error::{Error, Result};
