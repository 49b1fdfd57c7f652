//! Delone-set constructions with exact integer addresses, and finite-window
//! estimates of their order invariants: patch counts, repetitivity, patch
//! frequencies, weight-distribution densities, autocorrelation and address maps.

pub mod address;
pub mod atlas;
pub mod contfrac;
pub mod ergodic;
pub mod error;
pub mod generators;
pub mod grid;
pub mod pointset;
pub mod region;
pub mod repetitivity;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
pub use generators::PointSetSource;
pub use pointset::{ExactPointSet, FloatPointSet, PatchKey, PointCloud, Projection};
pub use region::Region;
