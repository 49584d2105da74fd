//! Synchronization over Cartan motion groups via compactification.
//!
//! The crate estimates `n` unknown group elements from noisy pairwise ratio
//! measurements on a graph. For the non-compact groups SE(d) and the matrix
//! motion group MMG(d, l), measurements are mapped into a compact orthogonal
//! group by a contraction map, synchronized there with a spectral method,
//! and mapped back. Separation and SE-spectral baselines, a synthetic noise
//! harness, and evaluation metrics round out the toolkit.
//!
//! Module map:
//! - [`group`]: matrix-group primitives (rotations, rigid motions, MMG
//!   elements, exponentials/logarithms, polar projection).
//! - [`contraction`]: the compactification maps, their inverses via Cartan
//!   decomposition, and residual probes.
//! - [`sync`]: measurement graphs and the synchronization solvers.
//! - [`harness`]: synthetic ground truth, the multiplicative noise model,
//!   SNR/MSE metrics, and the spectral-gap condition estimator.

pub mod contraction;
pub mod error;
pub mod group;
pub mod harness;
pub mod sync;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};
