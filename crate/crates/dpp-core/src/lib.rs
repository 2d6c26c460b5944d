//! Finite determinantal point processes with an exact fermionic oracle.
//!
//! A determinantal point process on the finite ground set {0, …, n−1} is
//! specified by a Hermitian kernel K with spectrum in [0, 1]: the
//! probability that a sample contains a given subset S is the principal
//! minor det(K_S). This crate provides
//!
//! - [`kernel`]: validated kernels, spectral decomposition, and the
//!   closure operations (complement, restriction, basis rotation,
//!   L-ensemble transforms);
//! - [`measure`]: exact probabilities — inclusion and elementary
//!   (exact-subset) probabilities, the full 2^n law, void probabilities,
//!   sums of correlations over disjoint blocks, and normalized weights
//!   for strict contractions;
//! - [`counts`]: the point-count law, which is a Bernoulli convolution
//!   over the kernel spectrum, plus moments and a standardized statistic;
//! - [`fock`]: an independent oracle realizing the process as the
//!   diagonal of a fermionic density operator — Slater determinants,
//!   overlaps, measurement probabilities in a rotated basis, and the
//!   m-point correlation operator identity;
//! - [`sampler`]: exact sequential sampling (spectral Bernoulli phase,
//!   then chain-rule projection phase) with reproducible parallel
//!   batches;
//! - [`experiments`]: two end-to-end studies — eigenangle counts of
//!   Haar-random unitaries against the exact arc kernel, and uniform
//!   spanning trees against a loop-erased-walk sampler;
//! - [`io`]: kernel and graph file formats.
//!
//! Randomized routines take explicit seeds and derive independent
//! substreams per replicate, so results are reproducible and independent
//! of thread count.

pub mod counts;
pub mod error;
pub mod experiments;
pub mod fock;
pub mod io;
pub mod kernel;
pub mod measure;
pub mod rng;
pub mod sampler;
pub mod subset;

/// Complex scalar used throughout.
pub type C64 = nalgebra::Complex<f64>;

pub use error::{Error, Result};
pub use kernel::{HermitianKernel, SpectralDecomposition, Tolerances};
pub use subset::SubsetIndex;
