//! Numerical core for fractional Brownian motion with vanishing Hurst
//! parameter: exact path samplers, the normalized field whose small-H limit
//! is an almost log-correlated Gaussian field, closed-form covariance
//! kernels with their H -> 0 limits, Schwartz-function pairing quadrature,
//! and the associated multiplicative-chaos measure with its multifractal
//! scaling laws.
//!
//! The crate is no_std-compatible (with `alloc`); enable the `libm` feature
//! instead of `std` for embedded float math. All operations are pure
//! functions of their inputs: ensembles are reproduced bit-for-bit from a
//! `(master_seed, replica_index)` pair and are safe to share across threads.
//!
//! ```
//! use fbmzero_core::{fbm, kernel, HurstParam, TimeGrid};
//!
//! // sample the normalized field from 256 exact fBm paths
//! let h = HurstParam::new(0.1)?;
//! let grid = TimeGrid::uniform(0.0, 1.0, 129)?;
//! let paths = fbm::sample_fbm_circulant(&grid, h, 256, 42)?;
//! let x = fbm::normalize_to_x(&paths)?;
//! assert_eq!(x.path(0)[0], 0.0); // pinned at t = 0
//!
//! // the closed-form covariance it converges to as H -> 0
//! let k_h = kernel::kernel_kh(0.7, 0.3, h)?.total;
//! let k_limit = kernel::kernel_limit(0.7, 0.3)?.total;
//! assert!((k_h - k_limit).abs() < 0.5);
//! # Ok::<(), fbmzero_core::Error>(())
//! ```

#![cfg_attr(not(feature = "std"), no_std)]
// negated float comparisons like !(x > 0.0) are deliberate: they treat NaN
// as out of domain, which x <= 0.0 would silently accept
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod error;
pub mod fbm;
pub mod fft;
mod fmath;
pub mod gmc;
pub mod grid;
pub mod kernel;
pub mod linalg;
pub mod pairing;
pub mod quad;
pub mod rng;

pub use error::{Error, Result};
pub use fbm::{PathEnsemble, PathLabel, SamplerKind};
pub use grid::{HurstParam, TimeGrid};
pub use rng::RngSeedSpec;
