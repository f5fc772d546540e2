//! Sketched kernel ridge regression built on accumulated sub-sampling matrices.
//!
//! A sketch `S` (n × d) is formed by summing `m` independent, randomly signed and
//! rescaled sub-sampling matrices. With `m = 1` this is the classical Nyström
//! method; as `m` grows the sketch behaves like a dense sub-Gaussian projection,
//! while `K·S` still costs only `O(n·m·d)`.
//!
//! The crate is `no_std` (it needs `alloc`). The `std` feature, on by default,
//! switches nalgebra to its blocked matrix-multiply backend.
//!
//! Modules:
//! - [`kernel`]: kernel functions and Gram matrices.
//! - [`sketch`]: sampling distributions, sketch builders and structured products.
//! - [`solver`]: exact and sketched KRR fits.
//! - [`spectral`]: leverage scores, statistical dimension, incoherence, K-satisfiability.
//! - [`synth`]: the bimodal synthetic generator and the regression target.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

mod error;
pub mod kernel;
mod linalg;
pub mod sketch;
pub mod solver;
pub mod spectral;
pub mod synth;

pub use error::{Error, Result};
pub use kernel::{InputMatrix, KernelSpec, Smoothness};
pub use sketch::{SamplingDistribution, SketchMatrix};
pub use solver::{ExactFit, KrrFit, SketchedFit};
pub use spectral::{SatisfiabilityReport, SpectralProfile};

pub use nalgebra::{DMatrix, DVector};
