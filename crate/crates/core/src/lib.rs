//! Granger causality estimation on compressively sensed sparse signals.
//!
//! The crate is organised around the pipeline the experiments run:
//!
//! * [`sensing`] builds circulant, Toeplitz, partially structured and Gaussian
//!   sensing operators and checks the DFT identities they satisfy.
//! * [`sigsim`] simulates sparse coupled autoregressive pairs and GLM spike
//!   networks with known ground truth.
//! * [`recovery`] reconstructs sparse signals from compressed measurements.
//! * [`var`] fits vector autoregressions and computes time-domain Granger
//!   causality, pairwise and conditional.
//! * [`spectral`] decomposes a bivariate VAR in frequency and computes
//!   spectral Granger causality.
//!
//! Interchangeable algorithms (sparse solvers, Granger estimators) implement a
//! common trait and are looked up by name through a [`registry::Registry`].

pub mod error;
pub mod fft;
pub mod linalg;
pub mod recovery;
pub mod registry;
pub mod rng;
pub mod sensing;
pub mod sigsim;
pub mod spectral;
pub mod var;

pub use error::{Error, Result};
pub use registry::Registry;

/// Multichannel time series, one row per channel and one column per sample.
pub type Series = nalgebra::DMatrix<f64>;
