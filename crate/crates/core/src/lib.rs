//! Unsupervised energy disaggregation by convolutional sparse coding.
//!
//! A household's aggregate power series is decomposed into per-channel
//! contributions by jointly learning short convolution kernels ("atoms",
//! one per device class) and sparse placement coefficients, under
//! nonnegativity constraints. One channel carries the always-on baseline
//! load and is regularized as a group; the remaining channels carry
//! intermittent devices and are regularized entrywise.
//!
//! The crate provides the signal/dictionary types, matrix-free convolution
//! operators and their adjoints, the alternating inertial proximal solver,
//! event-detection metrics, and a synthetic household generator used for
//! testing and benchmarking.

pub mod conv;
pub mod datagen;
pub mod error;
pub mod ipalm;
pub mod lipschitz;
pub mod metrics;
pub mod prox;
pub mod reference;
pub mod signal;

pub use error::{Error, Result};
pub use signal::{AggregateSignal, Atoms, Coefficients, SolverConfig, SolverState, TOL_FEAS};
