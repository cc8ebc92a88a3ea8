//! Factorized two-body interaction models, training, and the spectral
//! diagnostics built on top of them.

// Validation uses `!(x > 0.0)` style checks so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod factorized_interactions;
pub mod io_util;
pub mod nn_core;
pub mod spectral_analysis;
pub mod suzuki_lab;
pub mod synth_gen;
pub mod tan_model;
pub mod tensor_store;
pub mod training_pipeline;

pub use error::{Error, Result};
