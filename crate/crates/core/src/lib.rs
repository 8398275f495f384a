//! Tensor completion by multi-way delay embedding and low-rank Tucker
//! decomposition.
//!
//! The pipeline lifts an incomplete tensor into a higher-order Hankel tensor
//! ([`mdt`]), fits a low-multilinear-rank Tucker model to the observed entries
//! ([`tucker`], with automatic rank selection in [`rank`]), and maps the fit back
//! with the least-squares inverse embedding. [`pipeline::recover`] runs all three
//! steps.
//!
//! Mode indices are 0-based throughout.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod io;
pub mod linalg;
pub mod mask;
pub mod mdt;
pub mod metrics;
pub mod pipeline;
pub mod rank;
pub mod signal;
pub mod tensor;
pub mod tucker;

pub use error::{Error, Result};
pub use mdt::EmbeddingSpec;
pub use pipeline::{recover, RankPlan, RecoveryReport, RecoveryRequest};
pub use tensor::{DenseTensor, MaskTensor, Shape};
pub use tucker::TuckerModel;
