//! Two-stage calibration of degradation parameters against aging data.

// `!(x > 0.0)` is used on purpose so that NaN is rejected along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dataset;
pub mod error;
pub mod parameter;
pub mod pipeline;
pub mod solver;
