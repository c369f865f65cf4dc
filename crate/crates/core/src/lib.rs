//! Physics-based lithium-ion degradation twin built on a single particle model.

// `!(x > 0.0)` is used on purpose so that NaN is rejected along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cell;
pub mod constants;
pub mod cycler;
pub mod degradation;
pub mod duty;
pub mod error;
pub mod esoh;
pub mod kinetics;
pub mod lifetime;
pub mod metrics;
pub mod ocp;
pub mod output;
pub mod params;
pub mod particle;
pub mod profile;
pub mod state;
