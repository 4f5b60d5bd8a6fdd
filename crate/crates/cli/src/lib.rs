//! Command-line front end: presets and problem files, the solve pipeline,
//! η-sweeps and the result artifacts.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod artifacts;
pub mod commands;
pub mod pipeline;
pub mod problem;
