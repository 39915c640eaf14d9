//! Uncertainty-aware shared-control arbitration.
//!
//! The crate models how much authority an assistive robot should take while a
//! human teleoperates an end effector toward one of several targets. It
//! provides the confidence models, the bell-shaped policy and two distance
//! baselines, a synthetic operator, the Monte-Carlo study over 36 uncertainty
//! settings, rank statistics, file output, a CLI and an HTTP session service.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arbitration;
pub mod config;
pub mod engine;
pub mod error;
pub mod geometry;
pub mod intent;
pub mod io;
pub mod metrics;
pub mod operator;
pub mod rng;
pub mod scene;
pub mod service;
pub mod special;
pub mod stats;
pub mod uncertainty;

pub use error::{Error, Result};
