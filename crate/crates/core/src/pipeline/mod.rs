//! Error metrics, RANSAC and the synthetic experiment protocol.

pub mod experiment;
pub mod metrics;
pub mod ransac;
pub mod synthetic;
