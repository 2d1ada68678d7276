//! Maximum-likelihood polyline maps from 2-D laser range scans.

pub mod baselines;
pub mod bench;
pub mod cli;
pub mod extraction;
pub mod geometry;
pub mod io;
pub mod methods;
pub mod metrics;
pub mod optimization;
pub mod scan;
pub mod sensor_model;
pub mod simulator;
