//! Library half of the benchmark CLI, split out so integration tests can
//! exercise command plumbing without spawning the binary.

pub mod commands;
pub mod config;
pub mod csvio;
pub mod plot;
