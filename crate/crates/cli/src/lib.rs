//! Command-line front end for the soft-sensor toolkit: dataset generation,
//! offline benchmarking, online adaptation runs and result comparison driven
//! by a single TOML config.

pub mod commands;
pub mod config;
pub mod output;
