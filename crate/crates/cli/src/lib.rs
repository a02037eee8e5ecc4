//! Configuration, CSV output and experiment runners for the `gge-thermo` binary.

pub mod config;
pub mod csv;
pub mod experiments;
