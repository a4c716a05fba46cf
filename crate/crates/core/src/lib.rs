//! Simulation and analysis of VO₂-switch relaxation oscillator networks.

pub mod analysis;
pub mod circuit;
pub mod config;
pub mod cpg;
pub mod device;
pub mod error;
pub mod io;
pub mod presets;
pub mod sweep;

pub use error::{Error, Result};
