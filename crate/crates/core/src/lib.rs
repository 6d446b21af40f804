//! Phase-field simulation of crack networks (craquelure) in a brittle elastic
//! film bonded to a displacing substrate.

pub mod analytic1d;
pub mod cli;
pub mod config;
pub mod error;
pub mod evolution;
pub mod fem;
pub mod mesh;
pub mod output;
pub mod params;
pub mod solvers;
pub mod sparse;
pub mod staggered;

pub use error::{Error, Result};
