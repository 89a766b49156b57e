pub mod dynamics;
pub mod config;
pub mod error;
pub mod experiments;
pub mod fft3;
pub mod interactions;
pub mod lattice;
pub mod modes;
pub mod resonance;
pub mod slowmanifold;
pub mod snapshot;

pub use error::{Error, Result};
