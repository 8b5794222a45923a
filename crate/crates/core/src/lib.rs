//! Simulation and analysis of quantum ciphers with classical keys.

pub mod bits;
pub mod cipher;
pub mod circuit;
pub mod error;
pub mod gf2n;
pub mod hilbert;
pub mod keyanalysis;
pub mod mub;
pub mod stream;

pub use error::{Error, Result};
