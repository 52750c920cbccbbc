//! Gaussian quantum processes on locally compact abelian groups: symplectic
//! validity of kernels and spectra, Fourier duality, spectral diagnostics and
//! simulation.

pub mod error;
pub mod groups;
pub mod io;
pub mod kernels;
pub mod linalg;
pub mod serde_util;
pub mod simulate;
pub mod spectra;
pub mod symplectic;

pub use error::{Error, Result};
