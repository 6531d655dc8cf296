//! Periodically driven transverse-field Ising chain: Bogoliubov-de Gennes
//! dynamics, Floquet analysis per momentum mode, and the entanglement entropy
//! of subchains at finite times and in the asymptotic periodic regime.

pub mod bdg;
pub mod cli;
pub mod corr;
pub mod entropy;
pub mod error;
pub mod floquet;
pub mod model;

pub use error::{Error, Result};
