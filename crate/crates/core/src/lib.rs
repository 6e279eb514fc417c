//! Pseudo-spectral viscous shallow-water simulation around a heat-driven quasi-solution,
//! with Littlewood-Paley and Besov-norm tooling on periodic grids.

pub mod besov;
pub mod error;
pub mod harness;
pub mod init;
pub mod lp;
pub mod paraproduct;
pub mod quasi;
pub mod solver;

pub use error::{Error, Result};
