//! Periodic grids, discrete Fourier analysis and dyadic blocks.

pub mod dump;
pub mod dyadic;
pub mod field;
pub mod grid;
pub mod ops;

pub use dyadic::{build_dyadic_filter, default_filter, dyadic_block, low_sum, DyadicFilter};
pub use field::{inverse_transform, transform, SpectralField};
pub use grid::{make_grid, Grid};
pub use ops::{curl, div, grad, laplacian, sym_grad};
