//! Grids, sampled functions, quadrature and dense complex matrices.

pub mod fsum;
pub mod grid;
pub mod matrix;
pub mod quad;
pub mod sampled;
pub mod vecnorm;

pub use grid::LogGrid;
pub use matrix::DenseMatrix;
pub use sampled::{PowerLaw, SampledFunction, VectorFunction};
pub use vecnorm::VecNorm;
