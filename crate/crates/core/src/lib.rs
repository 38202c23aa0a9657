//! Numerical toolkit for generalised real interpolation spaces.

// negated comparisons are used deliberately so that NaN is rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod couples;
pub mod error;
pub mod hardy;
pub mod maxreg;
pub mod numerics;
pub mod rearrangement;
pub mod ri_spaces;
pub mod sectorial;
pub mod weights;

pub use couples::{Couple, Decomposition, Field, Functional};
pub use error::{Error, Result};
pub use hardy::HardyOp;
pub use maxreg::{CauchyProblem, CauchySolution};
pub use num_complex::Complex64;
pub use numerics::{DenseMatrix, LogGrid, PowerLaw, SampledFunction, VecNorm, VectorFunction};
pub use rearrangement::{RearrangementResult, Tails, Weight};
pub use ri_spaces::{Membership, NormEstimate, PhiSpace, RiSpace};
pub use sectorial::{Contour, HolFunction, SectorialOperator};
pub use weights::{ClassConstant, SweepConfig, Verdict};
