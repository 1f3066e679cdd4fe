//! Tensor trains and alternating cross interpolation (ACI) for elementwise
//! operations such as Hadamard products, with error control and O(χ³) cost.
//!
//! Building blocks:
//! - [`tt`]: the [`TensorTrain`] type, exact evaluation and a dense oracle;
//! - [`prrlu`]: rank-revealing LU with full pivoting and cross interpolation;
//! - [`aci`]: the elementwise engine;
//! - [`tci`]: two-site cross interpolation of black-box functions;
//! - [`fit`]: a variational O(χ⁴) Hadamard product used as a baseline.

// `!(x >= 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod aci;
pub mod error;
pub mod fit;
pub mod index;
mod linalg;
pub mod prrlu;
pub mod quantics;
pub mod report;
pub mod serialize;
pub mod tci;
pub mod tt;

mod sweep;

pub use aci::{aci, AciOptions, AciState, Elementwise, ElementwiseFunction};
pub use error::{Error, Result};
pub use fit::{hadamard_fit, FitConfig, InitialGuess};
pub use index::{IndexSet, MultiIndex, Side};
pub use prrlu::{cross_interpolate, ldu, CrossResult, Ldu, LduOptions, Orientation};
pub use quantics::QuanticsGrid;
pub use report::SweepReport;
pub use sweep::Direction;
pub use tci::{sampled_max_error, tci_build, BlackBoxFunction, Evaluable, Sampling, TciOptions};
pub use tt::{clamped_bond_dims, random_tt, slice, Entries, TensorTrain, C64};
