//! Numerical laboratory for the anisotropic Landau-de Gennes gradient flow
//! near a nematic-isotropic interface.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod approx;
pub mod cli;
pub mod error;
pub mod field;
pub mod layer;
pub mod spectral;
pub mod tensor;

pub use error::{Error, Result};
