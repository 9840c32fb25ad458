#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod error;
pub mod format;
pub mod freeconv;
pub mod measures;
pub mod montecarlo;
mod numeric;
pub mod potential;
mod quadrature;
pub mod rtransform;
pub mod stieltjes;

pub use error::{Error, Result};
pub use measures::{Measure, MeasureSpec, SupportInterval};
