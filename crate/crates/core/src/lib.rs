//! Certified constants and numerical checks for elliptic estimates on the
//! 3-torus with nearly flat metrics.

pub mod error;
pub mod interval;
pub mod field;
pub mod ledger;
pub mod metric;
pub mod one_form;
pub mod verify;

pub use error::{Error, Result};
pub use interval::IntervalValue;
