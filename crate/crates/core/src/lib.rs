//! Optimality checks, price calibration and LP cross-checks for selling a
//! good bundled with an undesirable attribute (ads) that a third party pays for.

pub mod calibrate;
pub mod cli;
pub mod conditions;
pub mod domain;
pub mod error;
pub mod measure;
pub mod oracle;
pub mod mechanisms;
pub mod quadrature;
pub mod test_functions;

pub use error::{Error, Result};
