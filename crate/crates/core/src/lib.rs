//! Maximum-likelihood estimation of multivariate normal means and
//! covariances from return panels with monotone missingness, using
//! parsimonious regressions where ordinary least squares breaks down.

pub mod error;
pub mod evaluate;
pub mod io;
pub mod linalg;
pub mod monomle;
pub mod panel;
pub mod portfolio;
pub mod regress;
pub mod simulate;

pub use error::{Error, Result};
