//! Jacobi polynomials with degree-linear complex parameters, the limiting
//! Cauchy-transform equation of their zero distributions, and the rational
//! quadratic differentials whose critical graphs carry those zeros.

pub mod cli;
pub mod ddouble;
pub mod error;
pub mod exsolve;
pub mod geodesy;
pub mod jacobi;
pub mod limitfield;
pub mod motherbody;
pub mod output;
pub mod poly;
pub mod qdclass;
pub mod tracer;

pub use error::{Error, Result};
pub use num_complex::Complex64;
