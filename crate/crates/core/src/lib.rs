pub mod cauchy;
pub mod cli;
pub mod divdiff;
pub mod ensemble;
pub mod error;
pub mod extended;
pub mod multimeasure;
pub mod operator;
pub mod perturbation;
pub mod precision;
pub mod remainder;
pub mod ssf;

pub use error::{Error, Result};
