//! Principal nest of the real quadratic family f_a(x) = a − x².
pub mod cache;
pub mod cli;
pub mod config;
pub mod cycle;
pub mod nest;
pub mod param;
pub mod qs;
pub mod quad;
pub mod real;
pub mod stats;
mod text;
pub use quad::{QuadError, QuadraticMap};
pub use real::{HighPrecisionReal, Parameter};
