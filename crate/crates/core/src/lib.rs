//! Phase-space Wigner calculus on discretized grids and certification of
//! quantum uncertainty inequalities.

pub mod certify;
pub mod error;
pub mod fft;
pub mod grid;
pub mod io;
pub mod json;
pub mod moments;
pub mod numeric;
pub mod report;
pub mod selftest;
pub mod states;
pub mod symplectic;
pub mod transforms;

pub use error::{Error, Result};
