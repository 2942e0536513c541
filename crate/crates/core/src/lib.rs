//! Rank-1 lattice rules and polynomial lattice rules for quasi-Monte Carlo
//! integration: component-by-component construction, worst-case errors in
//! weighted function spaces, point generation and randomization.

pub mod algebra;
pub mod cbc;
pub mod error;
pub mod fft;
pub mod io;
pub mod points;
pub mod qmc;
pub mod spaces;
pub mod special;
pub mod verify;
pub mod wce;
pub mod weights;

pub use error::{Error, Result};
