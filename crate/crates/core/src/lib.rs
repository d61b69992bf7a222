//! Twist maps generated by variational principles, Mather's bump-function
//! perturbation, and Peierls-barrier certification of destroyed invariant
//! circles, together with the flat Finsler layer producing such maps as
//! Poincaré return maps.

pub mod aubry;
pub mod error;
pub mod genfun;
pub mod mather;
pub mod norms;
pub mod solve;
pub mod twist;

pub use error::{Error, Result};
