//! Numerical toolkit for a Slater-versus-Jastrow separation: a hard
//! antisymmetric function, its exact expansions and flattenings, a constructive
//! network approximation, and a training harness for both ansatz families.

pub mod approxnet;
pub mod error;
pub mod flatten;
pub mod hardfn;
pub mod hiprec;
pub mod partitions;
#[cfg(test)]
mod props;
pub mod report;
pub mod symfunc;
pub mod train;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

/// n! as f64.
pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// ln n! as f64 (exact summation, fine for the small n used here).
pub fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|i| (i as f64).ln()).sum()
}
