pub mod alphabet;
pub mod artifacts;
pub mod cramer;
pub mod diagnostics;
pub mod dimension;
pub mod error;
pub mod gauss;
pub mod measure;
pub mod primes;
pub mod psi;
pub mod series;
pub mod util;

pub use error::{Error, Result};
