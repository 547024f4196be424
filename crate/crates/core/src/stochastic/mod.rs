//! Monte Carlo for the reflected, killed and glued Bessel diffusions.

mod process;
mod stats;

pub use process::*;
pub use stats::*;
