//! Bessel operators on the glued line `(-∞,-1] ∪ [1,∞)`: special functions,
//! heat semigroups, Riesz-transform kernels, Hardy-space atoms and the
//! associated diffusion.

pub mod error;
pub mod fit;
pub mod heat;
pub mod linalg;
pub mod quad;
pub mod riesz;
pub mod hardy;
pub mod scaled;
pub mod space;
pub mod specfun;
pub mod stochastic;
pub mod suite;

pub use error::{Error, Result};
pub use scaled::ScaledValue;
pub use specfun::Dimension;
