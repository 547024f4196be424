//! Hardy-space atoms and the `H¹ → L¹` behaviour of the Riesz transforms.

mod atoms;
mod counterexample;
mod maximal;
mod rh;
mod sweep;

pub use atoms::*;
pub use counterexample::*;
pub use maximal::*;
pub use rh::*;
pub use sweep::*;
