//! Riesz transforms `∂_x L^{-1/2}` for the Neumann, Dirichlet and glued
//! Bessel operators: pointwise kernels, grid application through
//! resolvents, and the kernel derivative bounds.

mod bounds;
mod kernel;
mod resolvent;

pub use bounds::*;
pub use kernel::{glued_riesz_kernel, riesz_kernel, riesz_kernel_dy, Bc, KernelOptions, KernelValue};
pub use resolvent::{ResolventOptions, RieszImage, RieszSolver, RieszTarget};
