//! Heat semigroups of the half-line and glued Bessel operators.

mod bounds;
mod evolve;
mod kernel;
mod mixed;
mod operator;

pub use bounds::{
    bound_kind, fit_sandwich, hat_domination_defect, prefactor_slope, verify_bounds, verify_gauss1, verify_gauss2,
    verify_gauss3, BoundKind, BoundShape, PrefactorReport, SandwichCell, SandwichConfig, SandwichFit, SandwichReport,
};
pub use evolve::{evolve, evolve_block, replay_block, Block, Schedule, StepControl};
pub use kernel::{
    kernel_fields, replay_kernel_fields, source_indices, verify_assembly, AssemblyReport, AssemblyRow, HeatKernelField,
    HeatModel, Provenance, ASSEMBLY_FLOOR,
};
pub use mixed::{
    eq435_convolution, hitting_cdf, hitting_density_comparand, hitting_mass_until, hitting_total_mass,
    log_hitting_density_comparand, opposite_cells, phi_integral, pi_integral, psi_integral, verify_eq435, verify_phi,
    verify_pi, verify_psi, Eq435Report, JunctionKernel, PhiReport, PiReport, PsiReport, PsiRow,
};
pub use operator::{DiscreteOperator, Domain, FarBoundary};
