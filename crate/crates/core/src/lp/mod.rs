//! Relaxed bounds of general binary-outcome Bell functionals.

pub mod functional;
pub mod relaxed;
pub mod simplex;

pub use functional::{
    builtin, deterministic_bound, functional_from_correlators, imm22_correlators, BellFunctional,
    DeterministicStrategy,
};
pub use relaxed::{relaxed_bound_lp, BranchStats, LPConfig, RelaxedBound};
