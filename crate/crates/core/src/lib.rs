//! Hamilton-Jacobi equations on a line with time-periodic flux limiters at
//! a finite set of junctions: monotone schemes, cell problems, effective
//! flux limiters and homogenization experiments.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cell;
pub mod error;
pub mod exec;
pub mod hamiltonian;
pub mod homogenization;
pub mod model;
pub mod scenario;
pub mod solver;
pub mod space_time;
pub mod traffic;

pub use cell::{
    effective_flux_limiter, effective_hamiltonian, ergodic_constant, rho_sweep, truncated_corrector, CellNumerics,
    CorrectorNumerics, ErgodicEstimate, FluxLimiterEstimate,
};
pub use error::{Error, Result};
pub use exec::ExecPolicy;
pub use hamiltonian::{Branch, Hamiltonian, HamiltonianSpec};
pub use homogenization::{convergence_report, solve_effective, solve_oscillatory, ConvergenceReport, EpsilonSweep};
pub use model::{EffectiveModel, SlopeQuadruple};
pub use scenario::{InitialDatum, JunctionScenario, PhaseSchedule, ScenarioSpec};
pub use solver::{
    comparison_check, godunov_flux, solve_cauchy, BoundaryCondition, BranchLayout, CauchyOptions, Grid1D, GridSolution,
    Trajectory,
};
pub use space_time::{CosinePotential, SpaceTimeHamiltonian, SpaceTimeSpec};
pub use traffic::{critical_distance_estimate, CheckReport, CriticalDistance, SpacingReport};

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
