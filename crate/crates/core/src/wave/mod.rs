//! Reference wave solvers, boundary traces, observability experiments and
//! the lifted wave Ansatz.

pub mod ansatz;
pub mod error_decomp;
pub mod observability;
pub mod solver;
pub mod solver2d;

pub use ansatz::{
    bridge_comparison, build_lifted_ansatz, helmholtz_pairing, helmholtz_residual_field, pi_apply,
    quasimode_residual, source_time_integration_ratio, two_branch_values, BridgeReport,
    DataTransport, LiftedAnsatz, TestFunction,
};
pub use error_decomp::{
    integral_observability_constant, wave_error_decomposition, ErrorDecomposition,
    IntegralObservabilityReport,
};
pub use observability::{observability_ratio, ratio_slope, EnsembleSpec, ObservabilityReport};
pub use solver::{
    d_alpha_apply, dtn_trace, energy_drift, solve_wave_1d, BoundaryTrace, WaveHistory1D,
};
pub use solver2d::{solve_wave_2d, SpaceTimeFn, Wave2DConfig, Wave2DRun};
