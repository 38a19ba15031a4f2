//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate metric at x = {at:?}: {detail}")]
    DegenerateMetric { at: Vec<f64>, detail: String },

    #[error("flow integration produced a non-finite state at t = {t}")]
    IntegrationFailure { t: f64 },

    #[error("trapped geodesic: no boundary exit before t = {t_max}")]
    TrappedRay { t_max: f64 },

    #[error("Fermi frame degenerated at t = {t} (Gram determinant {gram_det}); try a smaller dt")]
    ChartFailure { t: f64, gram_det: f64 },

    #[error(
        "Riccati blow-up: Im M lost positive definiteness at t = {t} (min eigenvalue {min_eig})"
    )]
    RiccatiBlowup { t: f64, min_eig: f64 },

    #[error("deformation matrix became singular at t = {t} (|det Y| = {det_abs})")]
    SingularY { t: f64, det_abs: f64 },

    #[error("branch discontinuity in sqrt(det Y) at t = {t}: |d arg| = {jump} > pi; reduce dt")]
    BranchJump { t: f64, jump: f64 },

    #[error("beam construction failed for family node {node}: {source}")]
    FamilyNode {
        node: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid parameter {name}: {detail}")]
    InvalidParameter { name: &'static str, detail: String },

    #[error("empty sample set for {what}")]
    EmptySamples { what: &'static str },

    #[error("quadrature grid too coarse: {detail}")]
    Resolution { detail: String },

    #[error("stationary-phase precondition violated: |grad phi| = {min_grad} on the support")]
    VanishingGradient { min_grad: f64 },

    #[error("metric fixture `{id}` is not declared simple")]
    NotSimple { id: String },

    #[error("CFL violation: dt = {dt} exceeds stable limit {limit}")]
    CflViolation { dt: f64, limit: f64 },

    #[error("wave solver blew up at step {step}")]
    SolverBlowup { step: usize },

    #[error("unknown fixture id `{0}`")]
    UnknownFixture(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
