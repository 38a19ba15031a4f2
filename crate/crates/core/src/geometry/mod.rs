//! Metrics, domains, Hamiltonian/geodesic flow and Fermi tube charts.

pub mod domain;
pub mod fermi;
pub mod flow;
pub mod metric;

pub use domain::{DomainKind, DomainSpec};
pub use fermi::{fermi_frame, FermiChart};
pub use flow::{
    check_nontrapping, free_flow, hamiltonian, hamiltonian_flow, unit_speed_momentum,
    NonTrappingReport, PhasePoint, Ray, Violation, DEFAULT_DT,
};
pub use metric::{christoffel, polar_form_metric, MetricField, SmoothScalar};
