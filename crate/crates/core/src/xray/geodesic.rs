//! Geodesic X-ray transform on non-trapping domains: integrate along the
//! traced ray, with arc length doubling as the time argument for
//! time-dependent integrands.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::geometry::{hamiltonian_flow, unit_speed_momentum, DomainSpec, MetricField, PhasePoint};

/// Integrand of the transform: static `f(x)` or time-dependent `f(s, x)`.
pub enum RayIntegrand<'a> {
    Static(&'a dyn Fn(&DVector<f64>) -> f64),
    TimeDependent(&'a dyn Fn(f64, &DVector<f64>) -> f64),
}

impl RayIntegrand<'_> {
    fn eval(&self, s: f64, x: &DVector<f64>) -> f64 {
        match self {
            RayIntegrand::Static(f) => f(x),
            RayIntegrand::TimeDependent(f) => f(s, x),
        }
    }
}

/// `I_{x,omega} f = int_0^{tau} f(s, gamma(s)) ds` along the unit-speed
/// geodesic entering at `(x, omega)`.
pub fn xray_forward_geodesic(
    f: &RayIntegrand<'_>,
    metric: &MetricField,
    domain: &DomainSpec,
    entry: (&DVector<f64>, &DVector<f64>),
    dt: f64,
    t_budget: f64,
) -> Result<f64> {
    let (x, omega) = entry;
    let p = unit_speed_momentum(metric, x, omega);
    let ray = hamiltonian_flow(metric, &PhasePoint::new(x.clone(), p), dt, t_budget, domain)?;
    if ray.exit_time.is_none() {
        return Err(Error::TrappedRay { t_max: t_budget });
    }
    // Composite Simpson over the uniform part, trapezoid on the final
    // (boundary-refined) substep.
    let vals: Vec<(f64, f64)> = ray
        .samples
        .iter()
        .map(|(t, pp)| (*t, f.eval(*t, &pp.x)))
        .collect();
    let mut acc = 0.0;
    let mut i = 0;
    while i + 2 < vals.len() {
        let h1 = vals[i + 1].0 - vals[i].0;
        let h2 = vals[i + 2].0 - vals[i + 1].0;
        if (h1 - h2).abs() < 1e-12 {
            acc += h1 / 3.0 * (vals[i].1 + 4.0 * vals[i + 1].1 + vals[i + 2].1);
            i += 2;
        } else {
            acc += 0.5 * h1 * (vals[i].1 + vals[i + 1].1);
            i += 1;
        }
    }
    while i + 1 < vals.len() {
        let h = vals[i + 1].0 - vals[i].0;
        acc += 0.5 * h * (vals[i].1 + vals[i + 1].1);
        i += 1;
    }
    Ok(acc)
}
