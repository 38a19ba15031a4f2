//! Coefficient fields and their regularity machinery: moduli of continuity,
//! sampled seminorms, finite-difference surrogates, hyperbolicity and
//! monotonicity checks, and the weighted travel time.

pub mod fixtures;
pub mod seminorm;

use nalgebra::DVector;
use serde::Serialize;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{check_nontrapping, hamiltonian_flow, unit_speed_momentum};
use crate::geometry::{DomainSpec, MetricField, PhasePoint};

/// Regularity class tags for coefficient fields.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum RegularityClass {
    Lipschitz,
    Zygmund,
    LogLipschitz,
    LogZygmund,
    Holder(f64),
}

impl RegularityClass {
    pub fn name(&self) -> String {
        match self {
            RegularityClass::Lipschitz => "lipschitz".into(),
            RegularityClass::Zygmund => "zygmund".into(),
            RegularityClass::LogLipschitz => "log_lipschitz".into(),
            RegularityClass::LogZygmund => "log_zygmund".into(),
            RegularityClass::Holder(e) => format!("holder({e})"),
        }
    }

    /// Second-difference classes divide by kappa of the displacement; first
    /// difference classes use plain increments.
    pub fn uses_second_difference(&self) -> bool {
        matches!(self, RegularityClass::Zygmund | RegularityClass::LogZygmund)
    }
}

/// Modulus of continuity `kappa_X(y)` entering all error budgets:
/// `kappa_Z(y) = y`, `kappa_LZ(y) = kappa_LL(y) = y log(1 + 1/y)`,
/// `kappa_{C^theta}(y) = y^theta`.
pub fn modulus_kappa(class: RegularityClass, y: f64) -> Result<f64> {
    if !(y > 0.0 && y < 1.0) {
        return Err(Error::InvalidParameter {
            name: "y",
            detail: format!("modulus argument must lie in (0,1), got {y}"),
        });
    }
    Ok(match class {
        RegularityClass::Lipschitz | RegularityClass::Zygmund => y,
        RegularityClass::LogLipschitz | RegularityClass::LogZygmund => y * (1.0 + 1.0 / y).ln(),
        RegularityClass::Holder(theta) => y.powf(theta),
    })
}

type FieldFn = Arc<dyn Fn(&DVector<f64>) -> f64 + Send + Sync>;

/// A scalar coefficient field `alpha(x)` with declared regularity and
/// hyperbolicity bounds `0 < alpha_* <= alpha <= alpha^*`.
#[derive(Clone)]
pub struct CoefficientField {
    pub name: String,
    eval: FieldFn,
    pub declared_class: RegularityClass,
    pub bounds: (f64, f64),
}

impl CoefficientField {
    pub fn new(
        name: impl Into<String>,
        eval: FieldFn,
        declared_class: RegularityClass,
        bounds: (f64, f64),
    ) -> Self {
        assert!(
            bounds.0 > 0.0 && bounds.1 >= bounds.0,
            "strict hyperbolicity bounds"
        );
        Self {
            name: name.into(),
            eval,
            declared_class,
            bounds,
        }
    }

    pub fn eval(&self, x: &DVector<f64>) -> f64 {
        (self.eval)(x)
    }

    /// Checks the strict hyperbolicity bracket on a sample set.
    pub fn check_hyperbolicity(&self, samples: &[DVector<f64>]) -> bool {
        samples.iter().all(|x| {
            let v = self.eval(x);
            v >= self.bounds.0 - 1e-12 && v <= self.bounds.1 + 1e-12
        })
    }
}

/// Forward-difference gradient `(alpha(x + h e_j) - alpha(x)) / h`.
///
/// For a class-`X` field the deviation from any reasonable gradient value is
/// bounded by `C h^{-1} kappa_X(h)`.
pub fn fd_gradient(field: &CoefficientField, x: &DVector<f64>, h: f64) -> DVector<f64> {
    let n = x.len();
    let f0 = field.eval(x);
    DVector::from_fn(n, |j, _| {
        let mut xp = x.clone();
        xp[j] += h;
        (field.eval(&xp) - f0) / h
    })
}

/// Second-difference Laplacian surrogate
/// `sum_j (alpha(x+h e_j) + alpha(x-h e_j) - 2 alpha(x)) / h^2`,
/// bounded by `C kappa_X(h) h^{-2}` for class-`X` fields.
pub fn fd_laplacian(field: &CoefficientField, x: &DVector<f64>, h: f64) -> f64 {
    let n = x.len();
    let f0 = field.eval(x);
    (0..n)
        .map(|j| {
            let mut xp = x.clone();
            xp[j] += h;
            let mut xm = x.clone();
            xm[j] -= h;
            (field.eval(&xp) + field.eval(&xm) - 2.0 * f0) / (h * h)
        })
        .sum()
}

/// Result of the `grad_g(x alpha(x)) >= alpha_0` monotonicity check.
#[derive(Clone, Debug, Serialize)]
pub struct MonotonicityReport {
    pub alpha0_estimate: f64,
    pub holds: bool,
    pub samples: usize,
}

/// Componentwise forward-difference infimum of `x -> x_j alpha(x)` over the
/// sample set; `holds` when the infimum is strictly positive.
pub fn monotonicity_check(
    field: &CoefficientField,
    _metric: &MetricField,
    samples: &[DVector<f64>],
    h: f64,
) -> MonotonicityReport {
    let mut inf = f64::INFINITY;
    for x in samples {
        let a0 = field.eval(x);
        for j in 0..x.len() {
            let mut xp = x.clone();
            xp[j] += h;
            let ap = field.eval(&xp);
            let d = ((xp[j]) * ap - x[j] * a0) / h;
            inf = inf.min(d);
        }
    }
    MonotonicityReport {
        alpha0_estimate: inf,
        holds: inf > 0.0,
        samples: samples.len(),
    }
}

/// `T_alpha = sup_gamma int_gamma sqrt(alpha) ds`, approximated over the
/// non-trapping sample set by composite Simpson quadrature along each ray.
pub fn travel_time(
    field: &CoefficientField,
    metric: &MetricField,
    domain: &DomainSpec,
    n_rays: usize,
    seed: u64,
) -> Result<f64> {
    let t_budget = 64.0;
    let report = check_nontrapping(metric, domain, n_rays.min(16), t_budget, seed);
    if !report.violations.is_empty() {
        return Err(Error::TrappedRay { t_max: t_budget });
    }

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    use rand_chacha::rand_core::SeedableRng;
    let mut t_alpha: f64 = 0.0;
    for i in 0..n_rays {
        let (x, omega) = boundary_sample(domain, &mut rng, i);
        let p = unit_speed_momentum(metric, &x, &omega);
        let ray = hamiltonian_flow(metric, &PhasePoint::new(x, p), 1e-3, t_budget, domain)?;
        if ray.exit_time.is_none() {
            return Err(Error::TrappedRay { t_max: t_budget });
        }
        t_alpha = t_alpha.max(weighted_length(field, &ray));
    }
    Ok(t_alpha)
}

fn boundary_sample(
    domain: &DomainSpec,
    rng: &mut rand_chacha::ChaCha8Rng,
    index: usize,
) -> (DVector<f64>, DVector<f64>) {
    use rand::Rng;
    let n = domain.dim();
    if n == 1 {
        let (lo, hi) = domain.bounding_box();
        return if index.is_multiple_of(2) {
            (lo, DVector::from_vec(vec![1.0]))
        } else {
            (hi, DVector::from_vec(vec![-1.0]))
        };
    }
    loop {
        let dir = crate::geometry::flow::sample_unit_vector(n, rng);
        let x = match domain.kind() {
            crate::geometry::DomainKind::UnitBall { .. } => dir.clone(),
            _ => {
                // Rejection-free fallback: take a bounding-box face point.
                let (lo, hi) = domain.bounding_box();
                let mut x = lo.clone();
                for i in 0..n {
                    x[i] = lo[i] + rng.random::<f64>() * (hi[i] - lo[i]);
                }
                x
            }
        };
        let nu = domain.euclid_normal(&x);
        let omega = if dir.dot(&nu) > 0.0 { -dir } else { dir };
        if omega.dot(&nu).abs() > 0.05 {
            return (&x - &nu * 1e-12, omega);
        }
    }
}

/// Composite Simpson of `sqrt(alpha)` along the ray samples (arc-length
/// parametrised rays, so `ds = speed dt` with unit speed).
fn weighted_length(field: &CoefficientField, ray: &crate::geometry::Ray) -> f64 {
    let vals: Vec<(f64, f64)> = ray
        .samples
        .iter()
        .map(|(t, pp)| (*t, field.eval(&pp.x).max(0.0).sqrt()))
        .collect();
    if vals.len() < 2 {
        return 0.0;
    }
    // Simpson on uniform interior, trapezoid on the (short) final substep.
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
    acc
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use approx::assert_abs_diff_eq;

    fn v(vals: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(vals)
    }

    #[test]
    fn kappa_values() {
        assert_abs_diff_eq!(modulus_kappa(RegularityClass::Zygmund, 0.25).unwrap(), 0.25);
        assert_abs_diff_eq!(
            modulus_kappa(RegularityClass::LogLipschitz, 0.5).unwrap(),
            0.5 * 3.0f64.ln(),
            epsilon = 1e-12
        );
        // log divergence of kappa_LZ(y)/y as y -> 0+.
        let y = 1e-6;
        let ratio = modulus_kappa(RegularityClass::LogZygmund, y).unwrap() / y;
        assert!(ratio > 10.0);
        assert!(modulus_kappa(RegularityClass::Zygmund, 0.0).is_err());
        assert!(modulus_kappa(RegularityClass::Zygmund, 1.0).is_err());
    }

    #[test]
    fn kappa_ratio_monotone() {
        // kappa_LL / kappa_Z = log(1 + 1/y): decreasing on (0,1), >= 1 up to
        // y = 1/(e - 1) and >= log 2 everywhere.
        let mut prev = f64::INFINITY;
        for k in 1..20 {
            let y = (k as f64) / 20.0;
            let r = modulus_kappa(RegularityClass::LogLipschitz, y).unwrap()
                / modulus_kappa(RegularityClass::Zygmund, y).unwrap();
            if y <= 1.0 / (std::f64::consts::E - 1.0) {
                assert!(r >= 1.0 - 1e-12);
            }
            assert!(r >= std::f64::consts::LN_2 - 1e-12);
            assert!(r <= prev);
            prev = r;
        }
    }

    #[test]
    fn fd_gradient_trivia() {
        let c = constant(1, 1.0);
        assert_eq!(fd_gradient(&c, &v(&[0.3]), 1e-4)[0], 0.0);
        let lin = CoefficientField::new(
            "linear",
            Arc::new(|x: &DVector<f64>| x[0] + 2.0),
            RegularityClass::Lipschitz,
            (1.0, 4.0),
        );
        let g = fd_gradient(&lin, &v(&[0.5, 0.2]), 1e-4);
        assert_abs_diff_eq!(g[0], 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(g[1], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn fd_laplacian_trivia() {
        let c = constant(2, 2.0);
        assert_eq!(fd_laplacian(&c, &v(&[0.1, 0.2]), 1e-3), 0.0);
        // |x|^2 has exact second differences: laplacian 2n.
        let sq = CoefficientField::new(
            "sq",
            Arc::new(|x: &DVector<f64>| 1.0 + x.norm_squared()),
            RegularityClass::Lipschitz,
            (1.0, 10.0),
        );
        for h in [1e-1, 1e-2, 1e-3] {
            assert_abs_diff_eq!(fd_laplacian(&sq, &v(&[0.3, -0.1]), h), 4.0, epsilon = 1e-7);
        }
    }

    #[test]
    fn weierstrass_fd_scalings_bounded() {
        // |fd_gradient| <= C kappa_Z(h)/h = C and |fd_laplacian| h^2/kappa_Z(h)
        // bounded, over dyadic h.
        let w = weierstrass(1, 0.45);
        let x = v(&[0.37]);
        let mut max_grad: f64 = 0.0;
        let mut max_lap: f64 = 0.0;
        for k in 4..=16 {
            let h = 2f64.powi(-k);
            let kappa = modulus_kappa(RegularityClass::Zygmund, h).unwrap();
            max_grad = max_grad.max(fd_gradient(&w, &x, h).amax());
            max_lap = max_lap.max(fd_laplacian(&w, &x, h).abs() * h * h / kappa);
        }
        assert!(max_grad < 50.0, "gradient surrogate unbounded: {max_grad}");
        assert!(max_lap < 50.0, "laplacian surrogate unbounded: {max_lap}");
    }

    #[test]
    fn monotonicity_examples() {
        let m = MetricField::euclidean(1);
        // alpha = 1: d/dx (x * 1) = 1.
        let samples: Vec<DVector<f64>> = (0..100).map(|i| v(&[i as f64 / 100.0])).collect();
        let rep = monotonicity_check(&constant(1, 1.0), &m, &samples, 1e-5);
        assert!(rep.holds);
        assert_abs_diff_eq!(rep.alpha0_estimate, 1.0, epsilon = 1e-9);

        // alpha = 1 + 0.1 sin(4x): alpha0 ~ inf(alpha + x alpha').
        let a = CoefficientField::new(
            "sin",
            Arc::new(|x: &DVector<f64>| 1.0 + 0.1 * (4.0 * x[0]).sin()),
            RegularityClass::Lipschitz,
            (0.9, 1.1),
        );
        let rep = monotonicity_check(&a, &m, &samples, 1e-6);
        let oracle = (0..10_000)
            .map(|i| {
                let x = i as f64 / 10_000.0;
                1.0 + 0.1 * (4.0 * x).sin() + x * 0.4 * (4.0 * x).cos()
            })
            .fold(f64::INFINITY, f64::min);
        assert!(rep.holds);
        assert_abs_diff_eq!(rep.alpha0_estimate, oracle, epsilon = 1e-3);

        // alpha = 1/(1+x^2) on a larger domain: x alpha has negative slope.
        let decay = CoefficientField::new(
            "decay",
            Arc::new(|x: &DVector<f64>| 1.0 / (1.0 + x[0] * x[0])),
            RegularityClass::Lipschitz,
            (0.05, 1.0),
        );
        let wide: Vec<DVector<f64>> = (0..300).map(|i| v(&[3.0 * i as f64 / 300.0])).collect();
        let rep = monotonicity_check(&decay, &m, &wide, 1e-6);
        assert!(!rep.holds);
    }

    #[test]
    fn travel_time_examples() {
        let m1 = MetricField::euclidean(1);
        let interval = DomainSpec::unit_interval();
        // alpha = 1 on the interval: T = 1.
        let t = travel_time(&constant(1, 1.0), &m1, &interval, 4, 3).unwrap();
        assert_abs_diff_eq!(t, 1.0, epsilon = 1e-6);
        // alpha = 4: integral of 2 ds = 2.
        let t = travel_time(&constant(1, 4.0), &m1, &interval, 4, 3).unwrap();
        assert_abs_diff_eq!(t, 2.0, epsilon = 1e-6);
        // alpha = 1 on the unit ball: diameter 2.
        let m2 = MetricField::euclidean(2);
        let ball = DomainSpec::unit_ball(2);
        let t = travel_time(&constant(2, 1.0), &m2, &ball, 400, 9).unwrap();
        assert!((t - 2.0).abs() < 1e-3, "T_alpha = {t}");
    }
}
