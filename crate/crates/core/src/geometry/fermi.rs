//! Fermi frames and tube charts along rays.
//!
//! A parallel orthonormal frame `E_2..E_n` of the normal bundle is carried
//! along the ray; together with the unit tangent it gives coordinates in
//! which the metric is Euclidean on the ray to first order.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

use super::flow::{flow_rhs, rk4_step, Ray};
use super::metric::{christoffel, MetricField};

/// Default cap for the tube radius heuristic.
pub const TUBE_RADIUS_CAP: f64 = 0.5;

/// A Fermi chart: the ray, per-sample orthonormal frames, tube radius and the
/// overlapping chart intervals covering `[0, tau]`.
#[derive(Clone, Debug)]
pub struct FermiChart {
    pub ray: Ray,
    /// Per sample: columns `[e_1 = unit tangent, E_2, .., E_n]`.
    pub frames: Vec<DMatrix<f64>>,
    pub tube_radius: f64,
    /// Chart centers `t_l` (spacing = tube_radius).
    pub chart_centers: Vec<f64>,
    /// Consecutive `(t_l, t_{l+1})` pairs.
    pub chart_intervals: Vec<(f64, f64)>,
    /// Times at which the ray passes close to itself.
    pub self_intersections: Vec<f64>,
}

impl FermiChart {
    /// Gram matrix `F^T g F` of the frame at sample `i`.
    pub fn gram(&self, metric: &MetricField, i: usize) -> DMatrix<f64> {
        let x = &self.ray.samples[i].1.x;
        let g = metric.eval_g(x);
        self.frames[i].transpose() * g * &self.frames[i]
    }
}

/// Parallel-transport the normal frame along `ray`.
///
/// The geodesic is re-integrated jointly with the transport ODE
/// `Edot^k = -Gamma^k_ab xdot^a E^b` so frame and ray sit on identical time
/// nodes at full RK4 accuracy.
pub fn fermi_frame(ray: &Ray, metric: &MetricField) -> Result<FermiChart> {
    let n = metric.dim();
    assert!(ray.samples.len() >= 2, "ray must have at least 2 samples");

    let start = ray.start();
    let frame0 = initial_frame(metric, &start.x, &start.p)?;

    // State layout: [x (n), p (n), E columns (n * n)].
    let dim_state = 2 * n + n * n;
    let mut state = DVector::zeros(dim_state);
    state.rows_mut(0, n).copy_from(&start.x);
    state.rows_mut(n, n).copy_from(&start.p);
    for c in 0..n {
        state
            .rows_mut(2 * n + c * n, n)
            .copy_from(&frame0.column(c).into_owned());
    }

    let rhs = |s: &DVector<f64>| {
        let flow_part = flow_rhs(metric, &s.rows(0, 2 * n).into_owned());
        let x = s.rows(0, n).into_owned();
        let p = s.rows(n, n).into_owned();
        let mut out = DVector::zeros(dim_state);
        out.rows_mut(0, 2 * n).copy_from(&flow_part);
        let gamma = match christoffel(metric, &x) {
            Ok(g) => g,
            Err(_) => return DVector::from_element(dim_state, f64::NAN),
        };
        let xdot = metric.eval_ginv(&x) * &p;
        for c in 0..n {
            let e = s.rows(2 * n + c * n, n).into_owned();
            let mut edot = DVector::zeros(n);
            for k in 0..n {
                let mut acc = 0.0;
                for a in 0..n {
                    for b in 0..n {
                        acc += gamma[k][(a, b)] * xdot[a] * e[b];
                    }
                }
                edot[k] = -acc;
            }
            out.rows_mut(2 * n + c * n, n).copy_from(&edot);
        }
        out
    };

    let mut frames = Vec::with_capacity(ray.samples.len());
    frames.push(frame0);
    for w in ray.samples.windows(2) {
        let dt = w[1].0 - w[0].0;
        state = rk4_step(&rhs, &state, dt);
        if state.iter().any(|v| !v.is_finite()) {
            return Err(Error::IntegrationFailure { t: w[1].0 });
        }
        let mut f = DMatrix::zeros(n, n);
        for c in 0..n {
            f.set_column(c, &state.rows(2 * n + c * n, n).into_owned());
        }
        frames.push(f);
    }

    // Degeneracy check on the Gram determinant.
    for (i, f) in frames.iter().enumerate() {
        let x = &ray.samples[i].1.x;
        let g = metric.eval_g(x);
        let gram = f.transpose() * g * f;
        let det = gram.determinant();
        if det < 0.5 {
            return Err(Error::ChartFailure {
                t: ray.samples[i].0,
                gram_det: det,
            });
        }
    }

    let tube_radius = tube_radius_estimate(ray, metric, TUBE_RADIUS_CAP);
    let tau = ray.duration();
    let n_charts = (tau / tube_radius).ceil() as usize + 1;
    let chart_centers: Vec<f64> = (0..n_charts).map(|l| (l as f64) * tube_radius).collect();
    let chart_intervals = chart_centers.windows(2).map(|w| (w[0], w[1])).collect();
    let self_intersections = detect_self_intersections(ray, metric, tube_radius);

    Ok(FermiChart {
        ray: ray.clone(),
        frames,
        tube_radius,
        chart_centers,
        chart_intervals,
        self_intersections,
    })
}

fn initial_frame(metric: &MetricField, x: &DVector<f64>, p: &DVector<f64>) -> Result<DMatrix<f64>> {
    let n = metric.dim();
    let g = metric.eval_g_checked(x)?;
    let xdot = metric.eval_ginv(x) * p;
    let speed = xdot.dot(&(&g * &xdot)).sqrt();
    // A ray at rest (zero momentum) has no preferred tangent; any
    // g-orthonormal frame transports trivially along it.
    let mut cols: Vec<DVector<f64>> = if speed > 1e-12 {
        vec![xdot / speed]
    } else {
        Vec::new()
    };
    for k in 0..n {
        if cols.len() == n {
            break;
        }
        let mut e = DVector::zeros(n);
        e[k] = 1.0;
        for c in &cols {
            let proj = e.dot(&(&g * c));
            e -= c * proj;
        }
        let norm = e.dot(&(&g * &e)).max(0.0).sqrt();
        if norm > 1e-8 {
            cols.push(e / norm);
        }
    }
    if cols.len() != n {
        return Err(Error::ChartFailure {
            t: 0.0,
            gram_det: 0.0,
        });
    }
    let mut f = DMatrix::zeros(n, n);
    for (c, col) in cols.iter().enumerate() {
        f.set_column(c, col);
    }
    Ok(f)
}

/// `eps_1 = min(cap, 1/sqrt(1 + ||R||))` with a finite-difference curvature
/// estimate sampled along the ray.
fn tube_radius_estimate(ray: &Ray, metric: &MetricField, cap: f64) -> f64 {
    if metric.is_euclidean() {
        return cap;
    }
    let n = metric.dim();
    let h = 1e-4;
    let stride = (ray.samples.len() / 16).max(1);
    let mut r_max: f64 = 0.0;
    for (_, pp) in ray.samples.iter().step_by(stride) {
        let x = &pp.x;
        let gamma0 = match christoffel(metric, x) {
            Ok(g) => g,
            Err(_) => continue,
        };
        // R^a_bcd = d_c Gamma^a_db - d_d Gamma^a_cb + Gamma^a_ce Gamma^e_db - Gamma^a_de Gamma^e_cb
        let mut dgamma = Vec::with_capacity(n);
        let mut ok = true;
        for c in 0..n {
            let mut xp = x.clone();
            xp[c] += h;
            let mut xm = x.clone();
            xm[c] -= h;
            match (christoffel(metric, &xp), christoffel(metric, &xm)) {
                (Ok(gp), Ok(gm)) => {
                    let d: Vec<DMatrix<f64>> = gp
                        .iter()
                        .zip(gm.iter())
                        .map(|(a, b)| (a - b) / (2.0 * h))
                        .collect();
                    dgamma.push(d);
                }
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        let mut frob2 = 0.0;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let mut r = dgamma[c][a][(d, b)] - dgamma[d][a][(c, b)];
                        for e in 0..n {
                            r += gamma0[a][(c, e)] * gamma0[e][(d, b)]
                                - gamma0[a][(d, e)] * gamma0[e][(c, b)];
                        }
                        frob2 += r * r;
                    }
                }
            }
        }
        r_max = r_max.max(frob2.sqrt());
    }
    cap.min(1.0 / (1.0 + r_max).sqrt())
}

fn detect_self_intersections(ray: &Ray, metric: &MetricField, tube_radius: f64) -> Vec<f64> {
    let mut hits = Vec::new();
    let sep = tube_radius.max(4.0 * ray.dt);
    let close = 2.0 * ray.dt;
    let stride = ((close / ray.dt) as usize).max(1);
    for i in (0..ray.samples.len()).step_by(stride) {
        for j in ((i + 1)..ray.samples.len()).step_by(stride) {
            let (ti, pi) = &ray.samples[i];
            let (tj, pj) = &ray.samples[j];
            if tj - ti < sep {
                continue;
            }
            let d = metric.norm_tangent(&pi.x, &(&pj.x - &pi.x));
            if d < close {
                hits.push(0.5 * (ti + tj));
            }
        }
    }
    hits
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::domain::DomainSpec;
    use crate::geometry::flow::{free_flow, hamiltonian_flow, unit_speed_momentum, PhasePoint};
    use crate::geometry::metric::SmoothScalar;

    fn v(vals: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(vals)
    }

    #[test]
    fn euclidean_frame_is_constant() {
        let m = MetricField::euclidean(2);
        let d = DomainSpec::unit_ball(2);
        let start = PhasePoint::new(v(&[-1.0 + 1e-12, 0.0]), v(&[1.0, 0.0]));
        let ray = hamiltonian_flow(&m, &start, 1e-3, 5.0, &d).unwrap();
        let chart = fermi_frame(&ray, &m).unwrap();
        let f0 = chart.frames[0].clone();
        for f in &chart.frames {
            assert!((f - &f0).amax() < 1e-12);
        }
        assert!((chart.gram(&m, 0) - DMatrix::identity(2, 2)).amax() < 1e-12);
    }

    #[test]
    fn gram_identity_preserved_on_conformal_metric() {
        let phi = SmoothScalar::trig_sum(
            2,
            vec![(0.25, v(&[1.0, 1.2]), 0.1), (0.1, v(&[-1.5, 0.7]), 0.8)],
        );
        let m = MetricField::conformal(phi);
        let x0 = v(&[0.0, 0.0]);
        let p0 = unit_speed_momentum(&m, &x0, &v(&[0.8, 0.6]));
        let ray = free_flow(&m, &PhasePoint::new(x0, p0), 1e-3, 3.0).unwrap();
        let chart = fermi_frame(&ray, &m).unwrap();
        for i in (0..chart.frames.len()).step_by(50) {
            let gram = chart.gram(&m, i);
            assert!(
                (gram - DMatrix::identity(2, 2)).amax() < 1e-8,
                "gram deviates at sample {i}"
            );
        }
    }

    #[test]
    fn on_ray_metric_identities() {
        // In Fermi coordinates g|ray = Id and the frame-projected first
        // derivatives vanish on the ray: check d/dt <E_i, E_j>_g = 0 at O(dt^2)
        // via the Gram staying constant between neighbouring samples.
        let phi = SmoothScalar::trig_sum(2, vec![(0.2, v(&[1.4, -0.6]), 0.5)]);
        let m = MetricField::conformal(phi);
        let x0 = v(&[0.1, -0.1]);
        let p0 = unit_speed_momentum(&m, &x0, &v(&[1.0, 0.3]));
        let ray = free_flow(&m, &PhasePoint::new(x0, p0), 1e-3, 1.0).unwrap();
        let chart = fermi_frame(&ray, &m).unwrap();
        for i in (0..chart.frames.len() - 1).step_by(100) {
            let g0 = chart.gram(&m, i);
            let g1 = chart.gram(&m, i + 1);
            assert!((g1 - g0).amax() < 1e-6 * ray.dt);
        }
    }

    #[test]
    fn tube_radius_positive_and_capped() {
        let phi = SmoothScalar::trig_sum(2, vec![(0.3, v(&[2.0, 1.0]), 0.0)]);
        let m = MetricField::conformal(phi);
        let x0 = v(&[0.0, 0.0]);
        let p0 = unit_speed_momentum(&m, &x0, &v(&[1.0, 0.0]));
        let ray = free_flow(&m, &PhasePoint::new(x0, p0), 1e-3, 2.0).unwrap();
        let chart = fermi_frame(&ray, &m).unwrap();
        assert!(chart.tube_radius > 0.0);
        assert!(chart.tube_radius <= TUBE_RADIUS_CAP);
        // Chart intervals cover [0, tau] with only adjacent overlaps.
        let tau = ray.duration();
        assert!(chart.chart_centers.last().unwrap() + chart.tube_radius >= tau);
    }
}
