//! Reference 1-D leapfrog solver for `alpha d_t^2 u = Delta_g u` with
//! Dirichlet boundary, boundary traces, discrete energy, and the
//! `D_alpha = alpha^{-1} Delta_g` building block.

use nalgebra::DVector;

use crate::coefficients::CoefficientField;
use crate::error::{Error, Result};
use crate::geometry::MetricField;

/// Boundary trace `d_nu u` sampled per step at both interval endpoints.
#[derive(Clone, Debug)]
pub struct BoundaryTrace {
    pub times: Vec<f64>,
    /// `values[k] = [d_nu u(t_k, a), d_nu u(t_k, b)]`.
    pub values: Vec<[f64; 2]>,
}

impl BoundaryTrace {
    /// `|| d_t^m (d_nu u) ||^2_{L^2((0,T) x boundary)}` by trapezoid, with
    /// centered time differences for `m > 0`.
    pub fn norm_sq(&self, m: usize) -> f64 {
        let dt = self.times[1] - self.times[0];
        let series: Vec<[f64; 2]> = if m == 0 {
            self.values.clone()
        } else {
            let mut cur = self.values.clone();
            for _ in 0..m {
                let mut next = vec![[0.0; 2]; cur.len()];
                for i in 1..cur.len() - 1 {
                    for side in 0..2 {
                        next[i][side] = (cur[i + 1][side] - cur[i - 1][side]) / (2.0 * dt);
                    }
                }
                // One-sided ends.
                if cur.len() >= 2 {
                    for side in 0..2 {
                        next[0][side] = (cur[1][side] - cur[0][side]) / dt;
                        let l = cur.len() - 1;
                        next[l][side] = (cur[l][side] - cur[l - 1][side]) / dt;
                    }
                }
                cur = next;
            }
            cur
        };
        let mut acc = 0.0;
        for (i, v) in series.iter().enumerate() {
            let w = if i == 0 || i == series.len() - 1 {
                0.5
            } else {
                1.0
            };
            acc += w * (v[0] * v[0] + v[1] * v[1]) * dt;
        }
        acc
    }
}

/// Full solve record: traces, energy series and final fields.
#[derive(Clone, Debug)]
pub struct WaveHistory1D {
    pub dx: f64,
    pub dt: f64,
    pub times: Vec<f64>,
    pub trace: BoundaryTrace,
    /// `(t, E(t))` with the centered-velocity energy.
    pub energies: Vec<(f64, f64)>,
    pub final_u: Vec<f64>,
    pub final_v: Vec<f64>,
    /// H^1_0 seminorm^2 and L^2 norm^2 of the initial data (energy weights).
    pub u0_h1_sq: f64,
    pub u1_l2_sq: f64,
}

fn metric_1d_coeffs(metric: &MetricField, n_nodes: usize, a: f64, dx: f64) -> (Vec<f64>, Vec<f64>) {
    // Node sqrt(det g) and face sqrt(g) g^{11}.
    let mut sqrt_g = Vec::with_capacity(n_nodes);
    for i in 0..n_nodes {
        let x = DVector::from_vec(vec![a + i as f64 * dx]);
        sqrt_g.push(metric.sqrt_det_g(&x));
    }
    let mut face_w = Vec::with_capacity(n_nodes - 1);
    for i in 0..n_nodes - 1 {
        let x = DVector::from_vec(vec![a + (i as f64 + 0.5) * dx]);
        let ginv = metric.eval_ginv(&x)[(0, 0)];
        face_w.push(metric.sqrt_det_g(&x) * ginv);
    }
    (sqrt_g, face_w)
}

/// Leapfrog solve of the Dirichlet IBVP on `[a, b]` with `n_nodes` grid
/// points. `u0` must vanish on the boundary; the scheme refuses `cfl > 0.5`.
#[allow(clippy::too_many_arguments)]
pub fn solve_wave_1d(
    alpha: &CoefficientField,
    metric: &MetricField,
    a: f64,
    b: f64,
    u0: &dyn Fn(f64) -> f64,
    u1: &dyn Fn(f64) -> f64,
    t_end: f64,
    n_nodes: usize,
    cfl: f64,
) -> Result<WaveHistory1D> {
    if cfl > 0.5 {
        return Err(Error::CflViolation {
            dt: cfl,
            limit: 0.5,
        });
    }
    let n = n_nodes;
    let dx = (b - a) / (n - 1) as f64;

    let alpha_vals: Vec<f64> = (0..n)
        .map(|i| alpha.eval(&DVector::from_vec(vec![a + i as f64 * dx])))
        .collect();
    if alpha_vals.iter().any(|v| *v < alpha.bounds.0 - 1e-12) {
        return Err(Error::InvalidParameter {
            name: "alpha",
            detail: "hyperbolicity violated on the grid".into(),
        });
    }
    let (sqrt_g, face_w) = metric_1d_coeffs(metric, n, a, dx);

    // Max wave speed sqrt(g^{11}/alpha) over faces.
    let mut c_max: f64 = 0.0;
    for i in 0..n - 1 {
        let am = 0.5 * (alpha_vals[i] + alpha_vals[i + 1]);
        let gf = face_w[i] / (0.5 * (sqrt_g[i] + sqrt_g[i + 1]));
        c_max = c_max.max((gf / am).sqrt());
    }
    let dt = cfl * dx / c_max;
    let n_steps = (t_end / dt).ceil() as usize;
    let dt = t_end / n_steps as f64;

    let lap = |u: &[f64], out: &mut [f64]| {
        out[0] = 0.0;
        out[n - 1] = 0.0;
        for i in 1..n - 1 {
            let flux_r = face_w[i] * (u[i + 1] - u[i]);
            let flux_l = face_w[i - 1] * (u[i] - u[i - 1]);
            out[i] = (flux_r - flux_l) / (dx * dx * sqrt_g[i]);
        }
    };

    let mut u_prev: Vec<f64> = (0..n).map(|i| u0(a + i as f64 * dx)).collect();
    u_prev[0] = 0.0;
    u_prev[n - 1] = 0.0;
    let v0: Vec<f64> = (0..n).map(|i| u1(a + i as f64 * dx)).collect();

    // Initial norms with the same quadrature weights as the energy.
    let mut u0_h1_sq = 0.0;
    for i in 0..n - 1 {
        let du = (u_prev[i + 1] - u_prev[i]) / dx;
        u0_h1_sq += face_w[i] * du * du * dx;
    }
    let u1_l2_sq: f64 = (0..n).map(|i| v0[i] * v0[i] * sqrt_g[i] * dx).sum();

    let mut scratch = vec![0.0; n];
    lap(&u_prev, &mut scratch);
    let mut u_cur = vec![0.0; n];
    for i in 1..n - 1 {
        u_cur[i] = u_prev[i] + dt * v0[i] + 0.5 * dt * dt * scratch[i] / alpha_vals[i];
    }

    let trace_at = |u: &[f64]| -> [f64; 2] {
        // One-sided second-order derivative contracted with the outward
        // conormal (g^{11})^{1/2}.
        let gl = metric.eval_ginv(&DVector::from_vec(vec![a]))[(0, 0)].sqrt();
        let gr = metric.eval_ginv(&DVector::from_vec(vec![b]))[(0, 0)].sqrt();
        let ux_l = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * dx);
        let ux_r = (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) / (2.0 * dx);
        [-gl * ux_l, gr * ux_r]
    };

    let energy = |u: &[f64], v: &[f64]| -> f64 {
        let mut e = 0.0;
        for i in 0..n {
            e += 0.5 * alpha_vals[i] * v[i] * v[i] * sqrt_g[i] * dx;
        }
        for i in 0..n - 1 {
            let du = (u[i + 1] - u[i]) / dx;
            e += 0.5 * face_w[i] * du * du * dx;
        }
        e
    };

    let mut times = vec![0.0];
    let mut trace_values = vec![trace_at(&u_prev)];
    let mut energies = vec![(0.0, energy(&u_prev, &v0))];

    let mut u_next = vec![0.0; n];
    let mut v_now = vec![0.0; n];
    for step in 1..=n_steps {
        let t = step as f64 * dt;
        lap(&u_cur, &mut scratch);
        for i in 1..n - 1 {
            u_next[i] = 2.0 * u_cur[i] - u_prev[i] + dt * dt * scratch[i] / alpha_vals[i];
        }
        u_next[0] = 0.0;
        u_next[n - 1] = 0.0;
        if u_next.iter().any(|v| !v.is_finite()) {
            return Err(Error::SolverBlowup { step });
        }
        for i in 0..n {
            v_now[i] = (u_next[i] - u_prev[i]) / (2.0 * dt);
        }
        times.push(t);
        trace_values.push(trace_at(&u_cur));
        energies.push((t, energy(&u_cur, &v_now)));
        std::mem::swap(&mut u_prev, &mut u_cur);
        std::mem::swap(&mut u_cur, &mut u_next);
    }

    Ok(WaveHistory1D {
        dx,
        dt,
        times: times.clone(),
        trace: BoundaryTrace {
            times,
            values: trace_values,
        },
        energies,
        final_u: u_prev,
        final_v: v_now,
        u0_h1_sq,
        u1_l2_sq,
    })
}

/// Relative energy drift `max_t |E(t) - E(0)| / E(0)`.
pub fn energy_drift(history: &WaveHistory1D) -> f64 {
    let e0 = history.energies[0].1;
    history
        .energies
        .iter()
        .map(|(_, e)| (e - e0).abs() / e0.max(1e-300))
        .fold(0.0, f64::max)
}

/// The Dirichlet-to-Neumann trace of a solved history.
pub fn dtn_trace(history: &WaveHistory1D) -> &BoundaryTrace {
    &history.trace
}

/// `k`-fold application of `f -> alpha^{-1} Delta_g f` on interval grid
/// values (Dirichlet: boundary entries stay zero).
pub fn d_alpha_apply(
    alpha: &CoefficientField,
    metric: &MetricField,
    a: f64,
    b: f64,
    f: &[f64],
    k: usize,
) -> Vec<f64> {
    let n = f.len();
    let dx = (b - a) / (n - 1) as f64;
    let (sqrt_g, face_w) = metric_1d_coeffs(metric, n, a, dx);
    let alpha_vals: Vec<f64> = (0..n)
        .map(|i| alpha.eval(&DVector::from_vec(vec![a + i as f64 * dx])))
        .collect();
    let mut cur = f.to_vec();
    for _ in 0..k {
        let mut next = vec![0.0; n];
        for i in 1..n - 1 {
            let flux_r = face_w[i] * (cur[i + 1] - cur[i]);
            let flux_l = face_w[i - 1] * (cur[i] - cur[i - 1]);
            next[i] = (flux_r - flux_l) / (dx * dx * sqrt_g[i] * alpha_vals[i]);
        }
        cur = next;
    }
    cur
}
