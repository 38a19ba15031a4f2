//! Complex-valued 2-D leapfrog solver on rectangles (Dirichlet) with an
//! optional source term and space-time pairing collectors.

use nalgebra::DVector;
use num_complex::Complex64 as C64;

use crate::coefficients::CoefficientField;
use crate::error::{Error, Result};
use crate::geometry::MetricField;
use crate::grid::CGrid2;

/// Space-time test function for weak pairings.
pub type SpaceTimeFn = dyn Fn(f64, f64, f64) -> C64;

pub struct Wave2DConfig<'a> {
    pub t_end: f64,
    pub cfl: f64,
    pub source: Option<&'a dyn Fn(f64, f64, f64) -> C64>,
    /// Test functions for `<v, phi>` and `<grad v, phi>` pairings.
    pub pairing_tests: Vec<&'a SpaceTimeFn>,
}

pub struct Wave2DRun {
    pub dt: f64,
    pub n_steps: usize,
    pub final_u: CGrid2,
    /// `<v, phi_j>_{L^2((0,T) x M)}` per test function.
    pub pairings: Vec<C64>,
    /// `|(<d_x v, phi_j>, <d_y v, phi_j>)|` per test function.
    pub grad_pairings: Vec<f64>,
    /// `|| d_nu u ||^2_{L^2((0,T) x dM)}`.
    pub trace_norm_sq: f64,
    pub energies: Vec<(f64, f64)>,
}

/// Leapfrog for `alpha d_t^2 u = Delta_g u + k` on the rectangle carried by
/// `u0`; diagonal metrics only (Euclidean / conformal).
pub fn solve_wave_2d(
    alpha: &CoefficientField,
    metric: &MetricField,
    u0: &CGrid2,
    u1: &CGrid2,
    cfg: &Wave2DConfig<'_>,
) -> Result<Wave2DRun> {
    if cfg.cfl > 0.5 {
        return Err(Error::CflViolation {
            dt: cfg.cfl,
            limit: 0.5,
        });
    }
    let (nx, ny) = (u0.nx, u0.ny);
    let (dx, dy) = (u0.dx, u0.dy);

    let pos = |ix: usize, iy: usize| {
        DVector::from_vec(vec![u0.x0 + ix as f64 * dx, u0.y0 + iy as f64 * dy])
    };

    let mut alpha_vals = vec![0.0; nx * ny];
    let mut sqrt_g = vec![0.0; nx * ny];
    for iy in 0..ny {
        for ix in 0..nx {
            let x = pos(ix, iy);
            alpha_vals[iy * nx + ix] = alpha.eval(&x);
            sqrt_g[iy * nx + ix] = metric.sqrt_det_g(&x);
        }
    }
    // Face weights sqrt(g) g^{kk} (diagonal metric).
    let mut wx = vec![0.0; (nx - 1) * ny];
    for iy in 0..ny {
        for ix in 0..nx - 1 {
            let x = DVector::from_vec(vec![u0.x0 + (ix as f64 + 0.5) * dx, u0.y0 + iy as f64 * dy]);
            wx[iy * (nx - 1) + ix] = metric.sqrt_det_g(&x) * metric.eval_ginv(&x)[(0, 0)];
        }
    }
    let mut wy = vec![0.0; nx * (ny - 1)];
    for iy in 0..ny - 1 {
        for ix in 0..nx {
            let x = DVector::from_vec(vec![u0.x0 + ix as f64 * dx, u0.y0 + (iy as f64 + 0.5) * dy]);
            wy[iy * nx + ix] = metric.sqrt_det_g(&x) * metric.eval_ginv(&x)[(1, 1)];
        }
    }

    let mut c_max: f64 = 0.0;
    for iy in 0..ny {
        for ix in 0..nx {
            let i = iy * nx + ix;
            let ginv = metric.eval_ginv(&pos(ix, iy));
            let lam = ginv[(0, 0)].max(ginv[(1, 1)]);
            c_max = c_max.max((lam / alpha_vals[i]).sqrt());
        }
    }
    let dt_stable = cfg.cfl * dx.min(dy) / (c_max * 2f64.sqrt());
    let n_steps = (cfg.t_end / dt_stable).ceil() as usize;
    let dt = cfg.t_end / n_steps as f64;

    let zero = C64::new(0.0, 0.0);
    let lap = |u: &[C64], out: &mut [C64]| {
        for iy in 0..ny {
            for ix in 0..nx {
                let i = iy * nx + ix;
                if ix == 0 || iy == 0 || ix == nx - 1 || iy == ny - 1 {
                    out[i] = zero;
                    continue;
                }
                let fx_r = u[i + 1] - u[i];
                let fx_l = u[i] - u[i - 1];
                let fy_u = u[i + nx] - u[i];
                let fy_d = u[i] - u[i - nx];
                let val = (wx[iy * (nx - 1) + ix] * fx_r - wx[iy * (nx - 1) + ix - 1] * fx_l)
                    / (dx * dx)
                    + (wy[iy * nx + ix] * fy_u - wy[(iy - 1) * nx + ix] * fy_d) / (dy * dy);
                out[i] = val / sqrt_g[i];
            }
        }
    };

    let mut u_prev = u0.data.clone();
    for iy in 0..ny {
        for ix in [0, nx - 1] {
            u_prev[iy * nx + ix] = zero;
        }
    }
    for ix in 0..nx {
        for iy in [0, ny - 1] {
            u_prev[iy * nx + ix] = zero;
        }
    }
    let mut scratch = vec![zero; nx * ny];
    lap(&u_prev, &mut scratch);
    let mut u_cur = vec![zero; nx * ny];
    for iy in 1..ny - 1 {
        for ix in 1..nx - 1 {
            let i = iy * nx + ix;
            let src = cfg
                .source
                .map(|s| s(0.0, u0.x0 + ix as f64 * dx, u0.y0 + iy as f64 * dy))
                .unwrap_or(zero);
            u_cur[i] = u_prev[i]
                + u1.data[i] * dt
                + (scratch[i] + src) * C64::new(0.5 * dt * dt / alpha_vals[i], 0.0);
        }
    }

    let cell = dx * dy;
    let mut pairings = vec![zero; cfg.pairing_tests.len()];
    let mut grad_pair_x = vec![zero; cfg.pairing_tests.len()];
    let mut grad_pair_y = vec![zero; cfg.pairing_tests.len()];
    let mut trace_norm_sq = 0.0;
    let mut energies = Vec::new();

    let mut u_next = vec![zero; nx * ny];
    for step in 1..=n_steps {
        let t = step as f64 * dt;
        lap(&u_cur, &mut scratch);
        for iy in 1..ny - 1 {
            for ix in 1..nx - 1 {
                let i = iy * nx + ix;
                let src = cfg
                    .source
                    .map(|s| s(t - dt, u0.x0 + ix as f64 * dx, u0.y0 + iy as f64 * dy))
                    .unwrap_or(zero);
                u_next[i] = u_cur[i] * C64::new(2.0, 0.0) - u_prev[i]
                    + (scratch[i] + src) * C64::new(dt * dt / alpha_vals[i], 0.0);
            }
        }
        if u_next
            .iter()
            .any(|v| !v.re.is_finite() || !v.im.is_finite())
        {
            return Err(Error::SolverBlowup { step });
        }

        // Pairings and traces are accumulated at the current level.
        let t_cur = (step - 1) as f64 * dt;
        for (j, test) in cfg.pairing_tests.iter().enumerate() {
            let mut acc = zero;
            let mut accx = zero;
            let mut accy = zero;
            for iy in 1..ny - 1 {
                for ix in 1..nx - 1 {
                    let i = iy * nx + ix;
                    let x = u0.x0 + ix as f64 * dx;
                    let y = u0.y0 + iy as f64 * dy;
                    let phi = test(t_cur, x, y).conj();
                    acc += u_cur[i] * phi * sqrt_g[i];
                    let gx = (u_cur[i + 1] - u_cur[i - 1]) / C64::new(2.0 * dx, 0.0);
                    let gy = (u_cur[i + nx] - u_cur[i - nx]) / C64::new(2.0 * dy, 0.0);
                    accx += gx * phi * sqrt_g[i];
                    accy += gy * phi * sqrt_g[i];
                }
            }
            pairings[j] += acc * C64::new(cell * dt, 0.0);
            grad_pair_x[j] += accx * C64::new(cell * dt, 0.0);
            grad_pair_y[j] += accy * C64::new(cell * dt, 0.0);
        }

        // Boundary trace: one-sided second-order normal derivatives on the
        // four faces (Euclidean normals; metric factor via g^{kk}).
        let mut tr = 0.0;
        for iy in 1..ny - 1 {
            let g = metric.eval_ginv(&pos(0, iy))[(0, 0)].sqrt();
            let d = (-u_cur[iy * nx] * C64::new(3.0, 0.0)
                + u_cur[iy * nx + 1] * C64::new(4.0, 0.0)
                - u_cur[iy * nx + 2])
                / C64::new(2.0 * dx, 0.0);
            tr += (g * d.norm()).powi(2) * dy;
            let g = metric.eval_ginv(&pos(nx - 1, iy))[(0, 0)].sqrt();
            let d = (u_cur[iy * nx + nx - 1] * C64::new(3.0, 0.0)
                - u_cur[iy * nx + nx - 2] * C64::new(4.0, 0.0)
                + u_cur[iy * nx + nx - 3])
                / C64::new(2.0 * dx, 0.0);
            tr += (g * d.norm()).powi(2) * dy;
        }
        for ix in 1..nx - 1 {
            let g = metric.eval_ginv(&pos(ix, 0))[(1, 1)].sqrt();
            let d = (-u_cur[ix] * C64::new(3.0, 0.0) + u_cur[nx + ix] * C64::new(4.0, 0.0)
                - u_cur[2 * nx + ix])
                / C64::new(2.0 * dy, 0.0);
            tr += (g * d.norm()).powi(2) * dx;
            let g = metric.eval_ginv(&pos(ix, ny - 1))[(1, 1)].sqrt();
            let d = (u_cur[(ny - 1) * nx + ix] * C64::new(3.0, 0.0)
                - u_cur[(ny - 2) * nx + ix] * C64::new(4.0, 0.0)
                + u_cur[(ny - 3) * nx + ix])
                / C64::new(2.0 * dy, 0.0);
            tr += (g * d.norm()).powi(2) * dx;
        }
        trace_norm_sq += tr * dt;

        // Energy with centered velocity and face-based gradients (the faces
        // adjacent to the boundary carry most of the potential energy of low
        // modes, so node-centered differences undercount it by O(dx)).
        if step % 16 == 0 || step == n_steps {
            let mut e = 0.0;
            for iy in 1..ny - 1 {
                for ix in 1..nx - 1 {
                    let i = iy * nx + ix;
                    let v = (u_next[i] - u_prev[i]) / C64::new(2.0 * dt, 0.0);
                    e += 0.5 * alpha_vals[i] * v.norm_sqr() * sqrt_g[i] * cell;
                }
            }
            for iy in 0..ny {
                for ix in 0..nx - 1 {
                    let i = iy * nx + ix;
                    let du = (u_cur[i + 1] - u_cur[i]) / C64::new(dx, 0.0);
                    e += 0.5 * wx[iy * (nx - 1) + ix] * du.norm_sqr() * cell;
                }
            }
            for iy in 0..ny - 1 {
                for ix in 0..nx {
                    let i = iy * nx + ix;
                    let du = (u_cur[i + nx] - u_cur[i]) / C64::new(dy, 0.0);
                    e += 0.5 * wy[iy * nx + ix] * du.norm_sqr() * cell;
                }
            }
            energies.push((t_cur, e));
        }

        std::mem::swap(&mut u_prev, &mut u_cur);
        std::mem::swap(&mut u_cur, &mut u_next);
    }

    let final_u = CGrid2 {
        nx,
        ny,
        x0: u0.x0,
        y0: u0.y0,
        dx,
        dy,
        data: u_prev,
    };

    let grad_pairings = grad_pair_x
        .iter()
        .zip(&grad_pair_y)
        .map(|(a, b)| (a.norm_sqr() + b.norm_sqr()).sqrt())
        .collect();

    Ok(Wave2DRun {
        dt,
        n_steps,
        final_u,
        pairings,
        grad_pairings,
        trace_norm_sq,
        energies,
    })
}
