//! Error decomposition of the lifted Ansatz against the reference solver,
//! and the integral observability bracket.

use num_complex::Complex64 as C64;

use crate::coefficients::CoefficientField;
use crate::error::Result;
use crate::geometry::MetricField;
use crate::grid::{CGrid2, Grid2};
use crate::superposition::BeamFamily;

use super::ansatz::{helmholtz_residual_field, pi_apply, LiftedAnsatz};
use super::solver2d::{solve_wave_2d, SpaceTimeFn, Wave2DConfig};

/// Sizes from one error-decomposition run at a fixed `h`.
#[derive(Clone, Debug)]
pub struct ErrorDecomposition {
    pub h: f64,
    pub omega: f64,
    /// `||K0||_{L^2}`, the Helmholtz residual of the processed profile.
    pub k0_norm: f64,
    /// `|<v, test>|` per test function (the weak error pairing).
    pub pairing_v: Vec<f64>,
    /// `|<grad v, test>|` per test function.
    pub pairing_grad: Vec<f64>,
}

/// Build `Pi phi` on `grid_spec`, form the source
/// `k(t,x) = -e^{i omega t} (Delta_g Pi phi + omega^2 alpha Pi phi)` and
/// solve the zero-data problem for the error field `v`.
#[allow(clippy::too_many_arguments)]
pub fn wave_error_decomposition(
    ansatz: &LiftedAnsatz,
    family: &BeamFamily,
    alpha: &CoefficientField,
    metric: &MetricField,
    grid_spec: &Grid2,
    t_end: f64,
    tests: &[&SpaceTimeFn],
    cfl: f64,
) -> Result<ErrorDecomposition> {
    let pi_phi = pi_apply(family, &ansatz.phi, grid_spec, ansatz.t_end)?;
    let k0 = helmholtz_residual_field(&pi_phi, alpha, metric, ansatz.omega);
    let k0_norm = k0.l2_norm();

    let omega = ansatz.omega;
    let source = move |t: f64, x: f64, y: f64| -> C64 {
        let fx = (x - k0.x0) / k0.dx;
        let fy = (y - k0.y0) / k0.dy;
        if fx < 0.0 || fy < 0.0 || fx > (k0.nx - 1) as f64 || fy > (k0.ny - 1) as f64 {
            return C64::new(0.0, 0.0);
        }
        let ix = (fx as usize).min(k0.nx - 2);
        let iy = (fy as usize).min(k0.ny - 2);
        let wx = fx - ix as f64;
        let wy = fy - iy as f64;
        let val = k0.at(ix, iy) * C64::new((1.0 - wx) * (1.0 - wy), 0.0)
            + k0.at(ix + 1, iy) * C64::new(wx * (1.0 - wy), 0.0)
            + k0.at(ix, iy + 1) * C64::new((1.0 - wx) * wy, 0.0)
            + k0.at(ix + 1, iy + 1) * C64::new(wx * wy, 0.0);
        -val * C64::from_polar(1.0, omega * t)
    };

    let u0 = CGrid2::new(
        grid_spec.nx,
        grid_spec.ny,
        grid_spec.x0,
        grid_spec.y0,
        grid_spec.dx,
        grid_spec.dy,
    );
    let u1 = u0.clone();
    let run = solve_wave_2d(
        alpha,
        metric,
        &u0,
        &u1,
        &Wave2DConfig {
            t_end,
            cfl,
            source: Some(&source),
            pairing_tests: tests.to_vec(),
        },
    )?;

    Ok(ErrorDecomposition {
        h: ansatz.h,
        omega,
        k0_norm,
        pairing_v: run.pairings.iter().map(|p| p.norm()).collect(),
        pairing_grad: run.grad_pairings.clone(),
    })
}

/// The three quantities of the integral observability bracket.
#[derive(Clone, Debug)]
pub struct IntegralObservabilityReport {
    /// `h^{n(1-eps)/2} |int_0^T int_dM d_nu(Pi U_h) test|`.
    pub lower_pairing: f64,
    /// `|| d_nu f ||^2_{L^2(dM)} T` (the bracketed target).
    pub target: f64,
    /// Cauchy-Schwarz upper bound
    /// `h^{-n(1-eps)/2}-free form: ||d_nu u|| ||d_nu f-moll||` over the cylinder.
    pub upper: f64,
    /// `lower / target` (convention constant; recorded, frozen in tests).
    pub calibrated_ratio: f64,
    /// Normalized correlation between the processed profile's boundary trace
    /// and the mollified trace of `f` (shape agreement, convention-free).
    pub trace_correlation: f64,
}

/// Evaluate the bracket on a rectangle: boundary pairings of the processed
/// profile against a mollified extension of the discrete trace of `f`, the
/// target trace energy, and the measured DtN norm of the true solution.
#[allow(clippy::too_many_arguments)]
pub fn integral_observability_constant(
    ansatz: &LiftedAnsatz,
    family: &BeamFamily,
    alpha: &CoefficientField,
    metric: &MetricField,
    grid_spec: &Grid2,
    f: &dyn Fn(f64, f64) -> f64,
    t_end: f64,
    cfl: f64,
) -> Result<IntegralObservabilityReport> {
    let pi_phi = pi_apply(family, &ansatz.phi_demodulated, grid_spec, ansatz.t_end)?;
    let (nx, ny) = (pi_phi.nx, pi_phi.ny);
    let (dx, dy) = (pi_phi.dx, pi_phi.dy);
    let n_dim = 2.0;
    let power = ansatz.h.powf(n_dim * (1.0 - ansatz.epsilon) / 2.0);

    // Discrete boundary trace of f on the four faces, then a moving-average
    // mollification along each face.
    let f_grid = Grid2 {
        nx,
        ny,
        x0: pi_phi.x0,
        y0: pi_phi.y0,
        dx,
        dy,
        data: {
            let mut d = vec![0.0; nx * ny];
            for iy in 0..ny {
                for ix in 0..nx {
                    d[iy * nx + ix] = f(pi_phi.x0 + ix as f64 * dx, pi_phi.y0 + iy as f64 * dy);
                }
            }
            d
        },
    };
    let trace_f = boundary_normal_trace_real(&f_grid);
    let moll = mollify_faces(&trace_f, 4);
    let trace_pi = boundary_normal_trace_complex(&pi_phi);

    // Boundary measure element per face sample.
    let mut pair = C64::new(0.0, 0.0);
    let mut target_sq = 0.0;
    let mut pi_sq = 0.0;
    let mut moll_sq = 0.0;
    for (face, values) in trace_pi.iter().enumerate() {
        let dsigma = if face < 2 { dy } else { dx };
        for (j, v) in values.iter().enumerate() {
            pair += v * C64::new(moll[face][j] * dsigma, 0.0);
            target_sq += trace_f[face][j] * trace_f[face][j] * dsigma;
            pi_sq += v.norm_sqr() * dsigma;
            moll_sq += moll[face][j] * moll[face][j] * dsigma;
        }
    }
    let trace_correlation = pair.norm() / (pi_sq.sqrt() * moll_sq.sqrt()).max(1e-300);
    // The carrier e^{i omega t} against the conjugated test carrier gives a
    // factor T.
    let lower_pairing = power * (pair * C64::new(t_end, 0.0)).norm();
    let target = target_sq * t_end;

    // Measured DtN norm of the true wave solution with data (f, 0).
    let mut u0 = CGrid2::new(nx, ny, pi_phi.x0, pi_phi.y0, dx, dy);
    for iy in 0..ny {
        for ix in 0..nx {
            *u0.at_mut(ix, iy) = C64::new(f_grid.at(ix, iy), 0.0);
        }
    }
    let u1 = CGrid2::new(nx, ny, pi_phi.x0, pi_phi.y0, dx, dy);
    let run = solve_wave_2d(
        alpha,
        metric,
        &u0,
        &u1,
        &Wave2DConfig {
            t_end,
            cfl,
            source: None,
            pairing_tests: vec![],
        },
    )?;
    let moll_norm_sq: f64 = trace_f
        .iter()
        .enumerate()
        .map(|(face, vals)| {
            let dsigma = if face < 2 { dy } else { dx };
            vals.iter().map(|v| v * v * dsigma).sum::<f64>() * t_end
        })
        .sum();
    let upper = run.trace_norm_sq.sqrt() * moll_norm_sq.sqrt();

    Ok(IntegralObservabilityReport {
        lower_pairing,
        target,
        upper,
        calibrated_ratio: lower_pairing / target.max(1e-300),
        trace_correlation,
    })
}

fn boundary_normal_trace_real(grid: &Grid2) -> [Vec<f64>; 4] {
    let (nx, ny) = (grid.nx, grid.ny);
    let mut left = Vec::with_capacity(ny);
    let mut right = Vec::with_capacity(ny);
    for iy in 0..ny {
        left.push(
            -(-3.0 * grid.at(0, iy) + 4.0 * grid.at(1, iy) - grid.at(2, iy)) / (2.0 * grid.dx),
        );
        right.push(
            (3.0 * grid.at(nx - 1, iy) - 4.0 * grid.at(nx - 2, iy) + grid.at(nx - 3, iy))
                / (2.0 * grid.dx),
        );
    }
    let mut bottom = Vec::with_capacity(nx);
    let mut top = Vec::with_capacity(nx);
    for ix in 0..nx {
        bottom.push(
            -(-3.0 * grid.at(ix, 0) + 4.0 * grid.at(ix, 1) - grid.at(ix, 2)) / (2.0 * grid.dy),
        );
        top.push(
            (3.0 * grid.at(ix, ny - 1) - 4.0 * grid.at(ix, ny - 2) + grid.at(ix, ny - 3))
                / (2.0 * grid.dy),
        );
    }
    [left, right, bottom, top]
}

fn boundary_normal_trace_complex(grid: &CGrid2) -> [Vec<C64>; 4] {
    let (nx, ny) = (grid.nx, grid.ny);
    let two_dx = C64::new(2.0 * grid.dx, 0.0);
    let two_dy = C64::new(2.0 * grid.dy, 0.0);
    let mut left = Vec::with_capacity(ny);
    let mut right = Vec::with_capacity(ny);
    for iy in 0..ny {
        left.push(
            -(grid.at(0, iy) * C64::new(-3.0, 0.0) + grid.at(1, iy) * C64::new(4.0, 0.0)
                - grid.at(2, iy))
                / two_dx,
        );
        right.push(
            (grid.at(nx - 1, iy) * C64::new(3.0, 0.0) - grid.at(nx - 2, iy) * C64::new(4.0, 0.0)
                + grid.at(nx - 3, iy))
                / two_dx,
        );
    }
    let mut bottom = Vec::with_capacity(nx);
    let mut top = Vec::with_capacity(nx);
    for ix in 0..nx {
        bottom.push(
            -(grid.at(ix, 0) * C64::new(-3.0, 0.0) + grid.at(ix, 1) * C64::new(4.0, 0.0)
                - grid.at(ix, 2))
                / two_dy,
        );
        top.push(
            (grid.at(ix, ny - 1) * C64::new(3.0, 0.0) - grid.at(ix, ny - 2) * C64::new(4.0, 0.0)
                + grid.at(ix, ny - 3))
                / two_dy,
        );
    }
    [left, right, bottom, top]
}

fn mollify_faces(traces: &[Vec<f64>; 4], half_width: usize) -> [Vec<f64>; 4] {
    let smooth = |vals: &Vec<f64>| -> Vec<f64> {
        let n = vals.len();
        (0..n)
            .map(|i| {
                let lo = i.saturating_sub(half_width);
                let hi = (i + half_width).min(n - 1);
                vals[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
            })
            .collect()
    };
    [
        smooth(&traces[0]),
        smooth(&traces[1]),
        smooth(&traces[2]),
        smooth(&traces[3]),
    ]
}
