//! The lifted wave Ansatz: time-integrated modified normal operator output,
//! its Helmholtz quasimode pairing, the `Pi = I* X^{-1}` processing, and the
//! error decomposition against the reference solver.

use nalgebra::DVector;
use num_complex::Complex64 as C64;

use crate::coefficients::CoefficientField;
use crate::error::{Error, Result};
use crate::geometry::MetricField;
use crate::grid::{fft_2d, fft_freqs, CGrid2, Grid2};
use crate::superposition::{apply_modified_normal, apply_q, BeamFamily};

/// Where the data profile is sampled when feeding the slice operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DataTransport {
    /// `f` at the launch label `z` (the literal kernel display).
    Label,
    /// `f` at the transported point `x(s, z)` (the concentration limit's
    /// reading; used by the X-ray bridge).
    Flow,
}

/// Profile of the lifted Ansatz `Pi U_h(t,x) = e^{i omega t} Pi phi(x)`,
/// `omega = h^{-(1+eps)/2}`.
pub struct LiftedAnsatz {
    pub h: f64,
    pub epsilon: f64,
    pub omega: f64,
    pub t_end: f64,
    pub nodes: Vec<DVector<f64>>,
    pub weights: Vec<f64>,
    /// Plain time integral of the modified normal operator (the bridge
    /// profile).
    pub phi: Vec<C64>,
    /// The bridge profile with the data carrier `e^{i Phi(z)/h}` stripped;
    /// this is the slowly varying ray-average field that `Pi` processes.
    pub phi_demodulated: Vec<C64>,
    /// Modulated, windowed time integral of the superposed field `Q f`
    /// itself: `int w(s) e^{-i/2 h^{-eps} alpha(y) s} (Qf)(s, y) ds`. The
    /// Schrödinger structure of `Qf` turns the `s`-integration by parts into
    /// the Helmholtz eigenvalue `h^{-1-eps} alpha`; this profile feeds the
    /// quasimode pairing.
    pub phi_helmholtz: Vec<C64>,
    /// `||f||_{H^1}` over the launch nodes (normalizer for residual reports).
    pub f_h1_norm: f64,
}

fn smoothstep(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    u * u * u * (10.0 + u * (-15.0 + 6.0 * u))
}

/// Smooth window vanishing at both ends of `[0, t_end]`.
fn time_window(s: f64, t_end: f64) -> f64 {
    let w = 0.3 * t_end;
    smoothstep(s / w) * smoothstep((t_end - s) / w)
}

#[allow(clippy::too_many_arguments)]
pub fn build_lifted_ansatz(
    family: &BeamFamily,
    alpha: &CoefficientField,
    f: &dyn Fn(&DVector<f64>) -> f64,
    t_end: f64,
    epsilon: f64,
    u_dir: &DVector<f64>,
    n_slices: usize,
    transport: DataTransport,
    spacing: Option<f64>,
) -> Result<LiftedAnsatz> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter {
            name: "epsilon",
            detail: format!("need epsilon in (0,1), got {epsilon}"),
        });
    }
    let h = family.h;
    let n_nodes = family.k_grid.len();
    let ds = t_end / n_slices as f64;
    let scale = h.powf(-epsilon);

    let mut phi = vec![C64::new(0.0, 0.0); n_nodes];
    let mut phi_helm = vec![C64::new(0.0, 0.0); n_nodes];
    let launch_data = family.data_at_launch(f);
    for j in 0..=n_slices {
        let s = j as f64 * ds;
        let trap = if j == 0 || j == n_slices {
            0.5 * ds
        } else {
            ds
        };
        let data = match transport {
            DataTransport::Label => launch_data.clone(),
            DataTransport::Flow => family.data_transported(f, s),
        };
        let slice = apply_modified_normal(family, &data, alpha, s, epsilon, u_dir, spacing)?;
        let win = time_window(s, t_end);
        for (iz, value) in slice.values.iter().enumerate() {
            phi[iz] += value * C64::new(trap, 0.0);
            let y = &family.k_grid.nodes[iz];
            let field = apply_q(family, &launch_data, s, y);
            let modulation = C64::from_polar(1.0, -0.5 * scale * alpha.eval(y) * s);
            phi_helm[iz] += field * modulation * C64::new(trap * win, 0.0);
        }
    }

    // || f ||_{H^1} over the launch nodes by forward differences.
    let mut h1 = 0.0;
    let eps_fd = 1e-5;
    for (z, wgt) in family.k_grid.nodes.iter().zip(&family.k_grid.weights) {
        let v = f(z);
        let mut grad2 = 0.0;
        for d in 0..z.len() {
            let mut zp = z.clone();
            zp[d] += eps_fd;
            let der = (f(&zp) - v) / eps_fd;
            grad2 += der * der;
        }
        h1 += (v * v + grad2) * wgt;
    }

    let phi_demodulated: Vec<C64> = phi
        .iter()
        .zip(&family.phase)
        .map(|(v, ph)| v * C64::from_polar(1.0, -ph / h))
        .collect();

    Ok(LiftedAnsatz {
        h,
        epsilon,
        omega: h.powf(-(1.0 + epsilon) / 2.0),
        t_end,
        nodes: family.k_grid.nodes.clone(),
        weights: family.k_grid.weights.clone(),
        phi,
        phi_demodulated,
        phi_helmholtz: phi_helm,
        f_h1_norm: h1.sqrt(),
    })
}

/// Comparison of the normalized profile against the geodesic ray average of
/// the data (the bridge from beams to the X-ray transform).
#[derive(Clone, Debug)]
pub struct BridgeReport {
    pub fitted_c: f64,
    pub rel_l2_error: f64,
    pub normalized: Vec<f64>,
    pub ray_average: Vec<f64>,
}

pub fn bridge_comparison(
    ansatz: &LiftedAnsatz,
    family: &BeamFamily,
    f: &dyn Fn(&DVector<f64>) -> f64,
) -> BridgeReport {
    let n = family.dim() as f64;
    let power = ansatz.h.powf(n * (1.0 - ansatz.epsilon) / 2.0);
    let normalized: Vec<f64> = ansatz.phi.iter().map(|v| v.norm() * power).collect();

    // Trapezoid of f along each beam's ray up to t_end.
    let mut ray_average = Vec::with_capacity(family.k_grid.len());
    for beam in &family.beams {
        let t_max = ansatz.t_end.min(beam.duration());
        let m = 64;
        let ds = t_max / m as f64;
        let mut acc = 0.0;
        for j in 0..=m {
            let s = j as f64 * ds;
            let w = if j == 0 || j == m { 0.5 } else { 1.0 };
            acc += w * f(&beam.state_at(s).x) * ds;
        }
        ray_average.push(acc);
    }

    let num: f64 = normalized
        .iter()
        .zip(&ray_average)
        .map(|(a, b)| a * b)
        .sum();
    let den: f64 = ray_average.iter().map(|b| b * b).sum();
    let fitted_c = num / den.max(1e-300);
    let mut err2 = 0.0;
    let mut ref2 = 0.0;
    for (a, b) in normalized.iter().zip(&ray_average) {
        err2 += (a - fitted_c * b) * (a - fitted_c * b);
        ref2 += (fitted_c * b) * (fitted_c * b);
    }
    BridgeReport {
        fitted_c,
        rel_l2_error: (err2 / ref2.max(1e-300)).sqrt(),
        normalized,
        ray_average,
    }
}

/// Compactly supported C^2 test function `(1 - |x - c|^2 / r^2)^3`, with an
/// optional plane-wave carrier `e^{i xi . x / h}` so pairings can probe the
/// quasimode's own frequency shell. Laplacians are analytic.
#[derive(Clone)]
pub struct TestFunction {
    pub center: DVector<f64>,
    pub radius: f64,
    pub carrier: Option<(DVector<f64>, f64)>,
}

impl TestFunction {
    pub fn new(center: DVector<f64>, radius: f64) -> Self {
        Self {
            center,
            radius,
            carrier: None,
        }
    }

    pub fn with_carrier(center: DVector<f64>, radius: f64, xi: DVector<f64>, h: f64) -> Self {
        Self {
            center,
            radius,
            carrier: Some((xi, h)),
        }
    }

    fn bump(&self, x: &DVector<f64>) -> f64 {
        let q = (x - &self.center).norm_squared() / (self.radius * self.radius);
        if q >= 1.0 {
            0.0
        } else {
            (1.0 - q).powi(3)
        }
    }

    fn bump_grad(&self, x: &DVector<f64>) -> DVector<f64> {
        let r2 = self.radius * self.radius;
        let q = (x - &self.center).norm_squared() / r2;
        if q >= 1.0 {
            DVector::zeros(x.len())
        } else {
            (x - &self.center) * (-6.0 * (1.0 - q) * (1.0 - q) / r2)
        }
    }

    fn bump_laplacian(&self, x: &DVector<f64>) -> f64 {
        let r2 = self.radius * self.radius;
        let q = (x - &self.center).norm_squared() / r2;
        if q >= 1.0 {
            0.0
        } else {
            let n = x.len() as f64;
            // b = (1-q)^3: grad q = 2(x-c)/r^2, |grad q|^2 = 4q/r^2,
            // lap q = 2n/r^2.
            6.0 * (1.0 - q) * (4.0 * q / r2) - 3.0 * (1.0 - q) * (1.0 - q) * (2.0 * n / r2)
        }
    }

    pub fn eval(&self, x: &DVector<f64>) -> f64 {
        self.bump(x)
    }

    pub fn laplacian(&self, x: &DVector<f64>) -> f64 {
        self.bump_laplacian(x)
    }

    pub fn eval_c(&self, x: &DVector<f64>) -> C64 {
        match &self.carrier {
            None => C64::new(self.bump(x), 0.0),
            Some((xi, h)) => C64::from_polar(1.0, xi.dot(x) / h) * self.bump(x),
        }
    }

    /// `Delta (b e^{i xi.x/h}) = (Delta b + 2i xi.grad b / h - b |xi|^2/h^2)
    /// e^{i xi.x/h}`.
    pub fn laplacian_c(&self, x: &DVector<f64>) -> C64 {
        match &self.carrier {
            None => C64::new(self.bump_laplacian(x), 0.0),
            Some((xi, h)) => {
                let b = self.bump(x);
                let gb = self.bump_grad(x);
                let val = C64::new(
                    self.bump_laplacian(x) - b * xi.norm_squared() / (h * h),
                    0.0,
                ) + C64::new(0.0, 2.0 * xi.dot(&gb) / h);
                val * C64::from_polar(1.0, xi.dot(x) / h)
            }
        }
    }
}

/// Distributional Helmholtz pairing `<phi, conj(lap test)> + h^{-1-eps}
/// <alpha phi, conj(test)>` over weighted nodes.
pub fn helmholtz_pairing(
    values: &[C64],
    nodes: &[DVector<f64>],
    weights: &[f64],
    alpha: &CoefficientField,
    h: f64,
    epsilon: f64,
    test: &TestFunction,
) -> C64 {
    let lam = h.powf(-1.0 - epsilon);
    let mut acc = C64::new(0.0, 0.0);
    for ((v, z), wgt) in values.iter().zip(nodes).zip(weights) {
        let t = test.eval_c(z).conj();
        let l = test.laplacian_c(z).conj();
        acc += v * (l + t * C64::new(lam * alpha.eval(z), 0.0)) * C64::new(*wgt, 0.0);
    }
    acc
}

/// Quasimode residual per test function, normalized by `||f||_{H^1}`.
pub fn quasimode_residual(
    ansatz: &LiftedAnsatz,
    alpha: &CoefficientField,
    tests: &[TestFunction],
) -> Vec<f64> {
    tests
        .iter()
        .map(|t| {
            helmholtz_pairing(
                &ansatz.phi_helmholtz,
                &ansatz.nodes,
                &ansatz.weights,
                alpha,
                ansatz.h,
                ansatz.epsilon,
                t,
            )
            .norm()
                / ansatz.f_h1_norm.max(1e-300)
        })
        .collect()
}

/// `Pi = I* X^{-1}` applied slice-wise to a node profile (2-D only): the
/// Riesz filter `|zeta|` acts on the launch grid, then the result is spread
/// along each node's ray (mu-free interior backprojection with a one-cell
/// Gaussian kernel).
pub fn pi_apply(
    family: &BeamFamily,
    profile: &[C64],
    out_spec: &Grid2,
    t_end: f64,
) -> Result<CGrid2> {
    let dim = family.dim();
    if dim != 2 {
        return Err(Error::InvalidParameter {
            name: "dim",
            detail: "Pi processing is defined for the 2-D primary target".into(),
        });
    }
    let per = family.k_grid.per_axis;
    assert_eq!(per * per, profile.len());

    // X^{-1}: multiplier |zeta| on the zero-padded launch grid.
    let pad = 2 * per;
    let mut buf = vec![C64::new(0.0, 0.0); pad * pad];
    for iy in 0..per {
        for ix in 0..per {
            buf[(iy + per / 2) * pad + ix + per / 2] = profile[iy * per + ix];
        }
    }
    let dzx = (family.k_grid.hi[0] - family.k_grid.lo[0]) / per as f64;
    let dzy = (family.k_grid.hi[1] - family.k_grid.lo[1]) / per as f64;
    fft_2d(&mut buf, pad, pad, false);
    let fx = fft_freqs(pad, dzx);
    let fy = fft_freqs(pad, dzy);
    for iy in 0..pad {
        for ix in 0..pad {
            let k = (fx[ix] * fx[ix] + fy[iy] * fy[iy]).sqrt();
            buf[iy * pad + ix] *= k;
        }
    }
    fft_2d(&mut buf, pad, pad, true);
    let mut filtered = vec![C64::new(0.0, 0.0); per * per];
    for iy in 0..per {
        for ix in 0..per {
            filtered[iy * per + ix] = buf[(iy + per / 2) * pad + ix + per / 2];
        }
    }

    // I*: spread along rays.
    let mut out = CGrid2::new(
        out_spec.nx,
        out_spec.ny,
        out_spec.x0,
        out_spec.y0,
        out_spec.dx,
        out_spec.dy,
    );
    let sigma = out.dx;
    let window = 3i64;
    for (iz, beam) in family.beams.iter().enumerate() {
        let value = filtered[iz] * C64::new(family.k_grid.weights[iz], 0.0);
        if value.norm_sqr() == 0.0 {
            continue;
        }
        let t_max = t_end.min(beam.duration());
        let m = 48;
        let ds = t_max / m as f64;
        for j in 0..=m {
            let s = j as f64 * ds;
            let w = if j == 0 || j == m { 0.5 } else { 1.0 };
            let x = beam.state_at(s).x;
            let fxg = (x[0] - out.x0) / out.dx;
            let fyg = (x[1] - out.y0) / out.dy;
            let cx = fxg.round() as i64;
            let cy = fyg.round() as i64;
            let norm = w * ds / (std::f64::consts::TAU * sigma * sigma);
            for jy in (cy - window)..=(cy + window) {
                if jy < 0 || jy >= out.ny as i64 {
                    continue;
                }
                for jx in (cx - window)..=(cx + window) {
                    if jx < 0 || jx >= out.nx as i64 {
                        continue;
                    }
                    let gx = out.x(jx as usize) - x[0];
                    let gy = out.y(jy as usize) - x[1];
                    let k = (-(gx * gx + gy * gy) / (2.0 * sigma * sigma)).exp();
                    *out.at_mut(jx as usize, jy as usize) += value * C64::new(norm * k, 0.0);
                }
            }
        }
    }
    Ok(out)
}

/// Helmholtz residual field of a gridded profile:
/// `Delta_g w + omega^2 alpha w` by grid differences.
pub fn helmholtz_residual_field(
    field: &CGrid2,
    alpha: &CoefficientField,
    metric: &MetricField,
    omega: f64,
) -> CGrid2 {
    let (nx, ny) = (field.nx, field.ny);
    let mut out = CGrid2::new(nx, ny, field.x0, field.y0, field.dx, field.dy);
    for iy in 1..ny - 1 {
        for ix in 1..nx - 1 {
            let x = DVector::from_vec(vec![field.x(ix), field.y(iy)]);
            let ginv = metric.eval_ginv(&x);
            let drift = metric.lb_drift(&x);
            let uxx = (field.at(ix + 1, iy) - field.at(ix, iy) * C64::new(2.0, 0.0)
                + field.at(ix - 1, iy))
                / C64::new(field.dx * field.dx, 0.0);
            let uyy = (field.at(ix, iy + 1) - field.at(ix, iy) * C64::new(2.0, 0.0)
                + field.at(ix, iy - 1))
                / C64::new(field.dy * field.dy, 0.0);
            let ux = (field.at(ix + 1, iy) - field.at(ix - 1, iy)) / C64::new(2.0 * field.dx, 0.0);
            let uy = (field.at(ix, iy + 1) - field.at(ix, iy - 1)) / C64::new(2.0 * field.dy, 0.0);
            let lap = uxx * C64::new(ginv[(0, 0)], 0.0)
                + uyy * C64::new(ginv[(1, 1)], 0.0)
                + ux * C64::new(drift[0], 0.0)
                + uy * C64::new(drift[1], 0.0);
            *out.at_mut(ix, iy) =
                lap + field.at(ix, iy) * C64::new(omega * omega * alpha.eval(&x), 0.0);
        }
    }
    out
}

/// Check of the time-integration gain on the source: the ratio
/// `|| int_0^t e^{i omega s} K0 ds || / || e^{i omega t} K0 ||` over
/// space-time, computed discretely. Scales like `omega^{-1} = h^{(1+eps)/2}`.
pub fn source_time_integration_ratio(omega: f64, t_end: f64, n_steps: usize) -> f64 {
    let dt = t_end / n_steps as f64;
    let mut running = C64::new(0.0, 0.0);
    let mut num = 0.0;
    let mut den = 0.0;
    let mut prev = C64::new(1.0, 0.0);
    for k in 1..=n_steps {
        let t = k as f64 * dt;
        let cur = C64::from_polar(1.0, omega * t);
        running += (prev + cur) * C64::new(0.5 * dt, 0.0);
        prev = cur;
        num += running.norm_sqr() * dt;
        den += dt; // |e^{i omega t}|^2 = 1
    }
    (num / den).sqrt()
}

/// The two-branch combination reproducing `(u0, u1)` data:
/// `cos(omega t) P0 + h^{(1+eps)/2} sin(omega t) P1`.
pub fn two_branch_values(omega: f64, h: f64, epsilon: f64, t: f64) -> (f64, f64, f64, f64) {
    let scale = h.powf((1.0 + epsilon) / 2.0);
    let cos_branch = (omega * t).cos();
    let cos_branch_dt = -omega * (omega * t).sin();
    let sin_branch = scale * (omega * t).sin();
    let sin_branch_dt = scale * omega * (omega * t).cos();
    (cos_branch, cos_branch_dt, sin_branch, sin_branch_dt)
}
