//! Joint propagation of a Gaussian beam: ray, phase Hessian (matrix Riccati),
//! deformation matrix, amplitude and on-ray phase advance on identical time
//! nodes via one RK4 system.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::geometry::{hamiltonian, FermiChart, MetricField};

use super::cutoff::{CutoffPolicy, CutoffSpec};
use super::hessian::HessianTriple;

/// Determinant magnitude below which Y counts as singular.
const DET_Y_FLOOR: f64 = 1e-12;

/// One time slice of a Gaussian beam.
#[derive(Clone, Debug)]
pub struct BeamState {
    pub t: f64,
    pub x: DVector<f64>,
    pub p: DVector<f64>,
    /// Complex symmetric phase Hessian with `Im M > 0`.
    pub m: DMatrix<C64>,
    /// Deformation matrix, `Y(0) = I`, nonsingular along the beam.
    pub y: DMatrix<C64>,
    pub a: C64,
    /// Accumulated real on-ray phase `psi(t, x(t))`.
    pub phase0: f64,
}

impl BeamState {
    pub fn min_eig_im_m(&self) -> f64 {
        min_eig_im(&self.m)
    }

    /// The conserved quantity `det(Im M) |det Y|^2`.
    pub fn lkk_invariant(&self) -> f64 {
        let im = self.m.map(|v| v.im);
        let det_y = self.y.determinant();
        im.determinant() * det_y.norm_sqr()
    }
}

/// A propagated beam with its cutoff and chart.
#[derive(Clone)]
pub struct Beam {
    pub states: Vec<BeamState>,
    pub h: f64,
    pub cutoff: CutoffSpec,
    pub chart: Arc<FermiChart>,
    pub dt: f64,
}

/// Construction parameters for [`propagate_beam`].
#[derive(Clone)]
pub struct BeamConfig {
    pub h: f64,
    pub a0: C64,
    pub dt: f64,
    /// Initial phase Hessian; defaults to `i Id` (single-beam convention).
    pub m0: Option<DMatrix<C64>>,
    pub policy: CutoffPolicy,
}

impl BeamConfig {
    pub fn new(h: f64) -> Self {
        Self {
            h,
            a0: C64::new(1.0, 0.0),
            dt: 1e-3,
            m0: None,
            policy: CutoffPolicy::Paper,
        }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn with_a0(mut self, a0: C64) -> Self {
        self.a0 = a0;
        self
    }

    pub fn with_m0(mut self, m0: DMatrix<C64>) -> Self {
        self.m0 = Some(m0);
        self
    }

    pub fn with_policy(mut self, policy: CutoffPolicy) -> Self {
        self.policy = policy;
        self
    }
}

pub(crate) fn to_c(m: &DMatrix<f64>) -> DMatrix<C64> {
    m.map(|v| C64::new(v, 0.0))
}

pub(crate) fn min_eig_im(m: &DMatrix<C64>) -> f64 {
    match m.nrows() {
        1 => m[(0, 0)].im,
        2 => {
            // Closed form for the symmetrized imaginary part.
            let a = m[(0, 0)].im;
            let d = m[(1, 1)].im;
            let b = 0.5 * (m[(0, 1)].im + m[(1, 0)].im);
            let tr = a + d;
            let disc = ((a - d) * (a - d) + 4.0 * b * b).max(0.0).sqrt();
            0.5 * (tr - disc)
        }
        _ => {
            let im = m.map(|v| v.im);
            let sym = (&im + im.transpose()) * 0.5;
            sym.symmetric_eigenvalues()
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min)
        }
    }
}

/// `-dM/dt = D + B M + M B^t + M C M`, returned as `dM/dt`.
fn riccati_rhs(m: &DMatrix<C64>, triple: &HessianTriple) -> DMatrix<C64> {
    let d = to_c(&triple.d);
    let b = to_c(&triple.b);
    let c = to_c(&triple.c);
    -(d + &b * m + m * b.transpose() + m * c * m)
}

/// `dY/dt = (C M + B^t) Y` (`H_pp M + H_px`, with `H_px = B^t`).
fn y_rhs(y: &DMatrix<C64>, m: &DMatrix<C64>, triple: &HessianTriple) -> DMatrix<C64> {
    let b = to_c(&triple.b);
    let c = to_c(&triple.c);
    (c * m + b.transpose()) * y
}

fn symmetrize(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m + m.transpose()) * C64::new(0.5, 0.0)
}

/// One RK4 step of the Riccati equation with the triple frozen over the step.
/// The output is re-symmetrized; losing positivity of `Im M` is an error.
pub fn riccati_step(m: &DMatrix<C64>, triple: &HessianTriple, dt: f64) -> Result<DMatrix<C64>> {
    let k1 = riccati_rhs(m, triple);
    let k2 = riccati_rhs(&(m + &k1 * C64::new(dt / 2.0, 0.0)), triple);
    let k3 = riccati_rhs(&(m + &k2 * C64::new(dt / 2.0, 0.0)), triple);
    let k4 = riccati_rhs(&(m + &k3 * C64::new(dt, 0.0)), triple);
    let next =
        m + (k1 + k2 * C64::new(2.0, 0.0) + k3 * C64::new(2.0, 0.0) + k4) * C64::new(dt / 6.0, 0.0);
    let next = symmetrize(&next);
    let min_eig = min_eig_im(&next);
    if !(min_eig > 0.0) || next.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::RiccatiBlowup { t: dt, min_eig });
    }
    Ok(next)
}

/// One RK4 step of the deformation equation. `M` is advanced consistently
/// through the internal stages (frozen triple); only `Y'` is returned.
pub fn y_step(
    y: &DMatrix<C64>,
    m: &DMatrix<C64>,
    triple: &HessianTriple,
    dt: f64,
) -> Result<DMatrix<C64>> {
    let half = C64::new(dt / 2.0, 0.0);
    let full = C64::new(dt, 0.0);

    let km1 = riccati_rhs(m, triple);
    let ky1 = y_rhs(y, m, triple);

    let m2 = m + &km1 * half;
    let km2 = riccati_rhs(&m2, triple);
    let ky2 = y_rhs(&(y + &ky1 * half), &m2, triple);

    let m3 = m + &km2 * half;
    let km3 = riccati_rhs(&m3, triple);
    let ky3 = y_rhs(&(y + &ky2 * half), &m3, triple);

    let m4 = m + &km3 * full;
    let ky4 = y_rhs(&(y + &ky3 * full), &m4, triple);

    let next = y
        + (ky1 + ky2 * C64::new(2.0, 0.0) + ky3 * C64::new(2.0, 0.0) + ky4)
            * C64::new(dt / 6.0, 0.0);
    let det = next.determinant().norm();
    if det < DET_Y_FLOOR || !det.is_finite() {
        return Err(Error::SingularY {
            t: dt,
            det_abs: det,
        });
    }
    Ok(next)
}

/// `a(t) = a0 / sqrt(det Y(t))` with the branch of the square root tracked by
/// continuous argument unwrapping along the supplied `Y` trajectory.
pub fn amplitude(a0: C64, ys: &[DMatrix<C64>]) -> Result<C64> {
    assert!(!ys.is_empty());
    let mut arg = ys[0].determinant().arg();
    let mut prev = arg;
    for (i, y) in ys.iter().enumerate().skip(1) {
        let raw = y.determinant().arg();
        let mut delta = raw - (prev % std::f64::consts::TAU);
        while delta > std::f64::consts::PI {
            delta -= std::f64::consts::TAU;
        }
        while delta < -std::f64::consts::PI {
            delta += std::f64::consts::TAU;
        }
        if delta.abs() > std::f64::consts::PI - 1e-9 {
            return Err(Error::BranchJump {
                t: i as f64,
                jump: delta.abs(),
            });
        }
        arg = prev + delta;
        prev = arg;
    }
    let det = ys.last().unwrap().determinant();
    let r = det.norm();
    if r < DET_Y_FLOOR {
        return Err(Error::SingularY {
            t: ys.len() as f64,
            det_abs: r,
        });
    }
    let sqrt = C64::from_polar(r.sqrt(), 0.5 * arg);
    Ok(a0 / sqrt)
}

/// Propagate a beam along the chart's ray from `(z, eta)`.
///
/// State layout in the complex RK4 vector: `[x, p, M, Y, phase0, log(a/a0)]`.
pub fn propagate_beam(
    metric: &MetricField,
    chart: &Arc<FermiChart>,
    z: &DVector<f64>,
    eta: &DVector<f64>,
    cfg: &BeamConfig,
) -> Result<Beam> {
    let n = metric.dim();
    let start = chart.ray.start();
    debug_assert!(
        (&start.x - z).norm() < 1e-9 && (&start.p - eta).norm() < 1e-9,
        "chart ray must start at (z, eta)"
    );

    let m0 = cfg
        .m0
        .clone()
        .unwrap_or_else(|| DMatrix::identity(n, n).map(|v| C64::new(0.0, v)));
    let min0 = min_eig_im(&m0);
    if !(min0 > 0.0) {
        return Err(Error::RiccatiBlowup {
            t: 0.0,
            min_eig: min0,
        });
    }

    let len = 2 * n + 2 * n * n + 2;
    let idx_m = 2 * n;
    let idx_y = 2 * n + n * n;
    let idx_phase = 2 * n + 2 * n * n;
    let idx_loga = idx_phase + 1;

    let pack_mat = |state: &mut DVector<C64>, base: usize, m: &DMatrix<C64>| {
        for c in 0..n {
            for r in 0..n {
                state[base + c * n + r] = m[(r, c)];
            }
        }
    };
    let unpack_mat = |state: &DVector<C64>, base: usize| -> DMatrix<C64> {
        DMatrix::from_fn(n, n, |r, c| state[base + c * n + r])
    };

    let mut state = DVector::from_element(len, C64::new(0.0, 0.0));
    for i in 0..n {
        state[i] = C64::new(z[i], 0.0);
        state[n + i] = C64::new(eta[i], 0.0);
    }
    pack_mat(&mut state, idx_m, &m0);
    pack_mat(
        &mut state,
        idx_y,
        &DMatrix::identity(n, n).map(|v| C64::new(v, 0.0)),
    );

    let rhs = |s: &DVector<C64>| -> DVector<C64> {
        let x = DVector::from_fn(n, |i, _| s[i].re);
        let p = DVector::from_fn(n, |i, _| s[n + i].re);
        let m = unpack_mat(s, idx_m);
        let y = unpack_mat(s, idx_y);
        let (triple, dginv) = super::hessian::hessian_with_dginv(metric, &x, &p);
        let ginv = &triple.c;
        let xdot = ginv * &p;
        let mut pdot = DVector::zeros(n);
        for k in 0..n {
            pdot[k] = -0.5 * p.dot(&(&dginv[k] * &p));
        }
        let mdot = riccati_rhs(&m, &triple);
        let ydot = y_rhs(&y, &m, &triple);
        let h_val = hamiltonian(metric, &x, &p);
        let phase_dot = p.dot(&xdot) - h_val;
        // Metric-consistent transport: log a evolves by -1/2 Delta_g psi on
        // the ray, i.e. -1/2 (tr(C M) + b . p) with the Laplace-Beltrami
        // drift b. In Euclidean (or Fermi) coordinates this reduces to the
        // chart form -1/2 tr(H_pp M + H_xp).
        let c = to_c(&triple.c);
        let drift = metric.lb_drift(&x);
        let loga_dot = -((c * &m).trace() + C64::new(drift.dot(&p), 0.0)) * C64::new(0.5, 0.0);

        let mut out = DVector::from_element(len, C64::new(0.0, 0.0));
        for i in 0..n {
            out[i] = C64::new(xdot[i], 0.0);
            out[n + i] = C64::new(pdot[i], 0.0);
        }
        for cc in 0..n {
            for r in 0..n {
                out[idx_m + cc * n + r] = mdot[(r, cc)];
                out[idx_y + cc * n + r] = ydot[(r, cc)];
            }
        }
        out[idx_phase] = C64::new(phase_dot, 0.0);
        out[idx_loga] = loga_dot;
        out
    };

    let rk4 = |s: &DVector<C64>, dt: f64| -> DVector<C64> {
        let k1 = rhs(s);
        let k2 = rhs(&(s + &k1 * C64::new(dt / 2.0, 0.0)));
        let k3 = rhs(&(s + &k2 * C64::new(dt / 2.0, 0.0)));
        let k4 = rhs(&(s + &k3 * C64::new(dt, 0.0)));
        s + (k1 + k2 * C64::new(2.0, 0.0) + k3 * C64::new(2.0, 0.0) + k4) * C64::new(dt / 6.0, 0.0)
    };

    let t_end = chart.ray.duration();
    let snapshot = |t: f64, s: &DVector<C64>| -> BeamState {
        let m = symmetrize(&unpack_mat(s, idx_m));
        BeamState {
            t,
            x: DVector::from_fn(n, |i, _| s[i].re),
            p: DVector::from_fn(n, |i, _| s[n + i].re),
            m,
            y: unpack_mat(s, idx_y),
            a: cfg.a0 * s[idx_loga].exp(),
            phase0: s[idx_phase].re,
        }
    };

    let mut states = vec![snapshot(0.0, &state)];
    let mut prev_arg = states[0].y.determinant().arg();
    let mut t = 0.0;
    while t < t_end - 1e-15 {
        let step = cfg.dt.min(t_end - t);
        state = rk4(&state, step);
        t += step;
        if state.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::IntegrationFailure { t });
        }
        // Re-symmetrize M in place.
        let m_sym = symmetrize(&unpack_mat(&state, idx_m));
        pack_mat(&mut state, idx_m, &m_sym);

        let st = snapshot(t, &state);
        let min_eig = st.min_eig_im_m();
        if !(min_eig > 0.0) {
            return Err(Error::RiccatiBlowup { t, min_eig });
        }
        let det_y = st.y.determinant();
        if det_y.norm() < DET_Y_FLOOR {
            return Err(Error::SingularY {
                t,
                det_abs: det_y.norm(),
            });
        }
        let arg = det_y.arg();
        let mut jump = arg - prev_arg % std::f64::consts::TAU;
        while jump > std::f64::consts::PI {
            jump -= std::f64::consts::TAU;
        }
        while jump < -std::f64::consts::PI {
            jump += std::f64::consts::TAU;
        }
        if jump.abs() > 3.0 {
            return Err(Error::BranchJump {
                t,
                jump: jump.abs(),
            });
        }
        prev_arg += jump;
        states.push(st);
    }

    let margin = chart.tube_radius / 4.0;
    let cutoff = CutoffSpec::new(cfg.h, n, cfg.policy, margin, chart.chart_centers.clone());

    Ok(Beam {
        states,
        h: cfg.h,
        cutoff,
        chart: Arc::clone(chart),
        dt: cfg.dt,
    })
}

impl Beam {
    pub fn duration(&self) -> f64 {
        self.states.last().unwrap().t
    }

    /// Index of the last state with `t_i <= t`.
    pub fn bracket(&self, t: f64) -> (usize, f64) {
        let last = self.states.len() - 1;
        if t <= 0.0 {
            return (0, 0.0);
        }
        if t >= self.states[last].t {
            return (last - 1, 1.0);
        }
        let mut i = ((t / self.dt) as usize).min(last - 1);
        while self.states[i + 1].t < t {
            i += 1;
        }
        while self.states[i].t > t {
            i -= 1;
        }
        let (t0, t1) = (self.states[i].t, self.states[i + 1].t);
        (i, ((t - t0) / (t1 - t0)).clamp(0.0, 1.0))
    }

    /// Linear interpolation of all state fields at time `t`.
    pub fn state_at(&self, t: f64) -> BeamState {
        let (i, w) = self.bracket(t);
        let (s0, s1) = (&self.states[i], &self.states[i + 1]);
        let cw = C64::new(w, 0.0);
        let cv = C64::new(1.0 - w, 0.0);
        BeamState {
            t,
            x: &s0.x * (1.0 - w) + &s1.x * w,
            p: &s0.p * (1.0 - w) + &s1.p * w,
            m: &s0.m * cv + &s1.m * cw,
            y: &s0.y * cv + &s1.y * cw,
            a: s0.a * cv + s1.a * cw,
            phase0: s0.phase0 * (1.0 - w) + s1.phase0 * w,
        }
    }

    /// Evaluate the beam `U(t, x)`; zero outside the cutoff support.
    pub fn evaluate(&self, t: f64, x: &DVector<f64>) -> C64 {
        let st = self.state_at(t);
        let chi_t = self.cutoff.chi_time(t);
        if chi_t == 0.0 {
            return C64::new(0.0, 0.0);
        }
        self.evaluate_with_state(&st, x) * chi_t
    }

    /// Evaluate using an explicit state (exact at sample nodes).
    pub fn evaluate_with_state(&self, st: &BeamState, x: &DVector<f64>) -> C64 {
        let d = x - &st.x;
        let s = d.norm();
        let chi = self.cutoff.chi_h(s);
        if chi == 0.0 {
            return C64::new(0.0, 0.0);
        }
        let dc = d.map(|v| C64::new(v, 0.0));
        let quad = dc.dot(&(&st.m * &dc));
        let psi = C64::new(st.phase0 + d.dot(&st.p), 0.0) + quad * C64::new(0.5, 0.0);
        st.a * (C64::new(0.0, 1.0) * psi / C64::new(self.h, 0.0)).exp() * chi
    }

    /// Complex total phase `psi(t, x)` of the quadratic Ansatz at a state.
    pub fn phase_at(&self, st: &BeamState, x: &DVector<f64>) -> C64 {
        let d = x - &st.x;
        let dc = d.map(|v| C64::new(v, 0.0));
        C64::new(st.phase0 + d.dot(&st.p), 0.0) + dc.dot(&(&st.m * &dc)) * C64::new(0.5, 0.0)
    }

    /// Export one JSON record per state.
    pub fn to_jsonl<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        for st in &self.states {
            let rec = serde_json::json!({
                "t": st.t,
                "x": st.x.as_slice(),
                "p": st.p.as_slice(),
                "m_re": st.m.iter().map(|v| v.re).collect::<Vec<_>>(),
                "m_im": st.m.iter().map(|v| v.im).collect::<Vec<_>>(),
                "y_re": st.y.iter().map(|v| v.re).collect::<Vec<_>>(),
                "y_im": st.y.iter().map(|v| v.im).collect::<Vec<_>>(),
                "a_re": st.a.re,
                "a_im": st.a.im,
                "phase0": st.phase0,
            });
            writeln!(w, "{rec}")?;
        }
        Ok(())
    }
}
