//! Hamiltonian flow of `H = 1/2 g^{ij} p_i p_j`, exit times and the
//! non-trapping check.

use nalgebra::DVector;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

use super::domain::DomainSpec;
use super::metric::MetricField;

/// Default integration step.
pub const DEFAULT_DT: f64 = 1e-3;
/// Bisection tolerance for the boundary exit time.
pub const EXIT_TIME_TOL: f64 = 1e-10;
/// Exit is transversal when `|<xdot, nu>| >= TRANSVERSAL_TOL`.
pub const TRANSVERSAL_TOL: f64 = 1e-3;

/// A point of phase space: position and covector momentum.
#[derive(Clone, Debug, PartialEq)]
pub struct PhasePoint {
    pub x: DVector<f64>,
    pub p: DVector<f64>,
}

impl PhasePoint {
    pub fn new(x: DVector<f64>, p: DVector<f64>) -> Self {
        Self { x, p }
    }
}

/// `H(x, p) = 1/2 g^{ij}(x) p_i p_j`.
pub fn hamiltonian(metric: &MetricField, x: &DVector<f64>, p: &DVector<f64>) -> f64 {
    0.5 * p.dot(&(metric.eval_ginv(x) * p))
}

/// Momentum `p = g(x) omega / |omega|_g`, so the ray has unit speed.
pub fn unit_speed_momentum(
    metric: &MetricField,
    x: &DVector<f64>,
    omega: &DVector<f64>,
) -> DVector<f64> {
    let g = metric.eval_g(x);
    let norm = omega.dot(&(&g * omega)).sqrt();
    (&g * omega) / norm
}

/// Hamilton's equations as a flat state `[x, p]`.
pub(crate) fn flow_rhs(metric: &MetricField, state: &DVector<f64>) -> DVector<f64> {
    let n = metric.dim();
    let x = state.rows(0, n).into_owned();
    let p = state.rows(n, n).into_owned();
    let ginv = metric.eval_ginv(&x);
    let dginv = metric.eval_dginv(&x);
    let xdot = &ginv * &p;
    let mut pdot = DVector::zeros(n);
    for k in 0..n {
        pdot[k] = -0.5 * p.dot(&(&dginv[k] * &p));
    }
    let mut out = DVector::zeros(2 * n);
    out.rows_mut(0, n).copy_from(&xdot);
    out.rows_mut(n, n).copy_from(&pdot);
    out
}

/// One classical RK4 step of `ds/dt = f(s)`.
pub(crate) fn rk4_step<F: Fn(&DVector<f64>) -> DVector<f64>>(
    f: &F,
    state: &DVector<f64>,
    dt: f64,
) -> DVector<f64> {
    let k1 = f(state);
    let k2 = f(&(state + &k1 * (dt / 2.0)));
    let k3 = f(&(state + &k2 * (dt / 2.0)));
    let k4 = f(&(state + &k3 * dt));
    state + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0)
}

/// A bicharacteristic ray: time-ordered phase-space samples plus exit data.
#[derive(Clone, Debug)]
pub struct Ray {
    pub samples: Vec<(f64, PhasePoint)>,
    pub dt: f64,
    pub exit_time: Option<f64>,
    pub exit_transversal: bool,
}

impl Ray {
    pub fn start(&self) -> &PhasePoint {
        &self.samples[0].1
    }

    pub fn end(&self) -> &PhasePoint {
        &self.samples.last().unwrap().1
    }

    pub fn duration(&self) -> f64 {
        self.samples.last().unwrap().0
    }

    /// Position at time `t` by linear interpolation between samples.
    pub fn position_at(&self, t: f64) -> DVector<f64> {
        let (i, w) = self.bracket(t);
        &self.samples[i].1.x * (1.0 - w) + &self.samples[i + 1].1.x * w
    }

    pub(crate) fn bracket(&self, t: f64) -> (usize, f64) {
        let last = self.samples.len() - 1;
        if t <= self.samples[0].0 {
            return (0, 0.0);
        }
        if t >= self.samples[last].0 {
            return (last - 1, 1.0);
        }
        let mut i = ((t - self.samples[0].0) / self.dt) as usize;
        i = i.min(last - 1);
        while self.samples[i + 1].0 < t {
            i += 1;
        }
        while self.samples[i].0 > t {
            i -= 1;
        }
        let (t0, t1) = (self.samples[i].0, self.samples[i + 1].0);
        (i, ((t - t0) / (t1 - t0)).clamp(0.0, 1.0))
    }

    /// Write as CSV: `t, x_1..x_n, p_1..p_n`.
    pub fn to_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        let n = self.samples[0].1.x.len();
        let mut header = String::from("t");
        for i in 1..=n {
            header.push_str(&format!(",x{i}"));
        }
        for i in 1..=n {
            header.push_str(&format!(",p{i}"));
        }
        writeln!(w, "{header}")?;
        for (t, pp) in &self.samples {
            let mut line = format!("{t}");
            for v in pp.x.iter().chain(pp.p.iter()) {
                line.push_str(&format!(",{v}"));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

/// Integrate the Hamiltonian flow until the boundary is crossed or `t_max` is
/// reached. The crossing time is refined by bisection to [`EXIT_TIME_TOL`].
pub fn hamiltonian_flow(
    metric: &MetricField,
    start: &PhasePoint,
    dt: f64,
    t_max: f64,
    domain: &DomainSpec,
) -> Result<Ray> {
    let n = metric.dim();
    assert_eq!(start.x.len(), n);
    let f = |s: &DVector<f64>| flow_rhs(metric, s);

    let mut state = DVector::zeros(2 * n);
    state.rows_mut(0, n).copy_from(&start.x);
    state.rows_mut(n, n).copy_from(&start.p);

    let mut samples = vec![(0.0, start.clone())];
    let mut t = 0.0;
    let mut exit_time = None;
    let mut exit_transversal = false;

    while t < t_max - 1e-15 {
        let step = dt.min(t_max - t);
        let next = rk4_step(&f, &state, step);
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::IntegrationFailure { t });
        }
        let x_next = next.rows(0, n).into_owned();
        if self_distance(domain, &x_next) >= 0.0 {
            // Bisection on the substep length for the crossing time.
            let mut lo = 0.0;
            let mut hi = step;
            while hi - lo > EXIT_TIME_TOL {
                let mid = 0.5 * (lo + hi);
                let s_mid = rk4_step(&f, &state, mid);
                if self_distance(domain, &s_mid.rows(0, n).into_owned()) >= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let s_exit = rk4_step(&f, &state, hi);
            let x_exit = s_exit.rows(0, n).into_owned();
            let p_exit = s_exit.rows(n, n).into_owned();
            let tau = t + hi;
            let nu = domain.boundary_normal(&x_exit, metric);
            let xdot = metric.eval_ginv(&x_exit) * &p_exit;
            let speed = metric.norm_tangent(&x_exit, &xdot).max(1e-300);
            let pairing = xdot.dot(&nu) / speed;
            exit_transversal = pairing.abs() >= TRANSVERSAL_TOL;
            exit_time = Some(tau);
            samples.push((tau, PhasePoint::new(x_exit, p_exit)));
            break;
        }
        t += step;
        state = next;
        samples.push((
            t,
            PhasePoint::new(state.rows(0, n).into_owned(), state.rows(n, n).into_owned()),
        ));
    }

    Ok(Ray {
        samples,
        dt,
        exit_time,
        exit_transversal,
    })
}

fn self_distance(domain: &DomainSpec, x: &DVector<f64>) -> f64 {
    domain.boundary_distance(x)
}

/// Free flow on all of `R^n` (no boundary), for beams that never exit.
pub fn free_flow(metric: &MetricField, start: &PhasePoint, dt: f64, t_max: f64) -> Result<Ray> {
    let n = metric.dim();
    let f = |s: &DVector<f64>| flow_rhs(metric, s);
    let mut state = DVector::zeros(2 * n);
    state.rows_mut(0, n).copy_from(&start.x);
    state.rows_mut(n, n).copy_from(&start.p);
    let mut samples = vec![(0.0, start.clone())];
    let mut t = 0.0;
    while t < t_max - 1e-15 {
        let step = dt.min(t_max - t);
        state = rk4_step(&f, &state, step);
        if state.iter().any(|v| !v.is_finite()) {
            return Err(Error::IntegrationFailure { t });
        }
        t += step;
        samples.push((
            t,
            PhasePoint::new(state.rows(0, n).into_owned(), state.rows(n, n).into_owned()),
        ));
    }
    Ok(Ray {
        samples,
        dt,
        exit_time: None,
        exit_transversal: false,
    })
}

/// A sampled violation of the non-trapping assumption.
#[derive(Clone, Debug)]
pub enum Violation {
    /// Ray did not exit before `t_max`.
    Trapped { start: PhasePoint },
    /// Ray exited tangentially.
    Tangential { start: PhasePoint, exit_time: f64 },
}

#[derive(Debug)]
pub struct NonTrappingReport {
    pub max_exit_time: f64,
    pub all_transversal: bool,
    pub violations: Vec<Violation>,
    pub n_samples: usize,
}

impl NonTrappingReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty() && self.all_transversal
    }
}

/// Sample inward unit directions over the boundary (weighted by
/// `|<omega, nu>|`, the flow-invariant measure on the inward bundle) and flow
/// each ray to its exit.
pub fn check_nontrapping(
    metric: &MetricField,
    domain: &DomainSpec,
    n_samples: usize,
    t_max: f64,
    seed: u64,
) -> NonTrappingReport {
    assert!(n_samples >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_exit_time: f64 = 0.0;
    let mut all_transversal = true;
    let mut violations = Vec::new();

    for i in 0..n_samples {
        let (x, omega) = sample_inward(domain, metric, &mut rng, i);
        let p = unit_speed_momentum(metric, &x, &omega);
        let start = PhasePoint::new(x, p);
        match hamiltonian_flow(metric, &start, DEFAULT_DT, t_max, domain) {
            Ok(ray) => match ray.exit_time {
                Some(tau) => {
                    max_exit_time = max_exit_time.max(tau);
                    if !ray.exit_transversal {
                        all_transversal = false;
                        violations.push(Violation::Tangential {
                            start,
                            exit_time: tau,
                        });
                    }
                }
                None => violations.push(Violation::Trapped { start }),
            },
            Err(_) => violations.push(Violation::Trapped { start }),
        }
    }

    NonTrappingReport {
        max_exit_time,
        all_transversal,
        violations,
        n_samples,
    }
}

/// Draw a boundary point and inward direction; directions are accepted with
/// probability proportional to `|cos|` against the inward normal.
fn sample_inward(
    domain: &DomainSpec,
    metric: &MetricField,
    rng: &mut ChaCha8Rng,
    index: usize,
) -> (DVector<f64>, DVector<f64>) {
    let n = domain.dim();
    if n == 1 {
        let (lo, hi) = domain.bounding_box();
        return if index.is_multiple_of(2) {
            (lo.clone(), DVector::from_vec(vec![1.0]))
        } else {
            (hi.clone(), DVector::from_vec(vec![-1.0]))
        };
    }
    loop {
        let x = sample_boundary_point(domain, rng);
        let nu = domain.euclid_normal(&x);
        let dir = sample_unit_vector(n, rng);
        let c = dir.dot(&nu);
        // Inward means negative pairing with the outward normal.
        let dir = if c > 0.0 { -dir } else { dir };
        let c = c.abs();
        if rng.random::<f64>() < c {
            // Nudge the start just inside so the flow starts in the interior.
            let x_in = &x - &nu * 1e-12;
            let _ = metric; // metric enters through unit_speed_momentum later
            return (x_in, dir);
        }
    }
}

fn sample_boundary_point(domain: &DomainSpec, rng: &mut ChaCha8Rng) -> DVector<f64> {
    match domain.kind() {
        super::domain::DomainKind::Interval { a, b } => {
            DVector::from_vec(vec![if rng.random::<bool>() { *a } else { *b }])
        }
        super::domain::DomainKind::UnitBall { dim } => sample_unit_vector(*dim, rng),
        super::domain::DomainKind::Rectangle { lo, hi } => {
            // Pick a face uniformly by area.
            let n = lo.len();
            let mut areas = Vec::with_capacity(2 * n);
            let total_side: f64 = (0..n).map(|i| hi[i] - lo[i]).product();
            for i in 0..n {
                let a = total_side / (hi[i] - lo[i]);
                areas.push(a);
                areas.push(a);
            }
            let total: f64 = areas.iter().sum();
            let mut u = rng.random::<f64>() * total;
            let mut face = 0;
            for (j, a) in areas.iter().enumerate() {
                if u < *a {
                    face = j;
                    break;
                }
                u -= a;
            }
            let axis = face / 2;
            let side = face % 2;
            let mut x = DVector::zeros(n);
            for i in 0..n {
                x[i] = if i == axis {
                    if side == 0 {
                        lo[i]
                    } else {
                        hi[i]
                    }
                } else {
                    lo[i] + rng.random::<f64>() * (hi[i] - lo[i])
                };
            }
            x
        }
    }
}

pub(crate) fn sample_unit_vector(n: usize, rng: &mut ChaCha8Rng) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(n, |_, _| {
            // Box-Muller standard normal.
            let u1: f64 = rng.random::<f64>().max(1e-300);
            let u2: f64 = rng.random();
            (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
        });
        let norm = v.norm();
        if norm > 1e-8 {
            return v / norm;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::metric::SmoothScalar;
    use approx::assert_abs_diff_eq;

    fn v(vals: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(vals)
    }

    #[test]
    fn hamiltonian_values() {
        let m = MetricField::euclidean(2);
        assert_abs_diff_eq!(hamiltonian(&m, &v(&[0.3, 0.4]), &v(&[1.0, 0.0])), 0.5);
        assert_abs_diff_eq!(hamiltonian(&m, &v(&[0.3, 0.4]), &v(&[0.0, 0.0])), 0.0);
        // g = 4 Id in n = 1: g^{11} = 1/4, H = p^2/8.
        let g4 = MetricField::custom(
            1,
            3,
            std::sync::Arc::new(|_| nalgebra::DMatrix::from_element(1, 1, 4.0)),
        );
        assert_abs_diff_eq!(
            hamiltonian(&g4, &v(&[0.0]), &v(&[1.0])),
            0.125,
            epsilon = 1e-14
        );
    }

    #[test]
    fn chord_through_center_exits_at_two() {
        let m = MetricField::euclidean(2);
        let d = DomainSpec::unit_ball(2);
        let start = PhasePoint::new(v(&[-1.0 + 1e-12, 0.0]), v(&[1.0, 0.0]));
        let ray = hamiltonian_flow(&m, &start, 1e-3, 5.0, &d).unwrap();
        let tau = ray.exit_time.expect("must exit");
        assert_abs_diff_eq!(tau, 2.0, epsilon = 1e-9);
        assert!(ray.exit_transversal);
        // Straight line.
        for (t, pp) in &ray.samples {
            assert_abs_diff_eq!(pp.x[0], -1.0 + t, epsilon = 1e-9);
            assert_abs_diff_eq!(pp.x[1], 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn ball_exit_time_formula() {
        // tau(x, omega) = -2 <x, omega> for boundary starts on the unit
        // ball, over 1000 random inward directions.
        let m = MetricField::euclidean(2);
        let d = DomainSpec::unit_ball(2);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut max_err: f64 = 0.0;
        let mut checked = 0;
        while checked < 1000 {
            let x = sample_unit_vector(2, &mut rng);
            let dir = sample_unit_vector(2, &mut rng);
            let dir = if dir.dot(&x) > 0.0 { -dir } else { dir };
            let cos = x.dot(&dir);
            if cos > -0.02 {
                continue; // near-tangential chords exit immediately; keep the budget bounded
            }
            let start = PhasePoint::new(&x - &x * 1e-12, dir.clone());
            let ray = hamiltonian_flow(&m, &start, 1e-3, 5.0, &d).unwrap();
            let tau = ray.exit_time.unwrap();
            max_err = max_err.max((tau - (-2.0 * cos)).abs());
            checked += 1;
        }
        assert!(max_err < 1e-8, "max exit-time error {max_err}");
    }

    #[test]
    fn energy_conserved_along_conformal_flow() {
        let phi = SmoothScalar::trig_sum(
            2,
            vec![(0.2, v(&[1.0, 1.5]), 0.4), (0.1, v(&[-2.0, 1.0]), 0.9)],
        );
        let m = MetricField::conformal(phi);
        let x0 = v(&[0.1, -0.2]);
        let p0 = unit_speed_momentum(&m, &x0, &v(&[0.6, 0.8]));
        let h0 = hamiltonian(&m, &x0, &p0);
        let ray = free_flow(&m, &PhasePoint::new(x0, p0), 1e-3, 5.0).unwrap();
        for (_, pp) in &ray.samples {
            let h = hamiltonian(&m, &pp.x, &pp.p);
            assert!(
                (h - h0).abs() / h0 <= 1e-8,
                "H drift {}",
                (h - h0).abs() / h0
            );
        }
    }

    #[test]
    fn geodesic_and_hamiltonian_flow_coincide() {
        // Second-order geodesic equation integrator as an independent oracle.
        let phi = SmoothScalar::trig_sum(2, vec![(0.15, v(&[1.3, -0.7]), 0.2)]);
        let m = MetricField::conformal(phi);
        let x0 = v(&[0.05, 0.1]);
        let omega = v(&[1.0, 0.4]);
        let norm = m.norm_tangent(&x0, &omega);
        let omega = omega / norm;
        let p0 = unit_speed_momentum(&m, &x0, &omega);
        let ray = free_flow(&m, &PhasePoint::new(x0.clone(), p0), 1e-3, 2.0).unwrap();

        // xdd^k = -Gamma^k_ab xd^a xd^b, integrated by RK4 on (x, xd).
        let f = |s: &DVector<f64>| {
            let x = s.rows(0, 2).into_owned();
            let xd = s.rows(2, 2).into_owned();
            let gamma = crate::geometry::metric::christoffel(&m, &x).unwrap();
            let mut acc = DVector::zeros(2);
            for k in 0..2 {
                acc[k] = -xd.dot(&(&gamma[k] * &xd));
            }
            let mut out = DVector::zeros(4);
            out.rows_mut(0, 2).copy_from(&xd);
            out.rows_mut(2, 2).copy_from(&acc);
            out
        };
        let mut s = DVector::zeros(4);
        s.rows_mut(0, 2).copy_from(&x0);
        s.rows_mut(2, 2).copy_from(&omega);
        let mut worst: f64 = 0.0;
        let dt = 1e-3;
        for i in 1..=2000 {
            s = rk4_step(&f, &s, dt);
            let x_ham = &ray.samples[i].1.x;
            worst = worst.max((s.rows(0, 2).into_owned() - x_ham).norm());
        }
        assert!(worst < 1e-6, "flow mismatch {worst}");
    }

    #[test]
    fn ray_csv_export_shape() {
        let m = MetricField::euclidean(2);
        let ray = free_flow(
            &m,
            &PhasePoint::new(v(&[0.0, 0.0]), v(&[1.0, 0.0])),
            1e-2,
            0.05,
        )
        .unwrap();
        let mut buf = Vec::new();
        ray.to_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,x1,x2,p1,p2");
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(first.len(), 5);
        assert_eq!(first[0], "0");
    }

    #[test]
    fn nontrapping_euclidean_ball() {
        let m = MetricField::euclidean(2);
        let d = DomainSpec::unit_ball(2);
        let report = check_nontrapping(&m, &d, 300, 5.0, 42);
        assert!(report.passed(), "violations: {:?}", report.violations.len());
        assert!(
            (report.max_exit_time - 2.0).abs() < 0.05,
            "max {}",
            report.max_exit_time
        );
    }

    #[test]
    fn nontrapping_interval() {
        let m = MetricField::euclidean(1);
        let d = DomainSpec::unit_interval();
        let report = check_nontrapping(&m, &d, 8, 3.0, 1);
        assert!(report.passed());
        assert_abs_diff_eq!(report.max_exit_time, 1.0, epsilon = 1e-8);
    }

    #[test]
    fn trapping_metric_is_flagged() {
        // Rotationally symmetric conformal bump: h(r) = r e^{phi(r)} has a
        // critical point (closed circular geodesic) and boundary rays crawl
        // through the bump, exceeding the time budget.
        let phi = SmoothScalar::radial_bump(2, 2.0, 0.3, 0.25);
        let m = MetricField::conformal(phi.clone());
        let d = DomainSpec::unit_ball(2);

        // Verify the circular geodesic exists: 1 + r phi'(r) changes sign.
        let h_prime = |r: f64| {
            let x = v(&[r, 0.0]);
            1.0 + r * phi.grad(&x)[0]
        };
        let mut sign_change = false;
        let mut prev = h_prime(0.05);
        for i in 1..200 {
            let r = 0.05 + 0.9 * (i as f64) / 200.0;
            let cur = h_prime(r);
            if prev.signum() != cur.signum() {
                sign_change = true;
                break;
            }
            prev = cur;
        }
        assert!(sign_change, "fixture must contain a circular geodesic");

        let report = check_nontrapping(&m, &d, 60, 4.0, 11);
        assert!(!report.violations.is_empty(), "expected trapped/slow rays");
    }
}
