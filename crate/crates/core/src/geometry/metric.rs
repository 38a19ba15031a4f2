//! Metric fields: evaluation of `g`, `g^{-1}` and their derivatives.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Finite-difference step for metric derivatives when no analytic closure is
/// available.
pub const METRIC_FD_STEP: f64 = 1e-5;

type ScalarFn = Arc<dyn Fn(&DVector<f64>) -> f64 + Send + Sync>;
type VectorFn = Arc<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;
type MatrixFn = Arc<dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync>;
type MatrixListFn = Arc<dyn Fn(&DVector<f64>) -> Vec<DMatrix<f64>> + Send + Sync>;

/// A scalar field with analytic gradient and Hessian closures.
///
/// Used for conformal factors and superposition phases, where the beam
/// machinery needs two exact derivatives.
#[derive(Clone)]
pub struct SmoothScalar {
    dim: usize,
    f: ScalarFn,
    grad: VectorFn,
    hess: MatrixFn,
}

impl SmoothScalar {
    pub fn new(dim: usize, f: ScalarFn, grad: VectorFn, hess: MatrixFn) -> Self {
        Self { dim, f, grad, hess }
    }

    pub fn zero(dim: usize) -> Self {
        Self::new(
            dim,
            Arc::new(|_| 0.0),
            Arc::new(move |x: &DVector<f64>| DVector::zeros(x.len())),
            Arc::new(move |x: &DVector<f64>| DMatrix::zeros(x.len(), x.len())),
        )
    }

    /// Linear field `xi . x`.
    pub fn linear(xi: DVector<f64>) -> Self {
        let dim = xi.len();
        let xi2 = xi.clone();
        Self::new(
            dim,
            Arc::new(move |x: &DVector<f64>| xi.dot(x)),
            Arc::new(move |_| xi2.clone()),
            Arc::new(move |x: &DVector<f64>| DMatrix::zeros(x.len(), x.len())),
        )
    }

    /// Sum of plane waves `sum_m a_m sin(k_m . x + b_m)`.
    pub fn trig_sum(dim: usize, terms: Vec<(f64, DVector<f64>, f64)>) -> Self {
        let t1 = terms.clone();
        let t2 = terms.clone();
        let t3 = terms;
        Self::new(
            dim,
            Arc::new(move |x: &DVector<f64>| {
                t1.iter().map(|(a, k, b)| a * (k.dot(x) + b).sin()).sum()
            }),
            Arc::new(move |x: &DVector<f64>| {
                let mut g = DVector::zeros(x.len());
                for (a, k, b) in &t2 {
                    g += k * (*a * (k.dot(x) + b).cos());
                }
                g
            }),
            Arc::new(move |x: &DVector<f64>| {
                let mut h = DMatrix::zeros(x.len(), x.len());
                for (a, k, b) in &t3 {
                    let s = -a * (k.dot(x) + b).sin();
                    h += k * k.transpose() * s;
                }
                h
            }),
        )
    }

    /// Radial bump `A exp(-(|x|^2 - r0^2)^2 / (2 s^2))`, smooth everywhere.
    ///
    /// As a conformal factor this produces a rotationally symmetric metric
    /// with a circular geodesic when the amplitude is large enough.
    pub fn radial_bump(dim: usize, amplitude: f64, r0_sq: f64, s: f64) -> Self {
        let a = amplitude;
        let s2 = s * s;
        let f = move |x: &DVector<f64>| {
            let v = x.norm_squared() - r0_sq;
            a * (-v * v / (2.0 * s2)).exp()
        };
        let grad = move |x: &DVector<f64>| {
            let v = x.norm_squared() - r0_sq;
            let w = (-v * v / (2.0 * s2)).exp();
            x * (-2.0 * a * v * w / s2)
        };
        let hess = move |x: &DVector<f64>| {
            let n = x.len();
            let v = x.norm_squared() - r0_sq;
            let w = (-v * v / (2.0 * s2)).exp();
            let mut h = DMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    let xx = x[i] * x[j];
                    let mut val = -2.0 * a * w / s2 * (2.0 * xx - 2.0 * v * v / s2 * xx);
                    if i == j {
                        val += -2.0 * a * w / s2 * v;
                    }
                    h[(i, j)] = val;
                }
            }
            h
        };
        Self::new(dim, Arc::new(f), Arc::new(grad), Arc::new(hess))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, x: &DVector<f64>) -> f64 {
        (self.f)(x)
    }

    pub fn grad(&self, x: &DVector<f64>) -> DVector<f64> {
        (self.grad)(x)
    }

    pub fn hess(&self, x: &DVector<f64>) -> DMatrix<f64> {
        (self.hess)(x)
    }
}

#[derive(Clone)]
enum MetricKind {
    Euclidean,
    /// `g_ij = e^{2 phi} delta_ij`.
    Conformal(SmoothScalar),
    /// Closure-backed metric; derivatives fall back to central differences
    /// unless an analytic `dg` closure is supplied.
    Custom {
        g: MatrixFn,
        dg: Option<MatrixListFn>,
    },
}

/// An evaluable Riemannian metric with regularity metadata.
#[derive(Clone)]
pub struct MetricField {
    dim: usize,
    smoothness_order: u32,
    kind: MetricKind,
}

impl MetricField {
    pub fn euclidean(dim: usize) -> Self {
        Self {
            dim,
            smoothness_order: u32::MAX,
            kind: MetricKind::Euclidean,
        }
    }

    pub fn conformal(phi: SmoothScalar) -> Self {
        Self {
            dim: phi.dim(),
            smoothness_order: u32::MAX,
            kind: MetricKind::Conformal(phi),
        }
    }

    pub fn custom(dim: usize, smoothness_order: u32, g: MatrixFn) -> Self {
        Self {
            dim,
            smoothness_order,
            kind: MetricKind::Custom { g, dg: None },
        }
    }

    pub fn custom_with_dg(
        dim: usize,
        smoothness_order: u32,
        g: MatrixFn,
        dg: MatrixListFn,
    ) -> Self {
        Self {
            dim,
            smoothness_order,
            kind: MetricKind::Custom { g, dg: Some(dg) },
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn smoothness_order(&self) -> u32 {
        self.smoothness_order
    }

    pub fn is_euclidean(&self) -> bool {
        matches!(self.kind, MetricKind::Euclidean)
    }

    /// `g_{ij}(x)`.
    pub fn eval_g(&self, x: &DVector<f64>) -> DMatrix<f64> {
        match &self.kind {
            MetricKind::Euclidean => DMatrix::identity(self.dim, self.dim),
            MetricKind::Conformal(phi) => {
                DMatrix::identity(self.dim, self.dim) * (2.0 * phi.eval(x)).exp()
            }
            MetricKind::Custom { g, .. } => g(x),
        }
    }

    /// `g^{ij}(x)`; errors if `g` is not positive definite at `x`.
    pub fn eval_ginv(&self, x: &DVector<f64>) -> DMatrix<f64> {
        match &self.kind {
            MetricKind::Euclidean => DMatrix::identity(self.dim, self.dim),
            MetricKind::Conformal(phi) => {
                DMatrix::identity(self.dim, self.dim) * (-2.0 * phi.eval(x)).exp()
            }
            MetricKind::Custom { g, .. } => {
                let m = g(x);
                m.clone().try_inverse().unwrap_or_else(|| {
                    // Singular; surface as NaNs so callers hit the checked path.
                    DMatrix::from_element(self.dim, self.dim, f64::NAN)
                })
            }
        }
    }

    /// Checked SPD evaluation; returns a degenerate-metric error when the
    /// smallest eigenvalue is not strictly positive.
    pub fn eval_g_checked(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        let g = self.eval_g(x);
        let sym = (&g + g.transpose()) * 0.5;
        let eig = sym.symmetric_eigenvalues();
        let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(min > 0.0) || !min.is_finite() {
            return Err(Error::DegenerateMetric {
                at: x.iter().cloned().collect(),
                detail: format!("min eigenvalue {min}"),
            });
        }
        Ok(g)
    }

    /// `partial_k g_{ij}(x)`, indexed `[k][(i,j)]`.
    pub fn eval_dg(&self, x: &DVector<f64>) -> Vec<DMatrix<f64>> {
        match &self.kind {
            MetricKind::Euclidean => vec![DMatrix::zeros(self.dim, self.dim); self.dim],
            MetricKind::Conformal(phi) => {
                let e = (2.0 * phi.eval(x)).exp();
                let grad = phi.grad(x);
                (0..self.dim)
                    .map(|k| DMatrix::identity(self.dim, self.dim) * (2.0 * grad[k] * e))
                    .collect()
            }
            MetricKind::Custom { g, dg } => match dg {
                Some(dg) => dg(x),
                None => central_diff_matrix(|y| g(y), x, METRIC_FD_STEP),
            },
        }
    }

    /// `partial_k g^{ij}(x)`, indexed `[k][(i,j)]`.
    pub fn eval_dginv(&self, x: &DVector<f64>) -> Vec<DMatrix<f64>> {
        match &self.kind {
            MetricKind::Euclidean => vec![DMatrix::zeros(self.dim, self.dim); self.dim],
            MetricKind::Conformal(phi) => {
                let e = (-2.0 * phi.eval(x)).exp();
                let grad = phi.grad(x);
                (0..self.dim)
                    .map(|k| DMatrix::identity(self.dim, self.dim) * (-2.0 * grad[k] * e))
                    .collect()
            }
            MetricKind::Custom { .. } => {
                central_diff_matrix(|y| self.eval_ginv(y), x, METRIC_FD_STEP)
            }
        }
    }

    /// `partial_l partial_k g^{ij}(x)`, indexed `[l][k][(i,j)]`.
    pub fn eval_d2ginv(&self, x: &DVector<f64>) -> Vec<Vec<DMatrix<f64>>> {
        match &self.kind {
            MetricKind::Euclidean => {
                vec![vec![DMatrix::zeros(self.dim, self.dim); self.dim]; self.dim]
            }
            MetricKind::Conformal(phi) => {
                let e = (-2.0 * phi.eval(x)).exp();
                let grad = phi.grad(x);
                let hess = phi.hess(x);
                (0..self.dim)
                    .map(|l| {
                        (0..self.dim)
                            .map(|k| {
                                let c = 4.0 * grad[l] * grad[k] - 2.0 * hess[(l, k)];
                                DMatrix::identity(self.dim, self.dim) * (c * e)
                            })
                            .collect()
                    })
                    .collect()
            }
            MetricKind::Custom { .. } => {
                let h = METRIC_FD_STEP;
                (0..self.dim)
                    .map(|l| {
                        let mut xp = x.clone();
                        xp[l] += h;
                        let mut xm = x.clone();
                        xm[l] -= h;
                        let dp = self.eval_dginv(&xp);
                        let dm = self.eval_dginv(&xm);
                        (0..self.dim)
                            .map(|k| (&dp[k] - &dm[k]) / (2.0 * h))
                            .collect()
                    })
                    .collect()
            }
        }
    }

    pub fn sqrt_det_g(&self, x: &DVector<f64>) -> f64 {
        match &self.kind {
            MetricKind::Euclidean => 1.0,
            MetricKind::Conformal(phi) => ((self.dim as f64) * phi.eval(x)).exp(),
            MetricKind::Custom { g, .. } => g(x).determinant().max(0.0).sqrt(),
        }
    }

    /// Riemannian norm of a tangent vector.
    pub fn norm_tangent(&self, x: &DVector<f64>, v: &DVector<f64>) -> f64 {
        (v.dot(&(self.eval_g(x) * v))).max(0.0).sqrt()
    }

    /// First-order drift of the Laplace-Beltrami operator:
    /// `Delta_g f = g^{kl} d_k d_l f + b^l d_l f` with
    /// `b^l = d_k g^{kl} + g^{kl} d_k log sqrt(det g)`.
    pub fn lb_drift(&self, x: &DVector<f64>) -> DVector<f64> {
        let n = self.dim;
        if self.is_euclidean() {
            return DVector::zeros(n);
        }
        let ginv = self.eval_ginv(x);
        let dginv = self.eval_dginv(x);
        let g = self.eval_g(x);
        let dg = self.eval_dg(x);
        let g_inv_full = g.clone().try_inverse().unwrap_or_else(|| ginv.clone());
        let mut b = DVector::zeros(n);
        for l in 0..n {
            let mut v = 0.0;
            for k in 0..n {
                // d_k log sqrt(det g) = 1/2 tr(g^{-1} d_k g)
                let dlog = 0.5 * (&g_inv_full * &dg[k]).trace();
                v += dginv[k][(k, l)] + ginv[(k, l)] * dlog;
            }
            b[l] = v;
        }
        b
    }
}

fn central_diff_matrix<F: Fn(&DVector<f64>) -> DMatrix<f64>>(
    f: F,
    x: &DVector<f64>,
    h: f64,
) -> Vec<DMatrix<f64>> {
    (0..x.len())
        .map(|k| {
            let mut xp = x.clone();
            xp[k] += h;
            let mut xm = x.clone();
            xm[k] -= h;
            (f(&xp) - f(&xm)) / (2.0 * h)
        })
        .collect()
}

/// Christoffel symbols `Gamma^d_{ab} = 1/2 g^{de} (d_a g_{eb} + d_b g_{ae} - d_e g_{ab})`,
/// indexed `[d][(a,b)]`.
pub fn christoffel(metric: &MetricField, x: &DVector<f64>) -> Result<Vec<DMatrix<f64>>> {
    let n = metric.dim();
    let ginv = metric.eval_ginv(x);
    if ginv.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateMetric {
            at: x.iter().cloned().collect(),
            detail: "singular metric in christoffel".into(),
        });
    }
    let dg = metric.eval_dg(x);
    let mut out = vec![DMatrix::zeros(n, n); n];
    for d in 0..n {
        for a in 0..n {
            for b in 0..n {
                let mut s = 0.0;
                for e in 0..n {
                    s += ginv[(d, e)] * (dg[a][(e, b)] + dg[b][(a, e)] - dg[e][(a, b)]);
                }
                out[d][(a, b)] = 0.5 * s;
            }
        }
    }
    Ok(out)
}

/// Polar-form test metric `dr^2 + r^2 dtheta^2` on `(r, theta)` coordinates,
/// with analytic first derivatives.
pub fn polar_form_metric() -> MetricField {
    let g = Arc::new(|x: &DVector<f64>| {
        let r = x[0];
        DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, r * r]))
    });
    let dg = Arc::new(|x: &DVector<f64>| {
        let r = x[0];
        let mut d_r = DMatrix::zeros(2, 2);
        d_r[(1, 1)] = 2.0 * r;
        vec![d_r, DMatrix::zeros(2, 2)]
    });
    MetricField::custom_with_dg(2, 3, g, dg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn v(vals: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(vals)
    }

    #[test]
    fn euclidean_is_identity_with_zero_derivatives() {
        let m = MetricField::euclidean(3);
        let x = v(&[0.3, -1.2, 0.4]);
        assert_eq!(m.eval_g(&x), DMatrix::identity(3, 3));
        assert!(m.eval_dg(&x).iter().all(|d| d.amax() == 0.0));
        let gg = m.eval_ginv(&x) * m.eval_g(&x);
        assert!((gg - DMatrix::identity(3, 3)).amax() < 1e-12);
    }

    #[test]
    fn conformal_ginv_is_inverse() {
        let phi = SmoothScalar::trig_sum(
            2,
            vec![(0.3, v(&[1.0, 2.0]), 0.2), (0.1, v(&[2.0, -1.0]), 1.1)],
        );
        let m = MetricField::conformal(phi);
        let x = v(&[0.2, 0.7]);
        let prod = m.eval_ginv(&x) * m.eval_g(&x);
        assert!((prod - DMatrix::identity(2, 2)).amax() < 1e-12);
    }

    #[test]
    fn conformal_derivatives_match_finite_differences() {
        let phi = SmoothScalar::trig_sum(2, vec![(0.2, v(&[1.5, -0.5]), 0.3)]);
        let m = MetricField::conformal(phi.clone());
        let x = v(&[0.1, -0.2]);
        let h = 1e-5;
        for k in 0..2 {
            let mut xp = x.clone();
            xp[k] += h;
            let mut xm = x.clone();
            xm[k] -= h;
            let fd = (m.eval_g(&xp) - m.eval_g(&xm)) / (2.0 * h);
            assert!((fd - &m.eval_dg(&x)[k]).amax() < 1e-8);
            let fdi = (m.eval_ginv(&xp) - m.eval_ginv(&xm)) / (2.0 * h);
            assert!((fdi - &m.eval_dginv(&x)[k]).amax() < 1e-8);
        }
        // Second derivatives of g^{-1} against FD of the analytic first.
        let d2 = m.eval_d2ginv(&x);
        for l in 0..2 {
            let mut xp = x.clone();
            xp[l] += h;
            let mut xm = x.clone();
            xm[l] -= h;
            for k in 0..2 {
                let fd = (&m.eval_dginv(&xp)[k] - &m.eval_dginv(&xm)[k]) / (2.0 * h);
                assert!((fd - &d2[l][k]).amax() < 1e-7);
            }
        }
    }

    #[test]
    fn radial_bump_derivatives_match_finite_differences() {
        let phi = SmoothScalar::radial_bump(2, 1.5, 0.36, 0.2);
        let x = v(&[0.4, 0.35]);
        let h = 1e-6;
        let g = phi.grad(&x);
        let hess = phi.hess(&x);
        for i in 0..2 {
            let mut xp = x.clone();
            xp[i] += h;
            let mut xm = x.clone();
            xm[i] -= h;
            assert_abs_diff_eq!(
                g[i],
                (phi.eval(&xp) - phi.eval(&xm)) / (2.0 * h),
                epsilon = 1e-6
            );
            let gp = phi.grad(&xp);
            let gm = phi.grad(&xm);
            for j in 0..2 {
                assert_abs_diff_eq!(hess[(j, i)], (gp[j] - gm[j]) / (2.0 * h), epsilon = 1e-5);
            }
        }
    }

    #[test]
    fn christoffel_euclidean_vanishes() {
        let m = MetricField::euclidean(2);
        let gamma = christoffel(&m, &v(&[0.5, 0.5])).unwrap();
        assert!(gamma.iter().all(|g| g.amax() == 0.0));
    }

    #[test]
    fn christoffel_polar_form_oracle() {
        // dr^2 + r^2 dtheta^2 at r = 2: Gamma^r_tt = -2, Gamma^t_rt = 1/2.
        let m = polar_form_metric();
        let gamma = christoffel(&m, &v(&[2.0, 1.0])).unwrap();
        assert_abs_diff_eq!(gamma[0][(1, 1)], -2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(gamma[1][(0, 1)], 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(gamma[1][(1, 0)], 0.5, epsilon = 1e-9);
    }

    #[test]
    fn christoffel_conformal_oracle() {
        // g = e^{2 x_1} delta, n = 2, at x = 0:
        // Gamma^1_11 = 1, Gamma^1_22 = -1, Gamma^2_12 = 1.
        let phi = SmoothScalar::linear(v(&[1.0, 0.0]));
        let m = MetricField::conformal(phi);
        let gamma = christoffel(&m, &v(&[0.0, 0.0])).unwrap();
        assert_abs_diff_eq!(gamma[0][(0, 0)], 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(gamma[0][(1, 1)], -1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(gamma[1][(0, 1)], 1.0, epsilon = 1e-10);
        // Symmetry in the lower indices.
        for d in 0..2 {
            assert!((gamma[d].clone() - gamma[d].transpose()).amax() < 1e-12);
        }
    }

    #[test]
    fn degenerate_metric_is_an_error() {
        let g = Arc::new(|x: &DVector<f64>| {
            DMatrix::from_diagonal(&DVector::from_vec(vec![x[0], 1.0]))
        });
        let m = MetricField::custom(2, 3, g);
        assert!(m.eval_g_checked(&v(&[0.0, 0.0])).is_err());
        assert!(m.eval_g_checked(&v(&[1.0, 0.0])).is_ok());
    }
}
