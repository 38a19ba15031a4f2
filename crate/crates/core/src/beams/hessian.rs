//! Second derivatives of the Hamiltonian along a ray.

use nalgebra::{DMatrix, DVector};

use crate::geometry::MetricField;

/// The matrices `D = H_xx`, `B = H_xp`, `C = H_pp` of
/// `H = 1/2 g^{ij}(x) p_i p_j`, evaluated at a phase point.
#[derive(Clone, Debug)]
pub struct HessianTriple {
    /// `D_ij = H_{x^i x^j}`, symmetric.
    pub d: DMatrix<f64>,
    /// `B_ij = H_{x^i p_j}`.
    pub b: DMatrix<f64>,
    /// `C^{ij} = H_{p_i p_j} = g^{ij}`, symmetric positive definite.
    pub c: DMatrix<f64>,
}

/// Evaluate the Hessian triple; metric derivatives are analytic where the
/// metric provides them and central differences otherwise.
pub fn hessian_matrices(metric: &MetricField, x: &DVector<f64>, p: &DVector<f64>) -> HessianTriple {
    hessian_with_dginv(metric, x, p).0
}

/// As [`hessian_matrices`], also handing back `d_k g^{ij}` so flow right-hand
/// sides do not evaluate the metric derivatives twice.
pub fn hessian_with_dginv(
    metric: &MetricField,
    x: &DVector<f64>,
    p: &DVector<f64>,
) -> (HessianTriple, Vec<DMatrix<f64>>) {
    let n = metric.dim();
    let c = metric.eval_ginv(x);
    let dginv = metric.eval_dginv(x);
    let d2ginv = metric.eval_d2ginv(x);

    let mut b = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            b[(i, j)] = (&dginv[i] * p)[j];
        }
    }

    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            d[(i, j)] = 0.5 * p.dot(&(&d2ginv[i][j] * p));
        }
    }
    // Symmetrize against FD noise.
    let d = (&d + d.transpose()) * 0.5;

    (HessianTriple { d, b, c }, dginv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SmoothScalar;
    use approx::assert_abs_diff_eq;

    fn v(vals: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(vals)
    }

    #[test]
    fn euclidean_triple() {
        let m = MetricField::euclidean(2);
        let t = hessian_matrices(&m, &v(&[0.4, -0.3]), &v(&[1.0, 2.0]));
        assert_eq!(t.d.amax(), 0.0);
        assert_eq!(t.b.amax(), 0.0);
        assert!((t.c - DMatrix::identity(2, 2)).amax() < 1e-15);
    }

    #[test]
    fn conformal_1d_symbolic_oracle() {
        // H = 1/2 e^{-2x} p^2: C = e^{-2x}, B = H_xp = -2 e^{-2x} p,
        // D = H_xx = 2 e^{-2x} p^2. At x = 0, p = 1: C = 1, B = -2, D = 2.
        let phi = SmoothScalar::linear(v(&[1.0]));
        let m = MetricField::conformal(phi);
        let t = hessian_matrices(&m, &v(&[0.0]), &v(&[1.0]));
        assert_abs_diff_eq!(t.c[(0, 0)], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(t.b[(0, 0)], -2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(t.d[(0, 0)], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn c_is_symmetric() {
        let phi = SmoothScalar::trig_sum(2, vec![(0.3, v(&[1.0, -1.0]), 0.4)]);
        let m = MetricField::conformal(phi);
        let t = hessian_matrices(&m, &v(&[0.2, 0.1]), &v(&[0.5, 1.5]));
        assert_eq!((t.c.clone() - t.c.transpose()).amax(), 0.0);
        assert!((t.d.clone() - t.d.transpose()).amax() < 1e-12);
    }
}
