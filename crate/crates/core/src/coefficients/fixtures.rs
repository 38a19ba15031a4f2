//! Named coefficient fixtures used across experiments and tests.
//!
//! All fixtures are dimension parametric through the diagonal coordinate
//! `s(x) = x_1 + ... + x_n`, so the 1-D profiles below drive every dimension.

use std::sync::Arc;

use nalgebra::DVector;

use super::{CoefficientField, RegularityClass};

fn diag(x: &DVector<f64>) -> f64 {
    x.iter().sum()
}

/// `alpha = c`.
pub fn constant(dim: usize, c: f64) -> CoefficientField {
    let _ = dim;
    CoefficientField::new(
        format!("constant({c})"),
        Arc::new(move |_| c),
        RegularityClass::Lipschitz,
        (c, c),
    )
}

/// Smooth Gaussian bump `1 + 1/2 exp(-|s - 1/2|^2 / 0.02)`.
pub fn bump(dim: usize) -> CoefficientField {
    let _ = dim;
    CoefficientField::new(
        "bump",
        Arc::new(move |x: &DVector<f64>| {
            let u = diag(x) - 0.5;
            1.0 + 0.5 * (-u * u / 0.02).exp()
        }),
        RegularityClass::Lipschitz,
        (1.0, 1.5),
    )
}

/// Piecewise-linear hat `1 + 1/2 max(0, 1 - 2|s - 1/2|)`.
pub fn hat(dim: usize) -> CoefficientField {
    let _ = dim;
    CoefficientField::new(
        "hat",
        Arc::new(move |x: &DVector<f64>| {
            let u = (diag(x) - 0.5).abs();
            1.0 + 0.5 * (1.0 - 2.0 * u).max(0.0)
        }),
        RegularityClass::Lipschitz,
        (1.0, 1.5),
    )
}

/// The Weierstrass-type profile `W(s) = sum_{j=1}^{16} 2^{-j} cos(2^j pi s)`:
/// Zygmund continuous but nowhere Lipschitz in the limit.
pub fn weierstrass_profile(s: f64) -> f64 {
    (1..=16)
        .map(|j| 2f64.powi(-j) * (2f64.powi(j) * std::f64::consts::PI * s).cos())
        .sum()
}

/// `alpha = 1 + c W(s)` with `|W| < 1`; `c` controls the contrast.
pub fn weierstrass(dim: usize, c: f64) -> CoefficientField {
    let _ = dim;
    assert!(c.abs() < 1.0);
    CoefficientField::new(
        format!("weierstrass({c})"),
        Arc::new(move |x: &DVector<f64>| 1.0 + c * weierstrass_profile(diag(x))),
        RegularityClass::Zygmund,
        (1.0 - c.abs(), 1.0 + c.abs()),
    )
}

/// Log-Lipschitz fixture `1 + |u| log(1/|u|)`, `u = s - 1/2`, extended evenly.
/// The profile peaks at `u = 1/e` with value `1/e`.
pub fn xlog(dim: usize) -> CoefficientField {
    let _ = dim;
    CoefficientField::new(
        "xlog",
        Arc::new(move |x: &DVector<f64>| {
            let u = (diag(x) - 0.5).abs();
            if u < 1e-300 {
                1.0
            } else {
                1.0 + u * (1.0 / u).ln()
            }
        }),
        RegularityClass::LogLipschitz,
        (1.0, 1.0 + (-1.0f64).exp()),
    )
}

/// Hölder-1/2 fixture `1/2 + |s - 1/2|^{1/2}`.
pub fn holder_half(dim: usize) -> CoefficientField {
    let _ = dim;
    CoefficientField::new(
        "holder_half",
        Arc::new(move |x: &DVector<f64>| 0.5 + (diag(x) - 0.5).abs().sqrt()),
        RegularityClass::Holder(0.5),
        (0.5, 0.5 + 0.5f64.sqrt()),
    )
}

/// Fixture with sign-indefinite `grad(x alpha(x))` on a wide domain.
pub fn antimonotone(dim: usize) -> CoefficientField {
    let _ = dim;
    CoefficientField::new(
        "antimonotone",
        Arc::new(move |x: &DVector<f64>| 1.0 / (1.0 + diag(x) * diag(x))),
        RegularityClass::Lipschitz,
        (0.05, 1.0),
    )
}

/// Strongly sign-indefinite fixture: `d(s alpha)/ds = alpha + s alpha'`
/// swings through +-O(1) on `s in [1, 3]` while alpha stays hyperbolic.
pub fn sign_indefinite(dim: usize) -> CoefficientField {
    let _ = dim;
    CoefficientField::new(
        "sign_indefinite",
        Arc::new(move |x: &DVector<f64>| 1.0 + 0.45 * (3.0 * diag(x)).sin()),
        RegularityClass::Lipschitz,
        (0.55, 1.45),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds_hold_on_dense_grid() {
        for field in [
            constant(1, 1.0),
            bump(1),
            hat(1),
            weierstrass(1, 0.45),
            xlog(1),
            holder_half(1),
        ] {
            let samples: Vec<DVector<f64>> = (0..=1000)
                .map(|i| DVector::from_vec(vec![i as f64 / 1000.0]))
                .collect();
            assert!(
                field.check_hyperbolicity(&samples),
                "{} out of bounds",
                field.name
            );
        }
    }

    #[test]
    fn weierstrass_profile_bounded_by_one() {
        for i in 0..2000 {
            let s = i as f64 / 1000.0 - 0.5;
            assert!(weierstrass_profile(s).abs() < 1.0);
        }
    }
}
