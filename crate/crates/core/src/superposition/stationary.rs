//! Non-stationary phase decay: `I(lambda) = int exp(-pi i lambda phi) a v dx`
//! decays faster than any power when `grad phi` does not vanish on the
//! support of `v`.

use nalgebra::DVector;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::grid::loglog_slope;

pub struct DecayReport {
    pub lambdas: Vec<f64>,
    pub magnitudes: Vec<f64>,
    /// Fitted decay order `N` in `|I| ~ lambda^{-N}`.
    pub fitted_order: f64,
    pub min_gradient: f64,
}

/// Quadrature evaluation of `I(lambda)` on a tensor grid over `[lo, hi]^dim`,
/// after verifying `grad phi != 0` on the support of `v` by grid
/// minimization.
#[allow(clippy::too_many_arguments)]
pub fn stationary_phase_decay(
    phi: &dyn Fn(&DVector<f64>) -> f64,
    amp: &dyn Fn(&DVector<f64>) -> f64,
    v: &dyn Fn(&DVector<f64>) -> f64,
    dim: usize,
    lo: f64,
    hi: f64,
    per_axis: usize,
    lambdas: &[f64],
) -> Result<DecayReport> {
    let dx = (hi - lo) / per_axis as f64;
    let cell = dx.powi(dim as i32);
    let mut nodes = Vec::new();
    let mut idx = vec![0usize; dim];
    loop {
        nodes.push(DVector::from_fn(dim, |d, _| {
            lo + (idx[d] as f64 + 0.5) * dx
        }));
        let mut d = 0;
        loop {
            if d == dim {
                break;
            }
            idx[d] += 1;
            if idx[d] < per_axis {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
        if d == dim {
            break;
        }
    }

    // Precondition: grad phi bounded away from zero on supp v, judged
    // relative to its typical size there.
    let fd = 1e-6;
    let mut min_grad = f64::INFINITY;
    let mut max_grad: f64 = 0.0;
    for x in &nodes {
        if v(x).abs() < 1e-14 {
            continue;
        }
        let mut g2 = 0.0;
        for d in 0..dim {
            let mut xp = x.clone();
            xp[d] += fd;
            let mut xm = x.clone();
            xm[d] -= fd;
            let der = (phi(&xp) - phi(&xm)) / (2.0 * fd);
            g2 += der * der;
        }
        min_grad = min_grad.min(g2.sqrt());
        max_grad = max_grad.max(g2.sqrt());
    }
    if !(min_grad > 0.01 * max_grad) {
        return Err(Error::VanishingGradient { min_grad });
    }

    let mut magnitudes = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let mut acc = C64::new(0.0, 0.0);
        for x in &nodes {
            let weight = amp(x) * v(x);
            if weight == 0.0 {
                continue;
            }
            acc += C64::from_polar(weight, -std::f64::consts::PI * lambda * phi(x));
        }
        magnitudes.push((acc * C64::new(cell, 0.0)).norm());
    }
    let fitted_order = -loglog_slope(lambdas, &magnitudes);
    Ok(DecayReport {
        lambdas: lambdas.to_vec(),
        magnitudes,
        fitted_order,
        min_gradient: min_grad,
    })
}
