//! Euclidean X-ray transform `P` and its dual `P*` in the plane.

use crate::grid::Grid2;

use super::sinogram::{direction, perp, Sinogram, SinogramGeometry};

/// Forward transform by composite Simpson along each line.
///
/// `half_length` bounds the integration segment, `step` the quadrature step
/// (the segment is subdivided to an even count). A support warning is set on
/// the sinogram when the integrand is non-negligible outside the unit ball.
pub fn xray_forward_euclid(
    f: &dyn Fn(f64, f64) -> f64,
    thetas: &[f64],
    offsets: &[f64],
    half_length: f64,
    step: f64,
) -> Sinogram {
    let m = ((2.0 * half_length / step).ceil() as usize)
        .max(2)
        .next_multiple_of(2);
    let h = 2.0 * half_length / m as f64;
    let mut values = Vec::with_capacity(thetas.len() * offsets.len());
    let mut warning = false;
    for &theta in thetas {
        let e = direction(theta);
        let ep = perp(theta);
        for &s in offsets {
            let mut acc = 0.0;
            for i in 0..=m {
                let t = -half_length + i as f64 * h;
                let x = s * ep.0 + t * e.0;
                let y = s * ep.1 + t * e.1;
                let v = f(x, y);
                if !warning && v.abs() > 1e-12 && x * x + y * y > 1.0 + 1e-9 {
                    warning = true;
                }
                let w = if i == 0 || i == m {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                acc += w * v;
            }
            values.push(acc * h / 3.0);
        }
    }
    Sinogram {
        geometry: SinogramGeometry::Parallel {
            thetas: thetas.to_vec(),
            offsets: offsets.to_vec(),
        },
        values,
        support_warning: warning,
    }
}

/// Dual operator `P* g(x) = int_Theta g(theta, x . e_perp(theta)) dtheta`
/// over the sinogram's own direction grid, sampled onto `grid`.
pub fn adjoint_p(sino: &Sinogram, grid: &Grid2) -> Grid2 {
    let (thetas, offsets) = match &sino.geometry {
        SinogramGeometry::Parallel { thetas, offsets } => (thetas, offsets),
        _ => panic!("parallel geometry required"),
    };
    let n_s = offsets.len();
    let s0 = offsets[0];
    let ds = offsets[1] - offsets[0];
    let dtheta = std::f64::consts::TAU / thetas.len() as f64;
    let mut out = grid.clone();
    for v in &mut out.data {
        *v = 0.0;
    }
    for (i, &theta) in thetas.iter().enumerate() {
        let ep = perp(theta);
        for iy in 0..grid.ny {
            let y = grid.y(iy);
            for ix in 0..grid.nx {
                let x = grid.x(ix);
                let s = x * ep.0 + y * ep.1;
                let fs = (s - s0) / ds;
                if fs < 0.0 || fs > (n_s - 1) as f64 {
                    continue;
                }
                let j = (fs as usize).min(n_s - 2);
                let w = fs - j as f64;
                let val = sino.values[i * n_s + j] * (1.0 - w) + sino.values[i * n_s + j + 1] * w;
                *out.at_mut(ix, iy) += val * dtheta;
            }
        }
    }
    out
}

/// `<P f, g>_T` over the sinogram grid (measure `dtheta ds`).
pub fn pairing_t(a: &Sinogram, b: &Sinogram) -> f64 {
    let (thetas, offsets) = match &a.geometry {
        SinogramGeometry::Parallel { thetas, offsets } => (thetas, offsets),
        _ => panic!("parallel geometry required"),
    };
    let ds = offsets[1] - offsets[0];
    let dtheta = std::f64::consts::TAU / thetas.len() as f64;
    a.values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| x * y)
        .sum::<f64>()
        * ds
        * dtheta
}
