//! Riesz potentials `X^alpha`: Fourier multipliers `|xi|^{-alpha}`.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::grid::{fft_1d, fft_2d, fft_freqs, Grid2};

/// Multiplier table for a 2-D periodic grid.
#[derive(Clone, Debug)]
pub struct RieszFilter {
    pub order: f64,
    pub nx: usize,
    pub ny: usize,
    pub multiplier: Vec<f64>,
}

impl RieszFilter {
    /// Build for a grid with spacings `dx, dy`; `order < n = 2` required.
    /// The zero-frequency entry is set to 0 (the mean is projected out).
    pub fn new(order: f64, nx: usize, ny: usize, dx: f64, dy: f64) -> Result<Self> {
        if order >= 2.0 {
            return Err(Error::InvalidParameter {
                name: "order",
                detail: format!("Riesz order must be < n = 2, got {order}"),
            });
        }
        let fx = fft_freqs(nx, dx);
        let fy = fft_freqs(ny, dy);
        let mut multiplier = vec![0.0; nx * ny];
        for (iy, ky) in fy.iter().enumerate() {
            for (ix, kx) in fx.iter().enumerate() {
                let k = (kx * kx + ky * ky).sqrt();
                multiplier[iy * nx + ix] = if k > 0.0 { k.powf(-order) } else { 0.0 };
            }
        }
        Ok(Self {
            order,
            nx,
            ny,
            multiplier,
        })
    }

    /// Apply to a real grid (the grid is treated as periodic).
    pub fn apply(&self, u: &Grid2) -> Grid2 {
        assert_eq!((u.nx, u.ny), (self.nx, self.ny));
        let mut buf: Vec<C64> = u.data.iter().map(|v| C64::new(*v, 0.0)).collect();
        fft_2d(&mut buf, self.nx, self.ny, false);
        for (b, m) in buf.iter_mut().zip(&self.multiplier) {
            *b *= *m;
        }
        fft_2d(&mut buf, self.nx, self.ny, true);
        let mut out = u.clone();
        for (o, b) in out.data.iter_mut().zip(&buf) {
            *o = b.re;
        }
        out
    }
}

/// 1-D Riesz filter `|eta|^{-order}` applied along a sample row (periodic).
pub fn riesz_1d(values: &mut [f64], ds: f64, order: f64) {
    let n = values.len();
    let freqs = fft_freqs(n, ds);
    let mut buf: Vec<C64> = values.iter().map(|v| C64::new(*v, 0.0)).collect();
    fft_1d(&mut buf, false);
    for (b, k) in buf.iter_mut().zip(&freqs) {
        let a = k.abs();
        *b *= if a > 0.0 { a.powf(-order) } else { 0.0 };
    }
    fft_1d(&mut buf, true);
    for (v, b) in values.iter_mut().zip(&buf) {
        *v = b.re;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_zero_is_identity_modulo_mean() {
        // X^0 keeps everything except the projected-out mean; on mean-zero
        // data it is the identity to transform round-trip accuracy.
        let g = Grid2::centered_square(32, 1.0)
            .from_fn(|x, y| (std::f64::consts::PI * x).sin() * (std::f64::consts::PI * y).cos());
        let filter = RieszFilter::new(0.0, 32, 32, g.dx, g.dy).unwrap();
        let out = filter.apply(&g);
        let mean = g.data.iter().sum::<f64>() / g.data.len() as f64;
        for (a, b) in out.data.iter().zip(&g.data) {
            assert!((a - (b - mean)).abs() < 1e-12);
        }
    }

    #[test]
    fn multiplier_inverse_roundtrip() {
        // X^{-1} X^{1} u = u on mean-zero u.
        let n = 64;
        let g = Grid2::centered_square(n, 1.0).from_fn(|x, y| {
            (2.0 * std::f64::consts::PI * x).sin() + (4.0 * std::f64::consts::PI * y).sin()
        });
        let f1 = RieszFilter::new(1.0, n, n, g.dx, g.dy).unwrap();
        let fm1 = RieszFilter::new(-1.0, n, n, g.dx, g.dy).unwrap();
        let round = fm1.apply(&f1.apply(&g));
        for (a, b) in round.data.iter().zip(&g.data) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn eigenfunction_scaling() {
        // X^1 of a pure frequency is |xi|^{-1} times it.
        let n = 64;
        let k = 3.0 * std::f64::consts::PI; // grid mode: 3 cycles over [-1,1]
        let g = Grid2::centered_square(n, 1.0).from_fn(|x, _| (k * x).cos());
        let f1 = RieszFilter::new(1.0, n, n, g.dx, g.dy).unwrap();
        let out = f1.apply(&g);
        for (a, b) in out.data.iter().zip(&g.data) {
            assert!((a - b / k).abs() < 1e-10);
        }
    }

    #[test]
    fn order_at_dimension_rejected() {
        assert!(RieszFilter::new(2.0, 16, 16, 0.1, 0.1).is_err());
        assert!(RieszFilter::new(2.5, 16, 16, 0.1, 0.1).is_err());
    }
}
