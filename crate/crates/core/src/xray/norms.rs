//! Sobolev norms on the sinogram cylinder `T`.

use num_complex::Complex64 as C64;

use crate::grid::{fft_1d, fft_freqs};

use super::sinogram::{Sinogram, SinogramGeometry};

/// `||g||_{H^{a0}(T)} = (int int (1 + |eta|^2)^{a0} |ghat(theta, eta)|^2
/// deta dtheta)^{1/2}` with the unitary 1-D Fourier transform in the offset
/// variable.
pub fn sinogram_sobolev_norm(sino: &Sinogram, a0: f64) -> f64 {
    let (thetas, offsets) = match &sino.geometry {
        SinogramGeometry::Parallel { thetas, offsets } => (thetas, offsets),
        _ => panic!("parallel geometry required"),
    };
    let n_s = offsets.len();
    let ds = offsets[1] - offsets[0];
    let dtheta = std::f64::consts::TAU / thetas.len() as f64;
    let freqs = fft_freqs(n_s, ds);
    let deta = std::f64::consts::TAU / (n_s as f64 * ds);
    let fourier_norm = 1.0 / std::f64::consts::TAU.sqrt();

    let mut total = 0.0;
    let mut buf = vec![C64::new(0.0, 0.0); n_s];
    for i in 0..thetas.len() {
        for (j, b) in buf.iter_mut().enumerate() {
            *b = C64::new(sino.values[i * n_s + j], 0.0);
        }
        fft_1d(&mut buf, false);
        for (k, b) in freqs.iter().zip(&buf) {
            let ghat = b * ds * fourier_norm;
            total += (1.0 + k * k).powf(a0) * ghat.norm_sqr() * deta * dtheta;
        }
    }
    total.sqrt()
}
