//! Sinogram containers for the parallel Euclidean and boundary-fan
//! (manifold) geometries.

use nalgebra::DVector;

/// Line parametrisation for the parallel geometry: direction
/// `e(theta) = (cos, sin)`, offset along `e_perp(theta) = (-sin, cos)`;
/// the line is `{ s e_perp + t e }`.
#[derive(Clone, Debug)]
pub enum SinogramGeometry {
    Parallel {
        thetas: Vec<f64>,
        offsets: Vec<f64>,
    },
    /// Inward boundary entries `(x, omega)` with weight `mu = |<omega, nu>|`.
    BoundaryFan {
        entries: Vec<(DVector<f64>, DVector<f64>)>,
        weights: Vec<f64>,
    },
}

#[derive(Clone, Debug)]
pub struct Sinogram {
    pub geometry: SinogramGeometry,
    /// Parallel layout: `values[i_theta * n_offsets + i_s]`.
    pub values: Vec<f64>,
    /// Set when the integrand was non-negligible outside the unit ball.
    pub support_warning: bool,
}

impl Sinogram {
    pub fn n_dirs(&self) -> usize {
        match &self.geometry {
            SinogramGeometry::Parallel { thetas, .. } => thetas.len(),
            SinogramGeometry::BoundaryFan { entries, .. } => entries.len(),
        }
    }

    pub fn parallel_dims(&self) -> (usize, usize) {
        match &self.geometry {
            SinogramGeometry::Parallel { thetas, offsets } => (thetas.len(), offsets.len()),
            _ => panic!("parallel geometry required"),
        }
    }

    pub fn at(&self, i_theta: usize, i_s: usize) -> f64 {
        let (_, n_s) = self.parallel_dims();
        self.values[i_theta * n_s + i_s]
    }

    /// CSV export `theta,s,value` (parallel) or `entry,value` (fan).
    pub fn to_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        match &self.geometry {
            SinogramGeometry::Parallel { thetas, offsets } => {
                writeln!(w, "theta,s,value")?;
                for (i, th) in thetas.iter().enumerate() {
                    for (j, s) in offsets.iter().enumerate() {
                        writeln!(w, "{th},{s},{}", self.values[i * offsets.len() + j])?;
                    }
                }
            }
            SinogramGeometry::BoundaryFan { entries, weights } => {
                writeln!(w, "entry,weight,value")?;
                for (i, _) in entries.iter().enumerate() {
                    writeln!(w, "{i},{},{}", weights[i], self.values[i])?;
                }
            }
        }
        Ok(())
    }
}

/// Uniform full-circle direction grid.
pub fn theta_grid(n_dirs: usize) -> Vec<f64> {
    (0..n_dirs)
        .map(|i| std::f64::consts::TAU * i as f64 / n_dirs as f64)
        .collect()
}

/// Uniform offset grid on `[-half, half]` with `n` samples.
pub fn offset_grid(n: usize, half: f64) -> Vec<f64> {
    (0..n)
        .map(|i| -half + 2.0 * half * i as f64 / (n - 1) as f64)
        .collect()
}

pub fn direction(theta: f64) -> (f64, f64) {
    (theta.cos(), theta.sin())
}

pub fn perp(theta: f64) -> (f64, f64) {
    (-theta.sin(), theta.cos())
}
