//! Uniform grids, FFT helpers and small statistics shared by the transform
//! and wave modules.

use num_complex::Complex64 as C64;
use rustfft::FftPlanner;

/// A uniform 2-D grid with row-major samples (`data[iy * nx + ix]`).
#[derive(Clone, Debug)]
pub struct Grid2 {
    pub nx: usize,
    pub ny: usize,
    pub x0: f64,
    pub y0: f64,
    pub dx: f64,
    pub dy: f64,
    pub data: Vec<f64>,
}

impl Grid2 {
    pub fn new(nx: usize, ny: usize, x0: f64, y0: f64, dx: f64, dy: f64) -> Self {
        Self {
            nx,
            ny,
            x0,
            y0,
            dx,
            dy,
            data: vec![0.0; nx * ny],
        }
    }

    /// Square grid covering `[-half, half]^2` with `n` cells per axis,
    /// sampled at cell centers.
    pub fn centered_square(n: usize, half: f64) -> Self {
        let dx = 2.0 * half / n as f64;
        Self::new(n, n, -half + 0.5 * dx, -half + 0.5 * dx, dx, dx)
    }

    pub fn from_fn(mut self, f: impl Fn(f64, f64) -> f64) -> Self {
        for iy in 0..self.ny {
            let y = self.y0 + iy as f64 * self.dy;
            for ix in 0..self.nx {
                let x = self.x0 + ix as f64 * self.dx;
                self.data[iy * self.nx + ix] = f(x, y);
            }
        }
        self
    }

    pub fn x(&self, ix: usize) -> f64 {
        self.x0 + ix as f64 * self.dx
    }

    pub fn y(&self, iy: usize) -> f64 {
        self.y0 + iy as f64 * self.dy
    }

    pub fn at(&self, ix: usize, iy: usize) -> f64 {
        self.data[iy * self.nx + ix]
    }

    pub fn at_mut(&mut self, ix: usize, iy: usize) -> &mut f64 {
        &mut self.data[iy * self.nx + ix]
    }

    /// Bilinear interpolation; zero outside the grid.
    pub fn interp(&self, x: f64, y: f64) -> f64 {
        let fx = (x - self.x0) / self.dx;
        let fy = (y - self.y0) / self.dy;
        if fx < 0.0 || fy < 0.0 || fx > (self.nx - 1) as f64 || fy > (self.ny - 1) as f64 {
            return 0.0;
        }
        let ix = (fx as usize).min(self.nx - 2);
        let iy = (fy as usize).min(self.ny - 2);
        let wx = fx - ix as f64;
        let wy = fy - iy as f64;
        let v00 = self.at(ix, iy);
        let v10 = self.at(ix + 1, iy);
        let v01 = self.at(ix, iy + 1);
        let v11 = self.at(ix + 1, iy + 1);
        v00 * (1.0 - wx) * (1.0 - wy)
            + v10 * wx * (1.0 - wy)
            + v01 * (1.0 - wx) * wy
            + v11 * wx * wy
    }

    pub fn integral(&self) -> f64 {
        self.data.iter().sum::<f64>() * self.dx * self.dy
    }

    pub fn l2_norm(&self) -> f64 {
        (self.data.iter().map(|v| v * v).sum::<f64>() * self.dx * self.dy).sqrt()
    }

    pub fn scale(mut self, c: f64) -> Self {
        for v in &mut self.data {
            *v *= c;
        }
        self
    }

    /// Relative L2 distance `||a - b|| / ||b||`.
    pub fn rel_l2_error(&self, other: &Grid2) -> f64 {
        assert_eq!(self.data.len(), other.data.len());
        let mut num = 0.0;
        let mut den = 0.0;
        for (a, b) in self.data.iter().zip(&other.data) {
            num += (a - b) * (a - b);
            den += b * b;
        }
        (num / den.max(1e-300)).sqrt()
    }

    /// Binary export: `nx ny` (u64 LE), `x0 y0 dx dy` (f64 LE), then
    /// row-major samples.
    pub fn write_binary<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(&(self.nx as u64).to_le_bytes())?;
        w.write_all(&(self.ny as u64).to_le_bytes())?;
        for v in [self.x0, self.y0, self.dx, self.dy] {
            w.write_all(&v.to_le_bytes())?;
        }
        for v in &self.data {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }
}

/// A uniform 2-D grid of complex samples (row-major like [`Grid2`]).
#[derive(Clone, Debug)]
pub struct CGrid2 {
    pub nx: usize,
    pub ny: usize,
    pub x0: f64,
    pub y0: f64,
    pub dx: f64,
    pub dy: f64,
    pub data: Vec<C64>,
}

impl CGrid2 {
    pub fn new(nx: usize, ny: usize, x0: f64, y0: f64, dx: f64, dy: f64) -> Self {
        Self {
            nx,
            ny,
            x0,
            y0,
            dx,
            dy,
            data: vec![C64::new(0.0, 0.0); nx * ny],
        }
    }

    pub fn like(grid: &Grid2) -> Self {
        Self::new(grid.nx, grid.ny, grid.x0, grid.y0, grid.dx, grid.dy)
    }

    pub fn x(&self, ix: usize) -> f64 {
        self.x0 + ix as f64 * self.dx
    }

    pub fn y(&self, iy: usize) -> f64 {
        self.y0 + iy as f64 * self.dy
    }

    pub fn at(&self, ix: usize, iy: usize) -> C64 {
        self.data[iy * self.nx + ix]
    }

    pub fn at_mut(&mut self, ix: usize, iy: usize) -> &mut C64 {
        &mut self.data[iy * self.nx + ix]
    }

    pub fn l2_norm(&self) -> f64 {
        (self.data.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.dx * self.dy).sqrt()
    }
}

/// In-place 1-D FFT (unnormalized forward; inverse divides by `n`).
pub fn fft_1d(data: &mut [C64], inverse: bool) {
    let n = data.len();
    let mut planner = FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    fft.process(data);
    if inverse {
        let scale = 1.0 / n as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }
}

/// In-place 2-D FFT on row-major data.
pub fn fft_2d(data: &mut [C64], nx: usize, ny: usize, inverse: bool) {
    assert_eq!(data.len(), nx * ny);
    let mut planner = FftPlanner::new();
    let fx = if inverse {
        planner.plan_fft_inverse(nx)
    } else {
        planner.plan_fft_forward(nx)
    };
    let fy = if inverse {
        planner.plan_fft_inverse(ny)
    } else {
        planner.plan_fft_forward(ny)
    };
    for row in data.chunks_mut(nx) {
        fx.process(row);
    }
    let mut col = vec![C64::new(0.0, 0.0); ny];
    for ix in 0..nx {
        for iy in 0..ny {
            col[iy] = data[iy * nx + ix];
        }
        fy.process(&mut col);
        for iy in 0..ny {
            data[iy * nx + ix] = col[iy];
        }
    }
    if inverse {
        let scale = 1.0 / (nx * ny) as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }
}

/// Angular frequencies `2 pi k / (n d)` in FFT ordering.
pub fn fft_freqs(n: usize, d: f64) -> Vec<f64> {
    let base = std::f64::consts::TAU / (n as f64 * d);
    (0..n)
        .map(|k| {
            let k = if k <= n / 2 {
                k as f64
            } else {
                k as f64 - n as f64
            };
            base * k
        })
        .collect()
}

/// Least-squares slope of `ys` against `xs`.
pub fn linear_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|v| v * v).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(a, b)| a * b).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Log-log slope of `values` against `scales` (both positive).
pub fn loglog_slope(scales: &[f64], values: &[f64]) -> f64 {
    let xs: Vec<f64> = scales.iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.max(1e-300).ln()).collect();
    linear_slope(&xs, &ys)
}

/// Composite Simpson weights for `n + 1` uniformly spaced nodes (`n` even).
pub fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    assert!(n >= 2 && n.is_multiple_of(2));
    let mut w = vec![0.0; n + 1];
    for (i, wi) in w.iter_mut().enumerate() {
        *wi = if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        } * h
            / 3.0;
    }
    w
}
