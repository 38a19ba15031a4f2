//! The superposition operator `Q`, the normal operator `Q*Q`, the modified
//! normal operator with coefficient-dependent phase, and the phase
//! diagnostics backing them.

use nalgebra::DVector;
use num_complex::Complex64 as C64;

use crate::coefficients::CoefficientField;
use crate::error::{Error, Result};

use super::family::BeamFamily;

/// Tensor evaluation grid covering the family's beam supports at one time.
#[derive(Clone, Debug)]
pub struct YGrid {
    pub nodes: Vec<DVector<f64>>,
    pub cell: f64,
    pub spacing: f64,
}

/// Build an evaluation grid at time `t` with the given spacing (must resolve
/// the Gaussian scale `sqrt(h)/8`).
pub fn y_grid_for(family: &BeamFamily, t: f64, spacing: Option<f64>) -> Result<YGrid> {
    let h = family.h;
    let dx = spacing.unwrap_or(h.sqrt() / 8.0);
    if dx > h.sqrt() / 8.0 + 1e-15 {
        return Err(Error::Resolution {
            detail: format!("y spacing {dx} exceeds sqrt(h)/8 = {}", h.sqrt() / 8.0),
        });
    }
    let n = family.dim();
    let pad = family.beams[0].cutoff.outer_radius + dx;
    let positions = family.positions_at(t);
    let mut lo = positions[0].clone();
    let mut hi = positions[0].clone();
    for x in &positions {
        for d in 0..n {
            lo[d] = lo[d].min(x[d]);
            hi[d] = hi[d].max(x[d]);
        }
    }
    for d in 0..n {
        lo[d] -= pad;
        hi[d] += pad;
    }
    let mut nodes = Vec::new();
    let counts: Vec<usize> = (0..n)
        .map(|d| ((hi[d] - lo[d]) / dx).ceil() as usize + 1)
        .collect();
    let mut idx = vec![0usize; n];
    loop {
        nodes.push(DVector::from_fn(n, |d, _| lo[d] + idx[d] as f64 * dx));
        let mut d = 0;
        loop {
            if d == n {
                break;
            }
            idx[d] += 1;
            if idx[d] < counts[d] {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
        if d == n {
            break;
        }
    }
    Ok(YGrid {
        nodes,
        cell: dx.powi(n as i32),
        spacing: dx,
    })
}

fn q_norm(family: &BeamFamily) -> f64 {
    let n = family.dim() as f64;
    (std::f64::consts::TAU * family.h).powf(-n / 2.0)
}

/// `(Q w)(t, y) = (2 pi h)^{-n/2} sum_z wgt(z) w(z) g(t,y,z) e^{i psi/h}`.
///
/// The `(2 pi)^{-n/2}` factor normalizes `Q` so that `||Qf|| / ||f|| -> 1`.
/// Beams that have exited their domain fade through the temporal cutoff
/// rather than freezing at the boundary.
pub fn apply_q(family: &BeamFamily, w: &[C64], t: f64, y: &DVector<f64>) -> C64 {
    let norm = q_norm(family);
    let mut acc = C64::new(0.0, 0.0);
    for ((beam, wz), wgt) in family.beams.iter().zip(w).zip(&family.k_grid.weights) {
        if wz.norm_sqr() == 0.0 {
            continue;
        }
        let chi_t = beam.cutoff.chi_time(t);
        if chi_t == 0.0 {
            continue;
        }
        let st = beam.state_at(t.min(beam.duration()));
        acc += beam.evaluate_with_state(&st, y) * wz * C64::new(*wgt * chi_t, 0.0);
    }
    acc * C64::new(norm, 0.0)
}

/// Pass 1 of the normal operator: the superposed field on the y-grid.
fn q_field(family: &BeamFamily, w: &[C64], t: f64, grid: &YGrid) -> Vec<C64> {
    let norm = q_norm(family);
    let mut field = vec![C64::new(0.0, 0.0); grid.nodes.len()];
    // Per-beam loop with a support-box test keeps the cost near the support
    // volume rather than the full grid.
    for ((beam, wz), wgt) in family.beams.iter().zip(w).zip(&family.k_grid.weights) {
        if wz.norm_sqr() == 0.0 {
            continue;
        }
        let chi_t = beam.cutoff.chi_time(t);
        if chi_t == 0.0 {
            continue;
        }
        let st = beam.state_at(t.min(beam.duration()));
        let r = beam.cutoff.outer_radius;
        let coeff = wz * C64::new(wgt * norm * chi_t, 0.0);
        for (i, y) in grid.nodes.iter().enumerate() {
            let mut inside = true;
            for d in 0..y.len() {
                if (y[d] - st.x[d]).abs() > r {
                    inside = false;
                    break;
                }
            }
            if inside {
                field[i] += beam.evaluate_with_state(&st, y) * coeff;
            }
        }
    }
    field
}

/// Values of a normal-operator application on the launch nodes.
#[derive(Clone, Debug)]
pub struct NormalOperatorSample {
    pub t: f64,
    pub values: Vec<C64>,
    pub epsilon: Option<f64>,
    pub h: f64,
}

impl NormalOperatorSample {
    pub fn to_csv<W: std::io::Write>(
        &self,
        nodes: &[DVector<f64>],
        mut w: W,
    ) -> std::io::Result<()> {
        writeln!(w, "z,re,im")?;
        for (z, v) in nodes.iter().zip(&self.values) {
            let zs: Vec<String> = z.iter().map(|c| c.to_string()).collect();
            writeln!(w, "{},{},{}", zs.join(";"), v.re, v.im)?;
        }
        Ok(())
    }
}

/// `Q*Q f(t, z)` for data values `f` on the launch nodes, via the two-pass
/// factorization of the double integral.
pub fn apply_qstarq(
    family: &BeamFamily,
    f_vals: &[C64],
    t: f64,
    spacing: Option<f64>,
) -> Result<NormalOperatorSample> {
    let grid = y_grid_for(family, t, spacing)?;
    let field = q_field(family, f_vals, t, &grid);
    let values = qstar_of_field(family, &field, t, &grid, None);
    Ok(NormalOperatorSample {
        t,
        values,
        epsilon: None,
        h: family.h,
    })
}

/// The modified normal operator: the kernel gains the separable phase
/// `exp(i h^{-eps} u . (alpha(z) x(t,z) - alpha(z') x(t,z')))`.
pub fn apply_modified_normal(
    family: &BeamFamily,
    f_vals: &[C64],
    alpha: &CoefficientField,
    t: f64,
    epsilon: f64,
    u: &DVector<f64>,
    spacing: Option<f64>,
) -> Result<NormalOperatorSample> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter {
            name: "epsilon",
            detail: format!("need epsilon in (0,1), got {epsilon}"),
        });
    }
    let scale = family.h.powf(-epsilon);
    let positions = family.positions_at(t);
    // Attach e^{-i h^{-eps} u . alpha(z') x(t,z')} to the data side.
    let modified: Vec<C64> = f_vals
        .iter()
        .zip(family.k_grid.nodes.iter())
        .zip(&positions)
        .map(|((f, z), x)| f * C64::from_polar(1.0, -scale * alpha.eval(z) * u.dot(x)))
        .collect();
    let grid = y_grid_for(family, t, spacing)?;
    let field = q_field(family, &modified, t, &grid);
    let values = qstar_of_field(
        family,
        &field,
        t,
        &grid,
        Some((alpha, scale, u, &positions)),
    );
    Ok(NormalOperatorSample {
        t,
        values,
        epsilon: Some(epsilon),
        h: family.h,
    })
}

type PhaseModifier<'a> = (
    &'a CoefficientField,
    f64,
    &'a DVector<f64>,
    &'a Vec<DVector<f64>>,
);

fn qstar_of_field(
    family: &BeamFamily,
    field: &[C64],
    t: f64,
    grid: &YGrid,
    modifier: Option<PhaseModifier<'_>>,
) -> Vec<C64> {
    let norm = q_norm(family);
    let mut out = vec![C64::new(0.0, 0.0); family.k_grid.len()];
    for (iz, beam) in family.beams.iter().enumerate() {
        let chi_t = beam.cutoff.chi_time(t);
        if chi_t == 0.0 {
            continue;
        }
        let st = beam.state_at(t.min(beam.duration()));
        let r = beam.cutoff.outer_radius;
        let mut acc = C64::new(0.0, 0.0);
        for (i, y) in grid.nodes.iter().enumerate() {
            if field[i].norm_sqr() == 0.0 {
                continue;
            }
            let mut inside = true;
            for d in 0..y.len() {
                if (y[d] - st.x[d]).abs() > r {
                    inside = false;
                    break;
                }
            }
            if inside {
                acc += beam.evaluate_with_state(&st, y).conj() * field[i];
            }
        }
        let mut v = acc * C64::new(grid.cell * norm * chi_t, 0.0);
        if let Some((alpha, scale, u, positions)) = modifier {
            let z = &family.k_grid.nodes[iz];
            v *= C64::from_polar(1.0, scale * alpha.eval(z) * u.dot(&positions[iz]));
        }
        out[iz] = v;
    }
    out
}

/// Brute-force kernel evaluation of `Q*Q f(t,z)` (the literal double
/// integral). Quadratic in nodes; used as the oracle for the two-pass route.
pub fn qstarq_bruteforce(
    family: &BeamFamily,
    f_vals: &[C64],
    t: f64,
    spacing: Option<f64>,
) -> Result<Vec<C64>> {
    let grid = y_grid_for(family, t, spacing)?;
    let norm = q_norm(family);
    let n_nodes = family.k_grid.len();
    let states: Vec<_> = family
        .beams
        .iter()
        .map(|b| b.state_at(t.min(b.duration())))
        .collect();
    let chis: Vec<f64> = family.beams.iter().map(|b| b.cutoff.chi_time(t)).collect();
    let mut out = vec![C64::new(0.0, 0.0); n_nodes];
    for iz in 0..n_nodes {
        let mut acc = C64::new(0.0, 0.0);
        for izp in 0..n_nodes {
            if f_vals[izp].norm_sqr() == 0.0 {
                continue;
            }
            let mut kernel = C64::new(0.0, 0.0);
            for y in &grid.nodes {
                kernel += family.beams[iz].evaluate_with_state(&states[iz], y).conj()
                    * family.beams[izp].evaluate_with_state(&states[izp], y);
            }
            acc += kernel
                * C64::new(grid.cell * chis[iz] * chis[izp], 0.0)
                * f_vals[izp]
                * C64::new(family.k_grid.weights[izp], 0.0);
        }
        out[iz] = acc * C64::new(norm * norm, 0.0);
    }
    Ok(out)
}

/// Kernel entry `int conj(U_z) U_{z'} dy`; exactly zero once the cutoff
/// supports are disjoint.
pub fn kernel_entry(family: &BeamFamily, iz: usize, izp: usize, t: f64, grid: &YGrid) -> C64 {
    let si = family.beams[iz].state_at(t.min(family.beams[iz].duration()));
    let sj = family.beams[izp].state_at(t.min(family.beams[izp].duration()));
    let mut acc = C64::new(0.0, 0.0);
    for y in &grid.nodes {
        acc += family.beams[iz].evaluate_with_state(&si, y).conj()
            * family.beams[izp].evaluate_with_state(&sj, y);
    }
    acc * C64::new(grid.cell, 0.0)
}

/// The recentred two-beam phase
/// `psi~(t, y, z, z') = psi(t, w, z') - conj(psi(t, w, z))` at the absolute
/// point `w = (x(t,z) + x(t,z'))/2 + y`.
pub fn psi_tilde(family: &BeamFamily, t: f64, iz: usize, izp: usize, y_rel: &DVector<f64>) -> C64 {
    let si = family.beams[iz].state_at(t.min(family.beams[iz].duration()));
    let sj = family.beams[izp].state_at(t.min(family.beams[izp].duration()));
    let mid = (&si.x + &sj.x) * 0.5;
    let w = &mid + y_rel;
    family.beams[izp].phase_at(&sj, &w) - family.beams[iz].phase_at(&si, &w).conj()
}

/// Fit the phase lower-bound constant `delta` in
/// `Im psi~ >= delta |y|^2 + delta/4 |x(t,z) - x(t,z')|^2` over sampled
/// `(y, z, z')`.
pub fn phase_lower_bound(family: &BeamFamily, t: f64, y_samples: &[DVector<f64>]) -> f64 {
    let n_nodes = family.k_grid.len();
    let positions = family.positions_at(t);
    let mut delta = f64::INFINITY;
    for iz in 0..n_nodes {
        for izp in 0..n_nodes {
            let sep2 = (&positions[iz] - &positions[izp]).norm_squared();
            for y in y_samples {
                let denom = y.norm_squared() + 0.25 * sep2;
                if denom < 1e-14 {
                    continue;
                }
                let im = psi_tilde(family, t, iz, izp, y).im;
                delta = delta.min(im / denom);
            }
        }
    }
    delta
}

/// Fit the gradient lower-bound constant `C` in
/// `inf_{y in Omega(t,mu)} |grad_y psi~| >= C |z - z'|`.
pub fn gradient_lower_bound(family: &BeamFamily, t: f64, mu: f64, y_per_axis: usize) -> f64 {
    let n_nodes = family.k_grid.len();
    let n = family.dim();
    let states: Vec<_> = family
        .beams
        .iter()
        .map(|b| b.state_at(t.min(b.duration())))
        .collect();
    let mut c_fit = f64::INFINITY;
    for iz in 0..n_nodes {
        for izp in 0..n_nodes {
            let dz = (&family.k_grid.nodes[iz] - &family.k_grid.nodes[izp]).norm();
            if dz < 1e-12 {
                continue;
            }
            let si = &states[iz];
            let sj = &states[izp];
            let mid = (&si.x + &sj.x) * 0.5;
            let delta_x = (&si.x - &sj.x) * 0.5;
            // Grid over Omega(t, mu) = {y : |y -+ dx| <= 2 mu}.
            let mut inf_grad = f64::INFINITY;
            let mut idx = vec![0usize; n];
            loop {
                let y = DVector::from_fn(n, |d, _| {
                    -2.0 * mu + 4.0 * mu * idx[d] as f64 / (y_per_axis - 1) as f64
                });
                if (&y - &delta_x).norm() <= 2.0 * mu && (&y + &delta_x).norm() <= 2.0 * mu {
                    let w = &mid + &y;
                    let grad_j = sj.p.map(|v| C64::new(v, 0.0))
                        + &sj.m * (&w - &sj.x).map(|v| C64::new(v, 0.0));
                    let grad_i = si.p.map(|v| C64::new(v, 0.0))
                        + &si.m * (&w - &si.x).map(|v| C64::new(v, 0.0));
                    let g = grad_j - grad_i.map(|v| v.conj());
                    inf_grad = inf_grad.min(g.norm());
                }
                let mut d = 0;
                loop {
                    if d == n {
                        break;
                    }
                    idx[d] += 1;
                    if idx[d] < y_per_axis {
                        break;
                    }
                    idx[d] = 0;
                    d += 1;
                }
                if d == n {
                    break;
                }
            }
            if inf_grad.is_finite() {
                c_fit = c_fit.min(inf_grad / dz);
            }
        }
    }
    c_fit
}
