//! Beam families over a compact launch set `K`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::beams::{propagate_beam, Beam, BeamConfig, CutoffPolicy};
use crate::error::{Error, Result};
use crate::geometry::{fermi_frame, free_flow, hamiltonian_flow, DomainSpec, MetricField};
use crate::geometry::{PhasePoint, SmoothScalar};

/// Tensor quadrature nodes over a rectangle `K` with uniform weights.
#[derive(Clone, Debug)]
pub struct KGrid {
    pub nodes: Vec<DVector<f64>>,
    pub weights: Vec<f64>,
    pub lo: DVector<f64>,
    pub hi: DVector<f64>,
    pub per_axis: usize,
}

impl KGrid {
    pub fn uniform(lo: DVector<f64>, hi: DVector<f64>, per_axis: usize) -> Self {
        let dim = lo.len();
        let spacing: Vec<f64> = (0..dim)
            .map(|d| (hi[d] - lo[d]) / per_axis as f64)
            .collect();
        let cell: f64 = spacing.iter().product();
        let mut nodes = Vec::new();
        let mut idx = vec![0usize; dim];
        loop {
            nodes.push(DVector::from_fn(dim, |d, _| {
                lo[d] + (idx[d] as f64 + 0.5) * spacing[d]
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
        let weights = vec![cell; nodes.len()];
        Self {
            nodes,
            weights,
            lo,
            hi,
            per_axis,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Construction parameters for [`build_family`].
#[derive(Clone)]
pub struct FamilyConfig {
    pub h: f64,
    pub dt: f64,
    pub t_end: f64,
    pub policy: CutoffPolicy,
    /// Number of random node pairs for the squeezing estimate.
    pub squeeze_pairs: usize,
    pub seed: u64,
}

impl FamilyConfig {
    pub fn new(h: f64, t_end: f64) -> Self {
        Self {
            h,
            dt: 1e-3,
            t_end,
            policy: CutoffPolicy::WidthScaled { kappa: 4.0 },
            squeeze_pairs: 64,
            seed: 7,
        }
    }
}

/// A family of beams launched from `K` with initial phase `Phi` and
/// amplitude `A`: `x(0,z) = z`, `p(0,z) = grad Phi(z)`,
/// `M(0,z) = hess Phi(z) + i Id`.
pub struct BeamFamily {
    pub k_grid: KGrid,
    pub beams: Vec<Beam>,
    /// `A(z)` per node.
    pub amplitude: Vec<C64>,
    /// `Phi(z)` per node (the data carrier phase).
    pub phase: Vec<f64>,
    pub h: f64,
    /// Measured bi-Lipschitz flow constants `(c1, c2)`.
    pub squeezing: (f64, f64),
}

pub fn build_family(
    metric: &MetricField,
    amplitude: &dyn Fn(&DVector<f64>) -> C64,
    phi: &SmoothScalar,
    k_grid: KGrid,
    cfg: &FamilyConfig,
    domain: Option<&DomainSpec>,
) -> Result<BeamFamily> {
    let n = metric.dim();
    let mut beams = Vec::with_capacity(k_grid.len());
    let mut amps = Vec::with_capacity(k_grid.len());
    let mut phases = Vec::with_capacity(k_grid.len());

    for (node, z) in k_grid.nodes.iter().enumerate() {
        let eta = phi.grad(z);
        let m0 = phi.hess(z).map(|v| C64::new(v, 0.0))
            + DMatrix::identity(n, n).map(|v| C64::new(0.0, v));
        let ray = match domain {
            Some(d) => hamiltonian_flow(
                metric,
                &PhasePoint::new(z.clone(), eta.clone()),
                cfg.dt,
                cfg.t_end,
                d,
            ),
            None => free_flow(
                metric,
                &PhasePoint::new(z.clone(), eta.clone()),
                cfg.dt,
                cfg.t_end,
            ),
        }
        .map_err(|e| Error::FamilyNode {
            node,
            source: Box::new(e),
        })?;
        let chart = Arc::new(fermi_frame(&ray, metric).map_err(|e| Error::FamilyNode {
            node,
            source: Box::new(e),
        })?);
        let bc = BeamConfig::new(cfg.h)
            .with_dt(cfg.dt)
            .with_m0(m0)
            .with_policy(cfg.policy);
        let beam = propagate_beam(metric, &chart, z, &eta, &bc).map_err(|e| Error::FamilyNode {
            node,
            source: Box::new(e),
        })?;
        beams.push(beam);
        amps.push(amplitude(z));
        phases.push(phi.eval(z));
    }

    let squeezing = measure_squeezing(&k_grid, &beams, cfg);

    Ok(BeamFamily {
        k_grid,
        beams,
        amplitude: amps,
        phase: phases,
        h: cfg.h,
        squeezing,
    })
}

fn measure_squeezing(k_grid: &KGrid, beams: &[Beam], cfg: &FamilyConfig) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut c1 = f64::INFINITY;
    let mut c2: f64 = 0.0;
    let n_nodes = k_grid.len();
    if n_nodes < 2 {
        return (1.0, 1.0);
    }
    let t_samples = [0.0, 0.5 * cfg.t_end, cfg.t_end];
    for _ in 0..cfg.squeeze_pairs {
        let i = rng.random_range(0..n_nodes);
        let mut j = rng.random_range(0..n_nodes);
        if i == j {
            j = (j + 1) % n_nodes;
        }
        let dz = (&k_grid.nodes[i] - &k_grid.nodes[j]).norm();
        if dz < 1e-12 {
            continue;
        }
        for &t in &t_samples {
            let t = t.min(beams[i].duration()).min(beams[j].duration());
            let si = beams[i].state_at(t);
            let sj = beams[j].state_at(t);
            let sep = (&si.x - &sj.x).norm() + (&si.p - &sj.p).norm();
            c1 = c1.min(sep / dz);
            c2 = c2.max(sep / dz);
        }
    }
    (c1, c2)
}

impl BeamFamily {
    pub fn dim(&self) -> usize {
        self.k_grid.nodes[0].len()
    }

    /// Beam foot points `x(t, z)` for all nodes.
    pub fn positions_at(&self, t: f64) -> Vec<DVector<f64>> {
        self.beams
            .iter()
            .map(|b| b.state_at(t.min(b.duration())).x)
            .collect()
    }

    /// Data vector `w(z) = f(z) e^{i Phi(z)/h}` for a static profile
    /// evaluated at the launch points.
    pub fn data_at_launch(&self, f: &dyn Fn(&DVector<f64>) -> f64) -> Vec<C64> {
        self.k_grid
            .nodes
            .iter()
            .zip(&self.phase)
            .map(|(z, phi)| C64::from_polar(1.0, phi / self.h) * f(z))
            .collect()
    }

    /// Data vector with the profile sampled at the transported points
    /// `x(t, z)` (the carrier phase stays attached to the launch label).
    pub fn data_transported(&self, f: &dyn Fn(&DVector<f64>) -> f64, t: f64) -> Vec<C64> {
        self.positions_at(t)
            .iter()
            .zip(&self.phase)
            .map(|(x, phi)| C64::from_polar(1.0, phi / self.h) * f(x))
            .collect()
    }
}
