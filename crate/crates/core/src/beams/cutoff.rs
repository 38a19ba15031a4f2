//! Spatial and temporal beam cutoffs.
//!
//! The spatial cutoff is a `C^2` quintic bump: identically 1 inside the inner
//! radius, 0 beyond the outer radius (twice the inner). The temporal windows
//! form an exact partition of unity over the chart intervals.

use serde::Serialize;

/// How the spatial cutoff radius scales with `h`.
#[derive(Clone, Copy, Debug, Serialize)]
pub enum CutoffPolicy {
    /// Inner radius `h^{1/n}` (coincides with the Gaussian width scale only
    /// for n = 2).
    Paper,
    /// Inner radius `kappa sqrt(h)`, tracking the Gaussian width in every
    /// dimension; `kappa` counts retained standard deviations.
    WidthScaled { kappa: f64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct CutoffSpec {
    pub h: f64,
    pub dim: usize,
    pub policy: CutoffPolicy,
    pub inner_radius: f64,
    pub outer_radius: f64,
    /// Width of the temporal transitions (defaults to tube_radius / 4).
    pub time_margin: f64,
    /// Window knots `t_0 < t_1 < ... < t_L` from the chart intervals.
    pub time_knots: Vec<f64>,
}

impl CutoffSpec {
    pub fn new(
        h: f64,
        dim: usize,
        policy: CutoffPolicy,
        time_margin: f64,
        knots: Vec<f64>,
    ) -> Self {
        let inner = match policy {
            CutoffPolicy::Paper => h.powf(1.0 / dim as f64),
            CutoffPolicy::WidthScaled { kappa } => kappa * h.sqrt(),
        };
        Self {
            h,
            dim,
            policy,
            inner_radius: inner,
            outer_radius: 2.0 * inner,
            time_margin,
            time_knots: knots,
        }
    }

    /// `chi_h(s)` for the radial offset `s = |x - x(t)|`.
    pub fn chi_h(&self, s: f64) -> f64 {
        bump(s, self.inner_radius, self.outer_radius)
    }

    /// `d/ds chi_h`.
    pub fn chi_h_d1(&self, s: f64) -> f64 {
        bump_d1(s, self.inner_radius, self.outer_radius)
    }

    /// `d^2/ds^2 chi_h`.
    pub fn chi_h_d2(&self, s: f64) -> f64 {
        bump_d2(s, self.inner_radius, self.outer_radius)
    }

    /// Temporal factor of the assembled beam: the partition-of-unity windows
    /// sum to 1 on the beam lifetime, so the factor is 1 on `[t_0, t_L]` and
    /// decays over `time_margin` outside.
    pub fn chi_time(&self, t: f64) -> f64 {
        let t0 = *self.time_knots.first().unwrap_or(&0.0);
        let t_end = *self.time_knots.last().unwrap_or(&0.0);
        if t < t0 {
            bump(t0 - t, 0.0, self.time_margin)
        } else if t > t_end {
            bump(t - t_end, 0.0, self.time_margin)
        } else {
            1.0
        }
    }

    /// Per-chart window `chi_l`: rises at `t_l`, falls at `t_{l+1}`, and the
    /// family telescopes to an exact partition of unity on `[t_0, t_L]`.
    pub fn chi_window(&self, l: usize, t: f64) -> f64 {
        let knots = &self.time_knots;
        assert!(l + 1 < knots.len());
        let w = self.time_margin;
        let rise = if l == 0 { 1.0 } else { rise_at(t, knots[l], w) };
        let fall = if l + 2 == knots.len() {
            0.0
        } else {
            rise_at(t, knots[l + 1], w)
        };
        rise - fall
    }

    pub fn n_windows(&self) -> usize {
        self.time_knots.len().saturating_sub(1)
    }
}

/// Quintic smoothstep: 0 below 0, 1 above 1, C^2 at both ends.
fn smoothstep(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        u * u * u * (10.0 + u * (-15.0 + 6.0 * u))
    }
}

fn smoothstep_d1(u: f64) -> f64 {
    if u <= 0.0 || u >= 1.0 {
        0.0
    } else {
        30.0 * u * u * (1.0 - u) * (1.0 - u)
    }
}

fn smoothstep_d2(u: f64) -> f64 {
    if u <= 0.0 || u >= 1.0 {
        0.0
    } else {
        60.0 * u * (1.0 - u) * (1.0 - 2.0 * u)
    }
}

/// 1 on `[0, inner]`, 0 beyond `outer`, quintic in between.
fn bump(s: f64, inner: f64, outer: f64) -> f64 {
    1.0 - smoothstep((s - inner) / (outer - inner))
}

fn bump_d1(s: f64, inner: f64, outer: f64) -> f64 {
    -smoothstep_d1((s - inner) / (outer - inner)) / (outer - inner)
}

fn bump_d2(s: f64, inner: f64, outer: f64) -> f64 {
    -smoothstep_d2((s - inner) / (outer - inner)) / ((outer - inner) * (outer - inner))
}

/// Smooth 0 -> 1 transition centered at `c` with width `w`.
fn rise_at(t: f64, c: f64, w: f64) -> f64 {
    smoothstep((t - (c - 0.5 * w)) / w)
}
