//! Observability experiments: boundary-trace-to-energy ratios across initial
//! data ensembles, with frequency-resolved statistics.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::coefficients::CoefficientField;
use crate::error::Result;
use crate::geometry::MetricField;
use crate::grid::{linear_slope, loglog_slope};

use super::solver::solve_wave_1d;

/// Initial-data ensemble: the eigenmode ladder `sin(k pi x)`, `k = 1..=K`,
/// plus random band-limited draws.
#[derive(Clone, Debug)]
pub struct EnsembleSpec {
    pub max_mode: usize,
    pub random_draws: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ObservabilityReport {
    pub t_end: f64,
    pub t_alpha: Option<f64>,
    pub t_exceeds_2t_alpha: Option<bool>,
    pub m: usize,
    /// `(k, ratio)` over the eigenmode ladder.
    pub mode_ratios: Vec<(usize, f64)>,
    /// Ratios of the random band-limited members.
    pub random_ratios: Vec<f64>,
    pub min_ratio: f64,
    pub median_ratio: f64,
    /// Slope of `log r` against `log k` over the ladder.
    pub mode_slope: f64,
}

/// Run the ensemble through the 1-D solver and collect
/// `r = ||d_nu d_t^m u||^2 / (||u0||^2_{H^1_0} + ||u1||^2_{L^2})`.
#[allow(clippy::too_many_arguments)]
pub fn observability_ratio(
    alpha: &CoefficientField,
    metric: &MetricField,
    ensemble: &EnsembleSpec,
    t_end: f64,
    m: usize,
    n_nodes: usize,
    cfl: f64,
    t_alpha: Option<f64>,
) -> Result<ObservabilityReport> {
    const PI: f64 = std::f64::consts::PI;
    let mut mode_ratios = Vec::with_capacity(ensemble.max_mode);
    for k in 1..=ensemble.max_mode {
        let kk = k as f64;
        let hist = solve_wave_1d(
            alpha,
            metric,
            0.0,
            1.0,
            &move |x| (kk * PI * x).sin(),
            &|_| 0.0,
            t_end,
            n_nodes,
            cfl,
        )?;
        let denom = hist.u0_h1_sq + hist.u1_l2_sq;
        mode_ratios.push((k, hist.trace.norm_sq(m) / denom));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(ensemble.seed);
    let mut random_ratios = Vec::with_capacity(ensemble.random_draws);
    for _ in 0..ensemble.random_draws {
        let coeffs: Vec<f64> = (0..ensemble.max_mode.min(12))
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        let hist = solve_wave_1d(
            alpha,
            metric,
            0.0,
            1.0,
            &move |x| {
                coeffs
                    .iter()
                    .enumerate()
                    .map(|(j, c)| c * ((j + 1) as f64 * PI * x).sin() / (j + 1) as f64)
                    .sum()
            },
            &|_| 0.0,
            t_end,
            n_nodes,
            cfl,
        )?;
        let denom = hist.u0_h1_sq + hist.u1_l2_sq;
        random_ratios.push(hist.trace.norm_sq(m) / denom);
    }

    let mut all: Vec<f64> = mode_ratios
        .iter()
        .map(|(_, r)| *r)
        .chain(random_ratios.iter().cloned())
        .collect();
    all.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let min_ratio = all[0];
    let median_ratio = all[all.len() / 2];

    let ks: Vec<f64> = mode_ratios.iter().map(|(k, _)| *k as f64).collect();
    let rs: Vec<f64> = mode_ratios.iter().map(|(_, r)| *r).collect();
    let mode_slope = loglog_slope(&ks, &rs);

    Ok(ObservabilityReport {
        t_end,
        t_alpha,
        t_exceeds_2t_alpha: t_alpha.map(|ta| t_end > 2.0 * ta),
        m,
        mode_ratios,
        random_ratios,
        min_ratio,
        median_ratio,
        mode_slope,
    })
}

/// Convenience: slope of `log r(k)` vs `log k` for an already-computed curve.
pub fn ratio_slope(mode_ratios: &[(usize, f64)]) -> f64 {
    let ks: Vec<f64> = mode_ratios.iter().map(|(k, _)| (*k as f64).ln()).collect();
    let rs: Vec<f64> = mode_ratios
        .iter()
        .map(|(_, r)| r.max(1e-300).ln())
        .collect();
    linear_slope(&ks, &rs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::fixtures::constant;

    #[test]
    fn constant_alpha_ratio_matches_closed_form() {
        // For alpha = 1, T = 4: r(k) = 2T = 8 for every integer mode.
        let alpha = constant(1, 1.0);
        let metric = MetricField::euclidean(1);
        let spec = EnsembleSpec {
            max_mode: 8,
            random_draws: 0,
            seed: 1,
        };
        let report =
            observability_ratio(&alpha, &metric, &spec, 4.0, 0, 1000, 0.45, Some(1.0)).unwrap();
        let theory = 8.0;
        for (k, r) in &report.mode_ratios {
            assert!(
                (r - theory).abs() / theory < 0.1,
                "mode {k}: ratio {r} not within 10% of {theory}"
            );
            assert!(*r >= 0.5 * theory);
        }
        assert!(
            report.mode_slope.abs() < 0.05,
            "slope {}",
            report.mode_slope
        );
        assert_eq!(report.t_exceeds_2t_alpha, Some(true));
    }

    #[test]
    fn report_serializes() {
        let alpha = constant(1, 1.0);
        let metric = MetricField::euclidean(1);
        let spec = EnsembleSpec {
            max_mode: 2,
            random_draws: 1,
            seed: 3,
        };
        let report = observability_ratio(&alpha, &metric, &spec, 2.0, 0, 200, 0.45, None).unwrap();
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.contains("mode_ratios"));
        assert!(report.min_ratio > 0.0);
    }
}
