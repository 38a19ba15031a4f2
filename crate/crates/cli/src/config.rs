//! Experiment configuration: one JSON document per run.

use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Trace,
    Beam,
    Superpose,
    Xray,
    Wave,
    Observability,
    Sweep,
}

/// Full experiment description. Unspecified numeric fields fall back to the
/// defaults below; every referenced fixture id must resolve.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default = "default_metric")]
    pub metric: String,
    #[serde(default = "default_domain")]
    pub domain: String,
    #[serde(default = "default_alpha")]
    pub alpha: String,
    #[serde(default = "default_phantom")]
    pub phantom: String,
    #[serde(default = "default_h")]
    pub h: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_grid_n")]
    pub grid_n: usize,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default)]
    pub m: usize,
    #[serde(default = "default_ensemble")]
    pub ensemble_size: usize,
    #[serde(default = "default_max_mode")]
    pub max_mode: usize,
    #[serde(default = "default_sweep_lo")]
    pub sweep_k_lo: i32,
    #[serde(default = "default_sweep_hi")]
    pub sweep_k_hi: i32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_serial")]
    pub serial: bool,
    #[serde(default = "default_output")]
    pub output_dir: String,
}

fn default_metric() -> String {
    "euclidean".into()
}
fn default_domain() -> String {
    "interval".into()
}
fn default_alpha() -> String {
    "constant".into()
}
fn default_phantom() -> String {
    "gauss".into()
}
fn default_h() -> f64 {
    2f64.powi(-6)
}
fn default_epsilon() -> f64 {
    0.5
}
fn default_dt() -> f64 {
    1e-3
}
fn default_t_end() -> f64 {
    1.0
}
fn default_grid_n() -> usize {
    128
}
fn default_cfl() -> f64 {
    0.45
}
fn default_ensemble() -> usize {
    4
}
fn default_max_mode() -> usize {
    12
}
fn default_sweep_lo() -> i32 {
    4
}
fn default_sweep_hi() -> i32 {
    8
}
fn default_serial() -> bool {
    true
}
fn default_output() -> String {
    "out".into()
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("invalid config: {e}"))
    }

    /// Output root, honoring the `BEAMLAB_OUT` override.
    pub fn output_root(&self) -> std::path::PathBuf {
        match std::env::var("BEAMLAB_OUT") {
            Ok(root) if !root.is_empty() => std::path::Path::new(&root).join(&self.output_dir),
            _ => std::path::PathBuf::from(&self.output_dir),
        }
    }
}

/// A validation diagnostic (static checks only; nothing is computed).
#[derive(Clone, Debug, Serialize)]
pub struct Diagnostic {
    pub severity: &'static str,
    pub message: String,
}

pub fn validate(cfg: &ExperimentConfig) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let dim = match beamlab::registry::domain_by_id(&cfg.domain) {
        Ok(d) => d.dim(),
        Err(e) => {
            out.push(Diagnostic {
                severity: "error",
                message: format!("domain: {e}"),
            });
            1
        }
    };
    if let Err(e) = beamlab::registry::metric_by_id(&cfg.metric, dim) {
        out.push(Diagnostic {
            severity: "error",
            message: format!("metric: {e}"),
        });
    }
    if let Err(e) = beamlab::registry::alpha_by_id(&cfg.alpha, dim) {
        out.push(Diagnostic {
            severity: "error",
            message: format!("alpha: {e}"),
        });
    }
    if cfg.experiment == ExperimentKind::Xray {
        if let Err(e) = beamlab::registry::phantom_by_id(&cfg.phantom) {
            out.push(Diagnostic {
                severity: "error",
                message: format!("phantom: {e}"),
            });
        }
    }
    if cfg.cfl > 0.5 {
        out.push(Diagnostic {
            severity: "error",
            message: format!("cfl = {} exceeds the stable bound 0.5", cfg.cfl),
        });
    }
    if !(cfg.epsilon > 0.0 && cfg.epsilon < 1.0) {
        out.push(Diagnostic {
            severity: "error",
            message: format!("epsilon = {} outside (0,1)", cfg.epsilon),
        });
    }
    if !(cfg.h > 0.0 && cfg.h < 1.0) {
        out.push(Diagnostic {
            severity: "error",
            message: format!("h = {} outside (0,1)", cfg.h),
        });
    }
    // Grid resolves the Gaussian scale: spacing <= sqrt(h)/8 on superposition
    // experiments.
    if cfg.experiment == ExperimentKind::Superpose {
        let spacing = 2.0 / cfg.grid_n as f64;
        let need = cfg.h.sqrt() / 8.0;
        if spacing > need {
            out.push(Diagnostic {
                severity: "warning",
                message: format!(
                    "grid spacing {spacing:.2e} does not resolve sqrt(h)/8 = {need:.2e}"
                ),
            });
        }
    }
    // T vs 2 T_alpha for observability runs.
    if cfg.experiment == ExperimentKind::Observability {
        if let (Ok(alpha), Ok(metric), Ok(domain)) = (
            beamlab::registry::alpha_by_id(&cfg.alpha, dim),
            beamlab::registry::metric_by_id(&cfg.metric, dim),
            beamlab::registry::domain_by_id(&cfg.domain),
        ) {
            match beamlab::coefficients::travel_time(&alpha, &metric, &domain, 4, cfg.seed) {
                Ok(t_alpha) => {
                    if cfg.t_end <= 2.0 * t_alpha {
                        out.push(Diagnostic {
                            severity: "warning",
                            message: format!(
                                "T = {} <= 2 T_alpha = {:.3}: observability window too short",
                                cfg.t_end,
                                2.0 * t_alpha
                            ),
                        });
                    }
                }
                Err(e) => out.push(Diagnostic {
                    severity: "warning",
                    message: format!("travel time unavailable: {e}"),
                }),
            }
        }
        // Non-trapping spot check.
        if let (Ok(metric), Ok(domain)) = (
            beamlab::registry::metric_by_id(&cfg.metric, dim),
            beamlab::registry::domain_by_id(&cfg.domain),
        ) {
            let report = beamlab::geometry::check_nontrapping(&metric, &domain, 16, 16.0, cfg.seed);
            if !report.passed() {
                out.push(Diagnostic {
                    severity: "warning",
                    message: format!(
                        "non-trapping spot check found {} violation(s)",
                        report.violations.len()
                    ),
                });
            }
        }
    }
    out
}
