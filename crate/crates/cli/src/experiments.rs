//! Experiment pipelines behind `beamlab run`.

use std::fs::File;
use std::io::Write as _;
use std::path::Path;
use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64 as C64;

use beamlab::beams::{
    propagate_beam, schrodinger_residual_norm, BeamConfig, CutoffPolicy, TimeDerivative,
};
use beamlab::coefficients::travel_time;
use beamlab::geometry::{
    check_nontrapping, fermi_frame, free_flow, hamiltonian_flow, unit_speed_momentum, PhasePoint,
};
use beamlab::grid::{loglog_slope, Grid2};
use beamlab::registry;
use beamlab::superposition::{
    apply_q, apply_qstarq, build_family, phase_lower_bound, y_grid_for, FamilyConfig, KGrid,
};
use beamlab::wave::{
    bridge_comparison, build_lifted_ansatz, observability_ratio, solve_wave_1d, DataTransport,
    EnsembleSpec,
};
use beamlab::xray::{
    calibration_scalar, offset_grid, reconstruct, theta_grid, xray_forward_euclid,
    ReconstructionSpec,
};
use beamlab::Error as CoreError;

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::manifest::RunManifest;
use crate::plot::{heatmap_svg, polyline_svg, Series};

pub fn run(
    cfg: &ExperimentConfig,
    manifest: &mut RunManifest,
    dir: &Path,
) -> Result<(), CoreError> {
    std::fs::create_dir_all(dir)?;
    match cfg.experiment {
        ExperimentKind::Trace => run_trace(cfg, manifest, dir),
        ExperimentKind::Beam => run_beam(cfg, manifest, dir),
        ExperimentKind::Superpose => run_superpose(cfg, manifest, dir),
        ExperimentKind::Xray => run_xray(cfg, manifest, dir),
        ExperimentKind::Wave => run_wave(cfg, manifest, dir),
        ExperimentKind::Observability => run_observability(cfg, manifest, dir),
        ExperimentKind::Sweep => run_sweep(cfg, manifest, dir),
    }
}

fn record(manifest: &mut RunManifest, dir: &Path, name: &str) -> std::path::PathBuf {
    manifest.outputs.push(name.to_string());
    dir.join(name)
}

fn run_trace(
    cfg: &ExperimentConfig,
    manifest: &mut RunManifest,
    dir: &Path,
) -> Result<(), CoreError> {
    let domain = registry::domain_by_id(&cfg.domain)?;
    let metric = registry::metric_by_id(&cfg.metric, domain.dim())?;
    let report = check_nontrapping(
        &metric,
        &domain,
        16 * cfg.ensemble_size.max(1),
        4.0 * cfg.t_end,
        cfg.seed,
    );
    let json = serde_json::json!({
        "max_exit_time": report.max_exit_time,
        "all_transversal": report.all_transversal,
        "violations": report.violations.len(),
        "samples": report.n_samples,
    });
    std::fs::write(record(manifest, dir, "nontrapping.json"), json.to_string())?;

    // One sample ray from the boundary (or interval endpoint).
    let (lo, hi) = domain.bounding_box();
    let x0 = if domain.dim() == 1 {
        lo.clone()
    } else {
        let mut x = DVector::zeros(domain.dim());
        x[0] = -1.0 + 1e-12;
        x.clone() * (hi[0].abs().min(1.0))
    };
    let mut omega = DVector::zeros(domain.dim());
    omega[0] = 1.0;
    let p = unit_speed_momentum(&metric, &x0, &omega);
    let ray = hamiltonian_flow(
        &metric,
        &PhasePoint::new(x0, p),
        cfg.dt,
        4.0 * cfg.t_end,
        &domain,
    )?;
    let mut f = File::create(record(manifest, dir, "ray0.csv"))?;
    ray.to_csv(&mut f)?;

    manifest.assert_check(
        "nontrapping",
        report.passed(),
        format!(
            "{} violations over {} samples",
            report.violations.len(),
            report.n_samples
        ),
    );
    Ok(())
}

fn run_beam(
    cfg: &ExperimentConfig,
    manifest: &mut RunManifest,
    dir: &Path,
) -> Result<(), CoreError> {
    let domain = registry::domain_by_id(&cfg.domain)?;
    let metric = registry::metric_by_id(&cfg.metric, domain.dim())?;
    let n = domain.dim();
    let z = DVector::zeros(n);
    let mut omega = DVector::zeros(n);
    omega[0] = 1.0;
    let p = unit_speed_momentum(&metric, &z, &omega);
    let ray = free_flow(
        &metric,
        &PhasePoint::new(z.clone(), p.clone()),
        cfg.dt,
        cfg.t_end,
    )?;
    let chart = Arc::new(fermi_frame(&ray, &metric)?);
    let bc = BeamConfig::new(cfg.h)
        .with_dt(cfg.dt)
        .with_policy(CutoffPolicy::WidthScaled { kappa: 4.0 });
    let beam = propagate_beam(&metric, &chart, &z, &p, &bc)?;

    let mut f = File::create(record(manifest, dir, "beam.jsonl"))?;
    for st in beam.states.iter().step_by(50) {
        let rec = serde_json::json!({
            "t": st.t,
            "x": st.x.as_slice(),
            "p": st.p.as_slice(),
            "a_re": st.a.re, "a_im": st.a.im,
            "lkk": st.lkk_invariant(),
            "min_eig_im_m": st.min_eig_im_m(),
        });
        writeln!(f, "{rec}")?;
    }

    let l0 = beam.states[0].lkk_invariant();
    let mut drift_pts = Vec::new();
    let mut res_pts = Vec::new();
    let n_samples = 16;
    let stride = (beam.states.len() - 1) / n_samples;
    for j in 0..=n_samples {
        let idx = (j * stride).min(beam.states.len() - 1);
        let st = &beam.states[idx];
        drift_pts.push((st.t, ((st.lkk_invariant() - l0) / l0).abs().max(1e-18)));
        let r = schrodinger_residual_norm(&beam, &metric, idx, TimeDerivative::FlowRhs, None)?;
        res_pts.push((st.t, r));
    }
    let mut f = File::create(record(manifest, dir, "residual.csv"))?;
    writeln!(f, "t,lkk_drift,residual_norm")?;
    for (a, b) in drift_pts.iter().zip(&res_pts) {
        writeln!(f, "{},{},{}", a.0, a.1, b.1)?;
    }
    let svg = polyline_svg(
        "schrodinger residual norm along the beam",
        &[Series {
            label: "||P_h U||",
            points: res_pts,
        }],
        false,
    );
    std::fs::write(record(manifest, dir, "residual.svg"), svg)?;

    // Grid evaluation of the beam at the final interior time, along the
    // first axis through the beam center.
    let t_eval = 0.9 * beam.duration();
    let st = beam.state_at(t_eval);
    let half = beam.cutoff.outer_radius;
    let n_pts = 257;
    let mut f = File::create(record(manifest, dir, "beam_profile.csv"))?;
    writeln!(f, "x1,re,im,abs")?;
    for i in 0..n_pts {
        let offset = -half + 2.0 * half * i as f64 / (n_pts - 1) as f64;
        let mut x = st.x.clone();
        x[0] += offset;
        let u = beam.evaluate(t_eval, &x);
        writeln!(f, "{},{},{},{}", x[0], u.re, u.im, u.norm())?;
    }

    let max_drift = drift_pts.iter().map(|(_, d)| *d).fold(0.0, f64::max);
    manifest.assert_check(
        "lkk_drift",
        max_drift <= 1e-5,
        format!("max drift {max_drift:.3e}"),
    );
    Ok(())
}

fn run_superpose(
    cfg: &ExperimentConfig,
    manifest: &mut RunManifest,
    dir: &Path,
) -> Result<(), CoreError> {
    let metric = registry::metric_by_id(&cfg.metric, 1)?;
    let phi = beamlab::geometry::SmoothScalar::linear(DVector::from_vec(vec![1.0]));
    let per = ((0.8 / (cfg.h.sqrt() / 8.0)).ceil() as usize).max(8);
    let kg = KGrid::uniform(
        DVector::from_vec(vec![-0.4]),
        DVector::from_vec(vec![0.4]),
        per,
    );
    let mut fc = FamilyConfig::new(cfg.h, cfg.t_end.min(0.5));
    fc.policy = CutoffPolicy::WidthScaled { kappa: 4.0 };
    fc.seed = cfg.seed;
    let fam = build_family(&metric, &|_| C64::new(1.0, 0.0), &phi, kg, &fc, None)?;

    let data: Vec<C64> = fam
        .k_grid
        .nodes
        .iter()
        .zip(&fam.phase)
        .map(|(z, ph)| C64::from_polar(1.0, ph / cfg.h) * (-z.norm_squared() / 0.02).exp())
        .collect();
    let t = fc.t_end * 0.8;

    // Q norm ratio.
    let grid = y_grid_for(&fam, t, None)?;
    let f_norm_sq: f64 = data
        .iter()
        .zip(&fam.k_grid.weights)
        .map(|(w, wgt)| w.norm_sqr() * wgt)
        .sum();
    let q_norm_sq: f64 = grid
        .nodes
        .iter()
        .map(|y| apply_q(&fam, &data, t, y).norm_sqr() * grid.cell)
        .sum();
    let ratio = (q_norm_sq / f_norm_sq).sqrt();

    // Normal operator values.
    let sample = apply_qstarq(&fam, &data, t, None)?;
    let mut f = File::create(record(manifest, dir, "normal_operator.csv"))?;
    sample.to_csv(&fam.k_grid.nodes, &mut f)?;

    let y_samples: Vec<DVector<f64>> = (-4..=4)
        .map(|k| DVector::from_vec(vec![k as f64 * 0.01]))
        .collect();
    let delta = phase_lower_bound(&fam, t, &y_samples);
    let json = serde_json::json!({
        "q_norm_ratio": ratio,
        "phase_lower_bound_delta": delta,
        "squeezing": { "c1": fam.squeezing.0, "c2": fam.squeezing.1 },
        "h": cfg.h,
    });
    std::fs::write(record(manifest, dir, "superpose.json"), json.to_string())?;

    // Concentration sweep of the modified normal operator across one dyadic
    // step in h: fitted factor against the ray average plus the error-budget
    // terms of the compared bound.
    let alpha = registry::alpha_by_id(&cfg.alpha, 1)?;
    let profile = |z: &DVector<f64>| (-z.norm_squared() / 0.08).exp();
    let mut sweep = Vec::new();
    for h in [cfg.h, cfg.h / 2.0] {
        let per = ((1.9 / (h.sqrt() / 8.0)).ceil() as usize).max(8);
        let kg = KGrid::uniform(
            DVector::from_vec(vec![-1.1]),
            DVector::from_vec(vec![0.8]),
            per,
        );
        let mut fc2 = FamilyConfig::new(h, 0.3);
        fc2.policy = CutoffPolicy::WidthScaled { kappa: 3.0 };
        fc2.seed = cfg.seed;
        let fam2 = build_family(&metric, &|_| C64::new(1.0, 0.0), &phi, kg, &fc2, None)?;
        let ansatz = build_lifted_ansatz(
            &fam2,
            &alpha,
            &profile,
            0.3,
            cfg.epsilon,
            &DVector::from_vec(vec![1.0]),
            16,
            DataTransport::Flow,
            None,
        )?;
        let report = bridge_comparison(&ansatz, &fam2, &profile);
        let kappa = beamlab::coefficients::modulus_kappa(
            beamlab::coefficients::RegularityClass::Zygmund,
            h,
        )?;
        sweep.push(serde_json::json!({
            "h": h,
            "epsilon": cfg.epsilon,
            "factor": report.fitted_c,
            "rel_shape_error": report.rel_l2_error,
            "error_bound_terms": {
                "kappa_term": h.powf(-1.0 - cfg.epsilon) * kappa,
                "sqrt_h_term": h.sqrt(),
            },
        }));
    }
    std::fs::write(
        record(manifest, dir, "concentration.json"),
        serde_json::Value::Array(sweep).to_string(),
    )?;

    manifest.assert_check(
        "q_norm_ratio",
        (ratio - 1.0).abs() <= 2.0 * cfg.h.sqrt(),
        format!("ratio {ratio:.6}"),
    );
    manifest.assert_check(
        "phase_lower_bound",
        delta > 0.0,
        format!("delta {delta:.4}"),
    );
    Ok(())
}

fn run_xray(
    cfg: &ExperimentConfig,
    manifest: &mut RunManifest,
    dir: &Path,
) -> Result<(), CoreError> {
    let phantom = registry::phantom_by_id(&cfg.phantom)?;
    let n = cfg.grid_n.max(32);
    let dirs = if n >= 256 { 360 } else { 180 };
    let thetas = theta_grid(dirs);
    let offsets = offset_grid(2 * n, 2.0);
    let f = phantom.as_fn();
    let sino = xray_forward_euclid(&f, &thetas, &offsets, 1.45, 2e-3);
    let mut file = File::create(record(manifest, dir, "sinogram.csv"))?;
    sino.to_csv(&mut file)?;
    std::fs::write(
        record(manifest, dir, "sinogram.svg"),
        heatmap_svg("sinogram", &sino.values, offsets.len(), thetas.len()),
    )?;

    let rec = reconstruct(&sino, 0.0, &ReconstructionSpec { n, half: 1.0 })?;
    let mut file = File::create(record(manifest, dir, "reconstruction.bin"))?;
    rec.write_binary(&mut file)?;
    std::fs::write(
        record(manifest, dir, "reconstruction.svg"),
        heatmap_svg("reconstruction", &rec.data, rec.nx, rec.ny),
    )?;

    let truth = Grid2::centered_square(n, 1.0).from_fn(phantom.as_fn());
    let rel = rec.rel_l2_error(&truth);
    let cal = calibration_scalar(&rec, &truth);
    let json = serde_json::json!({
        "phantom": phantom.name,
        "rel_l2_error": rel,
        "calibration": cal,
        "directions": dirs,
        "grid": n,
        "support_warning": sino.support_warning,
    });
    std::fs::write(record(manifest, dir, "roundtrip.json"), json.to_string())?;

    // The 5% contract applies to smooth phantoms; the disk indicator is
    // reported without the assertion.
    if phantom.name != "disk" {
        manifest.assert_check(
            "roundtrip_rel_l2",
            rel <= 0.05,
            format!("relative L2 error {:.3}%", 100.0 * rel),
        );
    }
    Ok(())
}

fn run_wave(
    cfg: &ExperimentConfig,
    manifest: &mut RunManifest,
    dir: &Path,
) -> Result<(), CoreError> {
    let alpha = registry::alpha_by_id(&cfg.alpha, 1)?;
    let metric = registry::metric_by_id(&cfg.metric, 1)?;
    let hist = solve_wave_1d(
        &alpha,
        &metric,
        0.0,
        1.0,
        &|x| (std::f64::consts::PI * x).sin(),
        &|_| 0.0,
        cfg.t_end,
        cfg.grid_n.max(100),
        cfg.cfl,
    )?;
    let mut f = File::create(record(manifest, dir, "trace.csv"))?;
    writeln!(f, "t,left,right")?;
    for (t, v) in hist.trace.times.iter().zip(&hist.trace.values) {
        writeln!(f, "{t},{},{}", v[0], v[1])?;
    }
    let mut f = File::create(record(manifest, dir, "energy.csv"))?;
    writeln!(f, "t,energy")?;
    for (t, e) in &hist.energies {
        writeln!(f, "{t},{e}")?;
    }
    let drift = beamlab::wave::energy_drift(&hist);
    let json = serde_json::json!({
        "energy_drift": drift,
        "trace_norm_sq": hist.trace.norm_sq(cfg.m),
        "m": cfg.m,
        "dt": hist.dt,
        "dx": hist.dx,
    });
    std::fs::write(record(manifest, dir, "wave.json"), json.to_string())?;
    manifest.assert_check("energy_drift", drift <= 5e-3, format!("drift {drift:.3e}"));
    Ok(())
}

fn run_observability(
    cfg: &ExperimentConfig,
    manifest: &mut RunManifest,
    dir: &Path,
) -> Result<(), CoreError> {
    let alpha = registry::alpha_by_id(&cfg.alpha, 1)?;
    let metric = registry::metric_by_id(&cfg.metric, 1)?;
    let domain = registry::domain_by_id(&cfg.domain)?;
    let t_alpha = travel_time(&alpha, &metric, &domain, 4, cfg.seed).ok();
    let spec = EnsembleSpec {
        max_mode: cfg.max_mode,
        random_draws: cfg.ensemble_size,
        seed: cfg.seed,
    };
    let report = observability_ratio(
        &alpha,
        &metric,
        &spec,
        cfg.t_end,
        cfg.m,
        cfg.grid_n.max(400),
        cfg.cfl,
        t_alpha,
    )?;
    std::fs::write(
        record(manifest, dir, "observability.json"),
        serde_json::to_string_pretty(&report).expect("report serializes"),
    )?;
    let pts: Vec<(f64, f64)> = report
        .mode_ratios
        .iter()
        .map(|(k, r)| (*k as f64, *r))
        .collect();
    std::fs::write(
        record(manifest, dir, "ratio_vs_k.svg"),
        polyline_svg(
            "observability ratio r(k) across the eigenmode ladder",
            &[Series {
                label: "r(k)",
                points: pts,
            }],
            true,
        ),
    )?;
    manifest.assert_check(
        "min_ratio_positive",
        report.min_ratio > 0.0,
        format!("min ratio {:.4}", report.min_ratio),
    );
    Ok(())
}

fn run_sweep(
    cfg: &ExperimentConfig,
    manifest: &mut RunManifest,
    dir: &Path,
) -> Result<(), CoreError> {
    let metric = registry::metric_by_id(&cfg.metric, 1)?;
    let t_end = cfg.t_end.min(1.0);
    let ks: Vec<i32> = (cfg.sweep_k_lo..=cfg.sweep_k_hi).collect();
    let point = |k: &i32| -> Result<(f64, f64), CoreError> {
        let h = 2f64.powi(-*k);
        let z = DVector::zeros(1);
        let p = unit_speed_momentum(&metric, &z, &DVector::from_vec(vec![1.0]));
        let ray = free_flow(&metric, &PhasePoint::new(z.clone(), p.clone()), 1e-3, t_end)?;
        let chart = Arc::new(fermi_frame(&ray, &metric)?);
        let bc = BeamConfig::new(h).with_policy(CutoffPolicy::WidthScaled { kappa: 8.0 });
        let beam = propagate_beam(&metric, &chart, &z, &p, &bc)?;
        let n_t = 16;
        let stride = (beam.states.len() - 1) / n_t;
        let mut acc = 0.0;
        let mut prev = None;
        for j in 0..=n_t {
            let idx = (j * stride).min(beam.states.len() - 1);
            let r = schrodinger_residual_norm(&beam, &metric, idx, TimeDerivative::FlowRhs, None)?;
            if let Some(pr) = prev {
                acc += 0.5 * (pr + r) * (beam.dt * stride as f64);
            }
            prev = Some(r);
        }
        Ok((h, acc / h))
    };
    let results: Vec<(f64, f64)> = if cfg.serial {
        ks.iter().map(&point).collect::<Result<_, _>>()?
    } else {
        use rayon::prelude::*;
        ks.par_iter().map(point).collect::<Result<_, _>>()?
    };
    let hs: Vec<f64> = results.iter().map(|(h, _)| *h).collect();
    let es: Vec<f64> = results.iter().map(|(_, e)| *e).collect();
    let slope = loglog_slope(&hs, &es);
    let json = serde_json::json!({
        "target": "beam-residual",
        "points": results,
        "fitted_slope": slope,
    });
    std::fs::write(record(manifest, dir, "sweep.json"), json.to_string())?;
    std::fs::write(
        record(manifest, dir, "sweep.svg"),
        polyline_svg(
            "Duhamel error functional vs h (log-log)",
            &[Series {
                label: "error(h)",
                points: results,
            }],
            true,
        ),
    )?;
    let max_err = es.iter().cloned().fold(0.0, f64::max);
    if max_err < 1e-10 {
        // Exact beams (e.g. the Euclidean free particle) leave nothing but
        // round-off; a slope fit on noise is meaningless.
        manifest.assert_check(
            "duhamel_slope",
            true,
            format!("residuals at machine floor ({max_err:.2e}); beam exact on this metric"),
        );
    } else {
        manifest.assert_check(
            "duhamel_slope",
            (0.4..=1.1).contains(&slope),
            format!("slope {slope:.3}"),
        );
    }
    Ok(())
}
