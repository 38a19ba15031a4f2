//! Superpositions of Gaussian beams: the operator `Q`, normal and modified
//! normal operators, squeezing/phase diagnostics and stationary-phase decay.

pub mod family;
pub mod qops;
pub mod stationary;

pub use family::{build_family, BeamFamily, FamilyConfig, KGrid};
pub use qops::{
    apply_modified_normal, apply_q, apply_qstarq, gradient_lower_bound, kernel_entry,
    phase_lower_bound, psi_tilde, qstarq_bruteforce, y_grid_for, NormalOperatorSample, YGrid,
};
pub use stationary::{stationary_phase_decay, DecayReport};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beams::CutoffPolicy;
    use crate::coefficients::fixtures::constant;
    use crate::geometry::{MetricField, SmoothScalar};
    use nalgebra::DVector;
    use num_complex::Complex64 as C64;

    fn v(vals: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(vals)
    }

    fn data_bump(z: &DVector<f64>) -> f64 {
        (-z.norm_squared() / 0.02).exp()
    }

    fn family_1d(h: f64, t_end: f64, curved_phase: bool) -> BeamFamily {
        let metric = MetricField::euclidean(1);
        let phi = if curved_phase {
            SmoothScalar::trig_sum(1, vec![(0.3, v(&[2.0]), std::f64::consts::FRAC_PI_2)])
        } else {
            SmoothScalar::linear(v(&[1.0]))
        };
        let per_axis = ((0.8 / (h.sqrt() / 8.0)).ceil() as usize).max(8);
        let k = KGrid::uniform(v(&[-0.4]), v(&[0.4]), per_axis);
        let mut cfg = FamilyConfig::new(h, t_end);
        cfg.policy = CutoffPolicy::WidthScaled { kappa: 4.0 };
        build_family(&metric, &|_| C64::new(1.0, 0.0), &phi, k, &cfg, None).unwrap()
    }

    #[test]
    fn q_of_zero_is_zero() {
        let fam = family_1d(2f64.powi(-5), 0.2, false);
        let w = vec![C64::new(0.0, 0.0); fam.k_grid.len()];
        let val = apply_q(&fam, &w, 0.1, &v(&[0.0]));
        assert_eq!(val, C64::new(0.0, 0.0));
    }

    #[test]
    fn single_node_degenerate_quadrature() {
        let metric = MetricField::euclidean(1);
        let phi = SmoothScalar::zero(1);
        let k = KGrid::uniform(v(&[-0.05]), v(&[0.05]), 1);
        let weight = k.weights[0];
        let fam = build_family(
            &metric,
            &|_| C64::new(1.0, 0.0),
            &phi,
            k,
            &FamilyConfig::new(0.01, 0.2),
            None,
        )
        .unwrap();
        let w = vec![C64::new(2.0, 1.0)];
        let y = v(&[0.01]);
        let t = 0.1;
        let norm = (std::f64::consts::TAU * fam.h).powf(-0.5);
        let direct = fam.beams[0].evaluate(t, &y) * C64::new(2.0, 1.0) * weight * norm;
        let q = apply_q(&fam, &w, t, &y);
        assert!((q - direct).norm() < 1e-14);
    }

    #[test]
    fn q_norm_preservation_trend() {
        // || Q f || / || f || -> 1 as h -> 0 for oscillatory data
        // f = A e^{i Phi / h}; the deviation is bounded by C sqrt(h).
        let t = 0.25;
        let mut hs = Vec::new();
        let mut devs = Vec::new();
        for k in 4..=9 {
            let h = 2f64.powi(-k);
            let fam = family_1d(h, t, true);
            let w = fam.data_at_launch(&data_bump);
            let f_norm_sq: f64 = w
                .iter()
                .zip(&fam.k_grid.weights)
                .map(|(wz, wgt)| wz.norm_sqr() * wgt)
                .sum();
            let grid = y_grid_for(&fam, t, None).unwrap();
            let q_norm_sq: f64 = grid
                .nodes
                .iter()
                .map(|y| apply_q(&fam, &w, t, y).norm_sqr() * grid.cell)
                .sum();
            let ratio = (q_norm_sq / f_norm_sq).sqrt();
            hs.push(h);
            devs.push((ratio - 1.0).abs());
        }
        // Upper-bound check: |ratio - 1| <= C sqrt(h) with a modest constant.
        for (h, dev) in hs.iter().zip(&devs) {
            assert!(
                *dev <= 2.0 * h.sqrt(),
                "deviation {dev} above sqrt-h budget at h = {h}"
            );
        }
        // The trend is at least square-root order.
        let slope = crate::grid::loglog_slope(&hs, &devs);
        assert!(slope >= 0.3, "|ratio - 1| slope {slope} below 0.3");
    }

    #[test]
    fn two_pass_matches_bruteforce_kernel() {
        let fam = family_1d(2f64.powi(-4), 0.2, false);
        let f_vals = fam.data_at_launch(&data_bump);
        let fast = apply_qstarq(&fam, &f_vals, 0.15, None).unwrap();
        let brute = qstarq_bruteforce(&fam, &f_vals, 0.15, None).unwrap();
        for (a, b) in fast.values.iter().zip(&brute) {
            assert!((a - b).norm() <= 1e-10 * b.norm().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn qstarq_of_zero_is_zero() {
        let fam = family_1d(2f64.powi(-4), 0.2, false);
        let f_vals = vec![C64::new(0.0, 0.0); fam.k_grid.len()];
        let out = apply_qstarq(&fam, &f_vals, 0.1, None).unwrap();
        assert!(out.values.iter().all(|z| z.norm_sqr() == 0.0));
    }

    #[test]
    fn disjoint_supports_give_exact_zero_kernel() {
        // Paper cutoff policy at n = 2: separations past the summed outer
        // radii annihilate the kernel entry exactly.
        let metric = MetricField::euclidean(2);
        let phi = SmoothScalar::zero(2);
        let h = 2f64.powi(-6);
        let k = KGrid::uniform(v(&[-0.4, -0.05]), v(&[0.4, 0.05]), 4);
        let mut cfg = FamilyConfig::new(h, 0.1);
        cfg.policy = CutoffPolicy::Paper;
        let fam = build_family(&metric, &|_| C64::new(1.0, 0.0), &phi, k, &cfg, None).unwrap();
        let grid = y_grid_for(&fam, 0.05, None).unwrap();
        let outer = fam.beams[0].cutoff.outer_radius;
        let positions = fam.positions_at(0.05);
        let mut checked_far = 0;
        let mut checked_near = 0;
        for iz in 0..fam.k_grid.len() {
            for izp in 0..fam.k_grid.len() {
                let sep = (&positions[iz] - &positions[izp]).norm();
                let entry = kernel_entry(&fam, iz, izp, 0.05, &grid);
                if sep >= 2.0 * outer {
                    assert_eq!(entry, C64::new(0.0, 0.0), "entry at separation {sep}");
                    checked_far += 1;
                } else if sep < 1e-9 {
                    assert!(entry.norm() > 0.0);
                    checked_near += 1;
                }
            }
        }
        assert!(checked_far > 0 && checked_near > 0);
    }

    #[test]
    fn squeezing_sandwich_on_all_shipped_metrics() {
        // 0 < c1 <= c2 < infinity on every registered non-trapping fixture.
        for id in ["euclidean", "conformal:mild", "conformal:ripple"] {
            let metric = crate::registry::metric_by_id(id, 1).unwrap();
            let phi = SmoothScalar::linear(v(&[1.0]));
            let k = KGrid::uniform(v(&[-0.25]), v(&[0.25]), 10);
            let fam = build_family(
                &metric,
                &|_| C64::new(1.0, 0.0),
                &phi,
                k,
                &FamilyConfig::new(0.01, 2.0),
                None,
            )
            .unwrap();
            let (c1, c2) = fam.squeezing;
            assert!(
                c1 > 0.0 && c2 >= c1 && c2.is_finite(),
                "{id}: c1 = {c1}, c2 = {c2}"
            );
        }
    }

    #[test]
    fn phase_lower_bound_positive() {
        let fam = family_1d(2f64.powi(-5), 0.3, true);
        let y_samples: Vec<DVector<f64>> = (-4..=4).map(|k| v(&[k as f64 * 0.01])).collect();
        let delta = phase_lower_bound(&fam, 0.25, &y_samples);
        assert!(delta > 0.0, "phase lower bound delta = {delta}");
    }

    #[test]
    fn gradient_lower_bound_positive() {
        let fam = family_1d(2f64.powi(-5), 0.3, true);
        let c = gradient_lower_bound(&fam, 0.25, 0.05, 9);
        assert!(c > 0.0, "gradient lower bound C = {c}");
    }

    #[test]
    fn constant_alpha_modified_operator_reduces_consistently() {
        // For alpha = c the modified kernel is the plain kernel times
        // exp(i c h^{-eps} u (x(t,z) - x(t,z'))); with a static family the
        // diagonal z = z' behaviour matches Q*Q and the off-diagonal phase
        // only damps.
        let metric = MetricField::euclidean(1);
        let phi = SmoothScalar::zero(1);
        let h = 2f64.powi(-5);
        let k = KGrid::uniform(v(&[-0.2]), v(&[0.2]), 32);
        let fam = build_family(
            &metric,
            &|_| C64::new(1.0, 0.0),
            &phi,
            k,
            &FamilyConfig::new(h, 0.2),
            None,
        )
        .unwrap();
        let f_vals = fam.data_at_launch(&data_bump);
        let alpha = constant(1, 1.0);
        let u = v(&[1.0]);
        let modified = apply_modified_normal(&fam, &f_vals, &alpha, 0.1, 0.5, &u, None).unwrap();
        let plain = apply_qstarq(&fam, &f_vals, 0.1, None).unwrap();
        let peak_mod = modified.values.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let peak_plain = plain.values.iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(
            peak_mod > 0.1 * peak_plain,
            "modified output collapsed: {peak_mod} vs {peak_plain}"
        );
        assert!(
            peak_mod <= 1.05 * peak_plain,
            "modified output exceeds plain: {peak_mod} vs {peak_plain}"
        );
    }
}
