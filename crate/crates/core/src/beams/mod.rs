//! Gaussian beams along rays: Riccati Hessian evolution, deformation matrix,
//! amplitude transport, cutoffs, evaluation and residual diagnostics.

pub mod cutoff;
pub mod hessian;
pub mod propagate;
pub mod residual;

pub use cutoff::{CutoffPolicy, CutoffSpec};
pub use hessian::{hessian_matrices, HessianTriple};
pub use propagate::{amplitude, propagate_beam, riccati_step, y_step, Beam, BeamConfig, BeamState};
pub use residual::{
    eikonal_transport_residuals, schrodinger_residual_at, schrodinger_residual_norm, TimeDerivative,
};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{fermi_frame, free_flow, MetricField, PhasePoint, SmoothScalar};
    use approx::assert_abs_diff_eq;
    use nalgebra::{DMatrix, DVector};
    use num_complex::Complex64 as C64;
    use std::sync::Arc;

    fn v(vals: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(vals)
    }

    fn ci(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn free_triple(n: usize) -> HessianTriple {
        HessianTriple {
            d: DMatrix::zeros(n, n),
            b: DMatrix::zeros(n, n),
            c: DMatrix::identity(n, n),
        }
    }

    #[test]
    fn riccati_free_particle_closed_form() {
        let triple = free_triple(1);
        let mut m = DMatrix::from_element(1, 1, ci(0.0, 1.0));
        let dt = 1e-3;
        for _ in 0..1000 {
            m = riccati_step(&m, &triple, dt).unwrap();
        }
        // M(1) = 1/(1 - i) = (1 + i)/2.
        assert!(
            (m[(0, 0)] - ci(0.5, 0.5)).norm() < 1e-10,
            "M(1) = {}",
            m[(0, 0)]
        );
    }

    #[test]
    fn riccati_zero_triple_constant() {
        let n = 2;
        let triple = HessianTriple {
            d: DMatrix::zeros(n, n),
            b: DMatrix::zeros(n, n),
            c: DMatrix::zeros(n, n),
        };
        let m0 = DMatrix::from_diagonal(&DVector::from_vec(vec![ci(0.3, 1.0), ci(-0.2, 2.0)]));
        let m1 = riccati_step(&m0, &triple, 0.37).unwrap();
        assert!((m1 - m0).map(|v| v.norm()).max() < 1e-15);
    }

    #[test]
    fn riccati_n2_diagonal_decoupling() {
        let triple = free_triple(2);
        let mut m = DMatrix::identity(2, 2).map(|x| ci(0.0, x));
        let dt = 1e-3;
        for _ in 0..1000 {
            m = riccati_step(&m, &triple, dt).unwrap();
        }
        let expect = ci(1.0, 1.0) / ci(2.0, 0.0); // (t + i)/(1 + t^2) at t = 1
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { expect } else { ci(0.0, 0.0) };
                assert!((m[(i, j)] - want).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn y_step_free_particle() {
        let triple = free_triple(1);
        let mut m = DMatrix::from_element(1, 1, ci(0.0, 1.0));
        let mut y = DMatrix::from_element(1, 1, ci(1.0, 0.0));
        let dt = 1e-3;
        for _ in 0..1000 {
            y = y_step(&y, &m, &triple, dt).unwrap();
            m = riccati_step(&m, &triple, dt).unwrap();
        }
        // Y(1) = 1 + i.
        assert!(
            (y[(0, 0)] - ci(1.0, 1.0)).norm() < 1e-10,
            "Y(1) = {}",
            y[(0, 0)]
        );
        // LKK at t = 1: det Im M * |det Y|^2 = (1/2) * 2 = 1.
        let lkk = m[(0, 0)].im * y[(0, 0)].norm_sqr();
        assert_abs_diff_eq!(lkk, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn y_zero_triple_constant() {
        let n = 2;
        let triple = HessianTriple {
            d: DMatrix::zeros(n, n),
            b: DMatrix::zeros(n, n),
            c: DMatrix::zeros(n, n),
        };
        let m = DMatrix::identity(2, 2).map(|x| ci(0.0, x));
        let y0 = DMatrix::identity(2, 2).map(|x| ci(x, 0.0));
        let y1 = y_step(&y0, &m, &triple, 0.7).unwrap();
        assert!((y1 - y0).map(|v| v.norm()).max() < 1e-15);
    }

    #[test]
    fn amplitude_closed_form_and_trivial() {
        // Free particle: a(1) = 1/sqrt(1 + i), |a| = 2^{-1/4}.
        let ys: Vec<DMatrix<C64>> = (0..=100)
            .map(|k| {
                let t = k as f64 / 100.0;
                DMatrix::from_element(1, 1, ci(1.0, t))
            })
            .collect();
        let a = amplitude(ci(1.0, 0.0), &ys).unwrap();
        assert_abs_diff_eq!(a.norm(), 2f64.powf(-0.25), epsilon = 1e-12);
        // Y = Id: a = a0.
        let ys = vec![DMatrix::from_element(1, 1, ci(1.0, 0.0))];
        let a = amplitude(ci(0.3, -0.4), &ys).unwrap();
        assert!((a - ci(0.3, -0.4)).norm() < 1e-15);
    }

    fn free_beam(n: usize, h: f64, t_end: f64) -> (MetricField, Beam) {
        let m = MetricField::euclidean(n);
        let z = DVector::zeros(n);
        let mut p = DVector::zeros(n);
        p[0] = 1.0;
        let ray = free_flow(&m, &PhasePoint::new(z.clone(), p.clone()), 1e-3, t_end).unwrap();
        let chart = Arc::new(fermi_frame(&ray, &m).unwrap());
        let cfg = BeamConfig::new(h).with_policy(CutoffPolicy::WidthScaled { kappa: 4.0 });
        let beam = propagate_beam(&m, &chart, &z, &p, &cfg).unwrap();
        (m, beam)
    }

    #[test]
    fn propagate_free_particle_matches_closed_forms() {
        for n in [1usize, 2] {
            let (_, beam) = free_beam(n, 2f64.powi(-6), 5.0);
            for st in beam.states.iter().step_by(250) {
                let t = st.t;
                // x(t) = z + t e_1.
                assert_abs_diff_eq!(st.x[0], t, epsilon = 1e-9);
                // M(t) = (t + i)/(1 + t^2) Id.
                let m_exact = ci(t, 1.0) / ci(1.0 + t * t, 0.0);
                for i in 0..n {
                    for j in 0..n {
                        let want = if i == j { m_exact } else { ci(0.0, 0.0) };
                        assert!(
                            (st.m[(i, j)] - want).norm() < 1e-8,
                            "M mismatch at t = {t}: {} vs {want}",
                            st.m[(i, j)]
                        );
                    }
                }
                // Y(t) = (1 + i t) Id.
                for i in 0..n {
                    assert!((st.y[(i, i)] - ci(1.0, t)).norm() < 1e-8);
                }
                // a(t) = (1 + i t)^{-n/2}.
                let a_exact = ci(1.0, t).powf(-(n as f64) / 2.0);
                assert!((st.a - a_exact).norm() < 1e-8, "a mismatch at t = {t}");
                // phase on ray stays real and equals H t = t/2.
                assert_abs_diff_eq!(st.phase0, 0.5 * t, epsilon = 1e-9);
                // Im M positive definite.
                assert!(st.min_eig_im_m() > 0.0);
            }
        }
    }

    #[test]
    fn indefinite_initial_hessian_raises_blowup() {
        let m = MetricField::euclidean(1);
        let z = v(&[0.0]);
        let p = v(&[1.0]);
        let ray = free_flow(&m, &PhasePoint::new(z.clone(), p.clone()), 1e-3, 1.0).unwrap();
        let chart = Arc::new(fermi_frame(&ray, &m).unwrap());
        let cfg = BeamConfig::new(0.01).with_m0(DMatrix::from_element(1, 1, ci(0.0, -1.0)));
        match propagate_beam(&m, &chart, &z, &p, &cfg) {
            Err(crate::error::Error::RiccatiBlowup { .. }) => {}
            other => panic!(
                "expected Riccati blow-up, got {:?}",
                other.map(|b| b.duration())
            ),
        }
    }

    #[test]
    fn lkk_invariant_constant_on_conformal_beam() {
        let phi = SmoothScalar::trig_sum(
            2,
            vec![(0.2, v(&[1.0, -1.3]), 0.3), (0.12, v(&[2.1, 0.7]), 1.2)],
        );
        let metric = MetricField::conformal(phi);
        let z = v(&[0.1, -0.05]);
        let p = crate::geometry::unit_speed_momentum(&metric, &z, &v(&[0.8, 0.6]));
        let ray = free_flow(&metric, &PhasePoint::new(z.clone(), p.clone()), 1e-3, 5.0).unwrap();
        let chart = Arc::new(fermi_frame(&ray, &metric).unwrap());
        let cfg = BeamConfig::new(2f64.powi(-6));
        let beam = propagate_beam(&metric, &chart, &z, &p, &cfg).unwrap();
        let l0 = beam.states[0].lkk_invariant();
        for st in beam.states.iter().step_by(100) {
            let drift = (st.lkk_invariant() - l0).abs() / l0;
            assert!(drift < 1e-6, "LKK drift {drift} at t = {}", st.t);
        }
    }

    #[test]
    fn amplitude_from_y_matches_integrated_amplitude() {
        // Lemma-style route (sqrt det Y with unwrapping, chart amplitude)
        // against the jointly integrated amplitude, which carries the extra
        // half-density factor (det g(x0)/det g(xt))^{1/4} in global
        // coordinates.
        let phi = SmoothScalar::trig_sum(1, vec![(0.2, v(&[1.7]), 0.4)]);
        let metric = MetricField::conformal(phi);
        let z = v(&[0.0]);
        let p = crate::geometry::unit_speed_momentum(&metric, &z, &v(&[1.0]));
        let ray = free_flow(&metric, &PhasePoint::new(z.clone(), p.clone()), 1e-3, 3.0).unwrap();
        let chart = Arc::new(fermi_frame(&ray, &metric).unwrap());
        let cfg = BeamConfig::new(0.01);
        let beam = propagate_beam(&metric, &chart, &z, &p, &cfg).unwrap();
        let ys: Vec<DMatrix<C64>> = beam.states.iter().map(|s| s.y.clone()).collect();
        let a_lemma = amplitude(ci(1.0, 0.0), &ys).unwrap();
        let last = beam.states.last().unwrap();
        let half_density = (metric.sqrt_det_g(&z) / metric.sqrt_det_g(&last.x)).sqrt();
        let a_joint = last.a;
        let expected = a_lemma * ci(half_density, 0.0);
        assert!(
            (expected - a_joint).norm() < 1e-9,
            "{expected} vs {a_joint}"
        );
    }

    #[test]
    fn transport_equation_consistency() {
        // Chart form on the free particle: da/dt + (a/2) tr(H_pp M + H_xp)
        // = 0 exactly; on a conformal metric the amplitude satisfies the
        // Laplace-Beltrami transport da/dt + (a/2)(tr(C M) + b . p) = 0.
        // Both are checked with a 5-point stencil on the stored amplitudes.
        let m_euclid = MetricField::euclidean(1);
        let z = v(&[0.0]);
        let p0 = v(&[1.0]);
        let ray = free_flow(
            &m_euclid,
            &PhasePoint::new(z.clone(), p0.clone()),
            1e-3,
            1.0,
        )
        .unwrap();
        let chart = Arc::new(fermi_frame(&ray, &m_euclid).unwrap());
        let beam = propagate_beam(&m_euclid, &chart, &z, &p0, &BeamConfig::new(0.01)).unwrap();
        let check = |metric: &MetricField, beam: &Beam| -> f64 {
            let dt = beam.dt;
            let i = beam.states.len() / 2;
            let a = |k: usize| beam.states[k].a;
            let da = (-a(i + 2) + a(i + 1) * ci(8.0, 0.0) - a(i - 1) * ci(8.0, 0.0) + a(i - 2))
                / ci(12.0 * dt, 0.0);
            let st = &beam.states[i];
            let triple = hessian_matrices(metric, &st.x, &st.p);
            let tr = (crate::beams::propagate::to_c(&triple.c) * &st.m).trace()
                + ci(metric.lb_drift(&st.x).dot(&st.p), 0.0);
            (da + st.a * tr * ci(0.5, 0.0)).norm()
        };
        assert!(check(&m_euclid, &beam) < 1e-8, "euclidean transport");

        let phi = SmoothScalar::trig_sum(1, vec![(0.18, v(&[1.3]), 0.9)]);
        let metric = MetricField::conformal(phi);
        let p = crate::geometry::unit_speed_momentum(&metric, &z, &v(&[1.0]));
        let ray = free_flow(&metric, &PhasePoint::new(z.clone(), p.clone()), 1e-3, 1.0).unwrap();
        let chart = Arc::new(fermi_frame(&ray, &metric).unwrap());
        let beam = propagate_beam(&metric, &chart, &z, &p, &BeamConfig::new(0.01)).unwrap();
        let residual = check(&metric, &beam);
        assert!(residual < 1e-8, "conformal transport residual {residual}");
    }

    #[test]
    fn evaluate_beam_on_ray_and_cutoff() {
        let (_, beam) = free_beam(1, 2f64.powi(-4), 1.0);
        let t = 0.5;
        let st = beam.state_at(t);
        let u = beam.evaluate(t, &st.x);
        assert!((u.norm() - st.a.norm()).abs() < 1e-12);
        // Outside the cutoff support the beam is exactly zero.
        let far = &st.x + v(&[beam.cutoff.outer_radius + 0.01]);
        assert_eq!(beam.evaluate(t, &far), ci(0.0, 0.0));
        // Gaussian decay bound with c = min eig Im M / 2.
        let c = 0.5 * st.min_eig_im_m();
        for k in 1..10 {
            let d = k as f64 * 0.02;
            let u = beam.evaluate(t, &(&st.x + v(&[d])));
            let bound = st.a.norm() * (-c * d * d / beam.h).exp();
            assert!(
                u.norm() <= bound * (1.0 + 1e-9),
                "decay violated at d = {d}"
            );
        }
    }

    #[test]
    fn free_particle_general_initial_hessian() {
        // M(t) = (M0^{-1} + t I)^{-1}, Y(t) = I + t M0, a = a0/sqrt(det Y)
        // for a non-diagonal symmetric M0 with SPD imaginary part.
        let n = 2;
        let metric = MetricField::euclidean(n);
        let z = DVector::zeros(n);
        let mut p = DVector::zeros(n);
        p[0] = 1.0;
        let ray = free_flow(&metric, &PhasePoint::new(z.clone(), p.clone()), 1e-3, 2.0).unwrap();
        let chart = Arc::new(fermi_frame(&ray, &metric).unwrap());
        let m0 = DMatrix::from_row_slice(
            2,
            2,
            &[ci(0.4, 1.3), ci(-0.2, 0.5), ci(-0.2, 0.5), ci(0.1, 0.9)],
        );
        let cfg = BeamConfig::new(0.01).with_m0(m0.clone());
        let beam = propagate_beam(&metric, &chart, &z, &p, &cfg).unwrap();
        let eye = DMatrix::identity(n, n).map(|v| ci(v, 0.0));
        for st in beam.states.iter().step_by(400) {
            let t = ci(st.t, 0.0);
            let m_exact = (m0.clone().try_inverse().unwrap() + &eye * t)
                .try_inverse()
                .unwrap();
            let y_exact = &eye + &m0 * t;
            assert!((&st.m - &m_exact).map(|v| v.norm()).max() < 1e-8, "M at t = {}", st.t);
            assert!((&st.y - &y_exact).map(|v| v.norm()).max() < 1e-8, "Y at t = {}", st.t);
            let a_exact = ci(1.0, 0.0) / y_exact.determinant().sqrt();
            assert!((st.a - a_exact).norm() < 1e-8, "a at t = {}", st.t);
        }
    }

    #[test]
    fn jsonl_export_round_trips() {
        let (_, beam) = free_beam(1, 0.05, 0.01);
        let mut buf = Vec::new();
        beam.to_jsonl(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), beam.states.len());
        let first: serde_json::Value = serde_json::from_str(lines[0]).unwrap();
        for key in [
            "t", "x", "p", "m_re", "m_im", "y_re", "y_im", "a_re", "a_im", "phase0",
        ] {
            assert!(first.get(key).is_some(), "missing jsonl key {key}");
        }
        assert_eq!(first["t"].as_f64().unwrap(), 0.0);
        assert_eq!(first["a_re"].as_f64().unwrap(), 1.0);
    }

    #[test]
    fn free_particle_beam_matches_exact_wave_packet() {
        // The cutoff beam agrees with the closed-form free Gaussian packet up
        // to tail truncation: || u - U ||_{L^2} <= h^{3/4} || u || holds with
        // room on the sweep range.
        for k in [4, 6, 8] {
            let h = 2f64.powi(-k);
            let (_, beam) = free_beam(1, h, 1.0);
            let t = 1.0;
            let st = beam.state_at(t);
            let mut err2 = 0.0;
            let mut norm2 = 0.0;
            let dx = h.sqrt() / 8.0;
            let m_exact = ci(t, 1.0) / ci(1.0 + t * t, 0.0);
            let a_exact = ci(1.0, t).powf(-0.5);
            let steps = (16.0 * beam.cutoff.outer_radius / dx) as i64;
            for j in -steps..=steps {
                let d = j as f64 * dx;
                let x = v(&[st.x[0] + d]);
                let psi = ci(0.5 * t + d, 0.0) + m_exact * ci(0.5 * d * d, 0.0);
                let u_exact = a_exact * (ci(0.0, 1.0) * psi / ci(h, 0.0)).exp();
                let u_beam = beam.evaluate(t, &x);
                err2 += (u_exact - u_beam).norm_sqr() * dx;
                norm2 += u_exact.norm_sqr() * dx;
            }
            let err = err2.sqrt();
            assert!(
                err <= norm2.sqrt().max(1.0) * h.powf(0.75),
                "h = {h}: truncation error {err} above budget"
            );
        }
    }
}
