//! Property-based invariants across modules.

use nalgebra::DVector;
use proptest::prelude::*;
use std::sync::Arc;

use beamlab::coefficients::seminorm::{dyadic_pairs, lipschitz_seminorm, seminorm};
use beamlab::coefficients::{fixtures, modulus_kappa, CoefficientField, RegularityClass};
use beamlab::grid::Grid2;
use beamlab::xray::{offset_grid, theta_grid, xray_forward_euclid, RieszFilter};

fn scaled_field(base: &CoefficientField, c: f64) -> CoefficientField {
    let inner = base.clone();
    CoefficientField::new(
        format!("{}x{c}", inner.name),
        Arc::new(move |x: &DVector<f64>| c * inner.eval(x)),
        base.declared_class,
        (c.abs() * base.bounds.0, c.abs() * base.bounds.1),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// kappa_LL / kappa_Z = log(1 + 1/y) is monotone decreasing and at least
    /// log 2 on (0, 1).
    #[test]
    fn kappa_ratio_monotone_decreasing(y in 0.01f64..0.95, dy in 0.001f64..0.04) {
        let r1 = modulus_kappa(RegularityClass::LogLipschitz, y).unwrap()
            / modulus_kappa(RegularityClass::Zygmund, y).unwrap();
        let r2 = modulus_kappa(RegularityClass::LogLipschitz, y + dy).unwrap()
            / modulus_kappa(RegularityClass::Zygmund, y + dy).unwrap();
        prop_assert!(r2 <= r1 + 1e-12);
        prop_assert!(r1 >= std::f64::consts::LN_2 - 1e-12);
    }

    /// Scaling alpha -> c alpha multiplies every seminorm estimate by |c|.
    #[test]
    fn seminorm_scale_covariance(c in 0.1f64..5.0) {
        let base = fixtures::weierstrass(1, 0.45);
        let scaled = scaled_field(&base, c);
        let pairs = dyadic_pairs(1, 0.2, 0.8, 24, 4..=8);
        for class in [RegularityClass::Zygmund, RegularityClass::LogLipschitz] {
            let a = seminorm(&base, class, &pairs).unwrap().seminorm_estimate;
            let b = seminorm(&scaled, class, &pairs).unwrap().seminorm_estimate;
            prop_assert!((b - c * a).abs() <= 1e-9 * (1.0 + c * a));
        }
    }

    /// Zygmund estimate <= 2 x Lipschitz estimate on a sample set closed
    /// under y -> -y (triangle inequality on second differences).
    #[test]
    fn zygmund_dominated_by_twice_lipschitz(shift in 0.0f64..0.3, contrast in 0.05f64..0.45) {
        let field = CoefficientField::new(
            "shifted-weierstrass",
            {
                let s = shift;
                let c = contrast;
                Arc::new(move |x: &DVector<f64>| {
                    1.0 + c * fixtures::weierstrass_profile(x[0] + s)
                })
            },
            RegularityClass::Zygmund,
            (1.0 - contrast, 1.0 + contrast),
        );
        let pairs = dyadic_pairs(1, 0.2, 0.8, 32, 4..=9);
        let z = seminorm(&field, RegularityClass::Zygmund, &pairs).unwrap().seminorm_estimate;
        let l = lipschitz_seminorm(&field, &pairs).unwrap().seminorm_estimate;
        prop_assert!(z <= 2.0 * l + 1e-12, "Z {z} vs 2 Lip {l}");
    }

    /// X-ray transform linearity at quadrature precision.
    #[test]
    fn xray_linearity(a in -2.0f64..2.0, b in -2.0f64..2.0, w1 in 0.05f64..0.3, w2 in 0.05f64..0.3) {
        let f = move |x: f64, y: f64| (-(x * x + y * y) / w1).exp();
        let g = move |x: f64, y: f64| (-((x - 0.2) * (x - 0.2) + y * y) / w2).exp();
        let combo = move |x: f64, y: f64| a * f(x, y) + b * g(x, y);
        let thetas = theta_grid(3);
        let offsets = offset_grid(9, 0.8);
        let sf = xray_forward_euclid(&f, &thetas, &offsets, 1.2, 2e-3);
        let sg = xray_forward_euclid(&g, &thetas, &offsets, 1.2, 2e-3);
        let sc = xray_forward_euclid(&combo, &thetas, &offsets, 1.2, 2e-3);
        for i in 0..sc.values.len() {
            let want = a * sf.values[i] + b * sg.values[i];
            prop_assert!((sc.values[i] - want).abs() <= 1e-12 * (1.0 + want.abs()));
        }
    }

    /// Riesz multiplier composition: X^{-s} X^{s} is the identity on
    /// mean-zero periodic data.
    #[test]
    fn riesz_roundtrip(s in -1.2f64..1.2, kx in 1usize..5, ky in 1usize..5) {
        let n = 32;
        let g = Grid2::centered_square(n, 1.0).from_fn(|x, y| {
            (std::f64::consts::PI * kx as f64 * x).sin()
                * (std::f64::consts::PI * ky as f64 * y).cos()
        });
        let fwd = RieszFilter::new(s, n, n, g.dx, g.dy).unwrap();
        let inv = RieszFilter::new(-s, n, n, g.dx, g.dy).unwrap();
        let round = inv.apply(&fwd.apply(&g));
        let mean = g.data.iter().sum::<f64>() / g.data.len() as f64;
        for (a, b) in round.data.iter().zip(&g.data) {
            prop_assert!((a - (b - mean)).abs() < 1e-9);
        }
    }
}
