//! Sampled regularity seminorms.
//!
//! The continuum definitions take suprema over all pairs `(x, y)`; here they
//! are estimated from below on a finite pair set (dyadic displacement ladder
//! crossed with a base-point grid).

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};

use super::{modulus_kappa, CoefficientField, RegularityClass};

/// One displacement pair: base point `x` and offset `y` (so that both
/// `x + y` and `x - y` are evaluable).
#[derive(Clone, Debug)]
pub struct PairSample {
    pub x: DVector<f64>,
    pub y: DVector<f64>,
}

/// Estimated seminorm with provenance. The estimate is a lower bound of the
/// continuum supremum and is monotone in the sample set.
#[derive(Clone, Debug, Serialize)]
pub struct ModulusReport {
    pub class: String,
    #[serde(rename = "estimate")]
    pub seminorm_estimate: f64,
    #[serde(rename = "samples")]
    pub sample_count: usize,
    #[serde(rename = "worst_pair")]
    pub max_violating_pair: (Vec<f64>, Vec<f64>),
}

/// Supremum of the class quotient over the sampled pairs.
pub fn seminorm(
    field: &CoefficientField,
    class: RegularityClass,
    samples: &[PairSample],
) -> Result<ModulusReport> {
    if samples.is_empty() {
        return Err(Error::EmptySamples {
            what: "seminorm pairs",
        });
    }
    let mut best = -1.0;
    let mut worst = (vec![], vec![]);
    for s in samples {
        let ynorm = s.y.norm();
        if !(ynorm > 0.0 && ynorm < 1.0) {
            continue;
        }
        let kappa = modulus_kappa(class, ynorm)?;
        let xp = &s.x + &s.y;
        let q = if class.uses_second_difference() {
            let xm = &s.x - &s.y;
            (field.eval(&xp) + field.eval(&xm) - 2.0 * field.eval(&s.x)).abs() / kappa
        } else {
            (field.eval(&xp) - field.eval(&s.x)).abs() / kappa
        };
        if q > best {
            best = q;
            worst = (s.x.iter().cloned().collect(), s.y.iter().cloned().collect());
        }
    }
    if best < 0.0 {
        return Err(Error::EmptySamples {
            what: "seminorm pairs inside (0,1)",
        });
    }
    Ok(ModulusReport {
        class: class.name(),
        seminorm_estimate: best,
        sample_count: samples.len(),
        max_violating_pair: worst,
    })
}

pub fn zygmund_seminorm(field: &CoefficientField, samples: &[PairSample]) -> Result<ModulusReport> {
    seminorm(field, RegularityClass::Zygmund, samples)
}

pub fn log_zygmund_seminorm(
    field: &CoefficientField,
    samples: &[PairSample],
) -> Result<ModulusReport> {
    seminorm(field, RegularityClass::LogZygmund, samples)
}

pub fn log_lipschitz_seminorm(
    field: &CoefficientField,
    samples: &[PairSample],
) -> Result<ModulusReport> {
    seminorm(field, RegularityClass::LogLipschitz, samples)
}

pub fn lipschitz_seminorm(
    field: &CoefficientField,
    samples: &[PairSample],
) -> Result<ModulusReport> {
    seminorm(field, RegularityClass::Lipschitz, samples)
}

/// Dyadic pair plan: displacements `|y| = 2^{-k}` for `k` in `k_range`, along
/// `+/- e_j`, crossed with a uniform base grid on `[lo, hi]^dim` (kept away
/// from the faces so `x +/- y` stays evaluable).
pub fn dyadic_pairs(
    dim: usize,
    lo: f64,
    hi: f64,
    base_per_axis: usize,
    k_range: std::ops::RangeInclusive<i32>,
) -> Vec<PairSample> {
    let mut out = Vec::new();
    let mut bases: Vec<DVector<f64>> = Vec::new();
    let mut idx = vec![0usize; dim];
    loop {
        let x = DVector::from_fn(dim, |d, _| {
            lo + (idx[d] as f64 + 0.5) / (base_per_axis as f64) * (hi - lo)
        });
        bases.push(x);
        // Odometer increment.
        let mut d = 0;
        loop {
            if d == dim {
                break;
            }
            idx[d] += 1;
            if idx[d] < base_per_axis {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
        if d == dim {
            break;
        }
    }
    for k in k_range {
        let step = 2f64.powi(-k);
        for x in &bases {
            for j in 0..dim {
                for sign in [1.0, -1.0] {
                    let mut y = DVector::zeros(dim);
                    y[j] = sign * step;
                    out.push(PairSample { x: x.clone(), y });
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::fixtures::*;

    #[test]
    fn constant_field_has_zero_seminorms() {
        let c = constant(1, 1.0);
        let pairs = dyadic_pairs(1, 0.0, 1.0, 16, 2..=8);
        for class in [
            RegularityClass::Lipschitz,
            RegularityClass::Zygmund,
            RegularityClass::LogLipschitz,
            RegularityClass::LogZygmund,
        ] {
            let rep = seminorm(&c, class, &pairs).unwrap();
            assert_eq!(rep.seminorm_estimate, 0.0);
        }
    }

    #[test]
    fn empty_samples_error() {
        let c = constant(1, 1.0);
        assert!(zygmund_seminorm(&c, &[]).is_err());
    }

    #[test]
    fn weierstrass_zygmund_bounded_lipschitz_divergent() {
        let w = weierstrass(1, 0.45);
        // Zygmund estimate stays below the frozen bound on a fine dyadic grid.
        let pairs = dyadic_pairs(1, 0.1, 0.9, 1024, 6..=14);
        let z = zygmund_seminorm(&w, &pairs).unwrap();
        assert!(
            z.seminorm_estimate < 40.0,
            "Z estimate {}",
            z.seminorm_estimate
        );
        // Lipschitz estimate at least doubles from |y| = 2^-6 to 2^-14. The
        // supremum needs a dense base grid to be resolved at the fine scale.
        let coarse = lipschitz_seminorm(&w, &dyadic_pairs(1, 0.1, 0.9, 4096, 6..=6)).unwrap();
        let fine = lipschitz_seminorm(&w, &dyadic_pairs(1, 0.1, 0.9, 4096, 14..=14)).unwrap();
        assert!(
            fine.seminorm_estimate >= 2.0 * coarse.seminorm_estimate,
            "no Lipschitz divergence: coarse {} fine {}",
            coarse.seminorm_estimate,
            fine.seminorm_estimate
        );
    }

    #[test]
    fn xlog_fixture_log_lipschitz_but_not_lipschitz() {
        let f = xlog(1);
        let coarse = lipschitz_seminorm(&f, &dyadic_pairs(1, 0.25, 0.75, 128, 5..=5)).unwrap();
        let fine = lipschitz_seminorm(&f, &dyadic_pairs(1, 0.25, 0.75, 128, 13..=13)).unwrap();
        assert!(fine.seminorm_estimate >= 1.5 * coarse.seminorm_estimate);
        let ll = log_lipschitz_seminorm(&f, &dyadic_pairs(1, 0.25, 0.75, 128, 5..=13)).unwrap();
        assert!(
            ll.seminorm_estimate < 5.0,
            "LL estimate {}",
            ll.seminorm_estimate
        );
    }

    #[test]
    fn nested_sample_monotonicity() {
        let w = weierstrass(1, 0.45);
        let small = dyadic_pairs(1, 0.1, 0.9, 16, 4..=8);
        let mut large = small.clone();
        large.extend(dyadic_pairs(1, 0.1, 0.9, 16, 9..=12));
        let a = zygmund_seminorm(&w, &small).unwrap().seminorm_estimate;
        let b = zygmund_seminorm(&w, &large).unwrap().seminorm_estimate;
        assert!(b >= a);
    }

    #[test]
    fn report_serializes_with_expected_fields() {
        let w = weierstrass(1, 0.45);
        let rep = zygmund_seminorm(&w, &dyadic_pairs(1, 0.2, 0.8, 8, 4..=6)).unwrap();
        let json = serde_json::to_value(&rep).unwrap();
        for key in ["class", "estimate", "samples", "worst_pair"] {
            assert!(json.get(key).is_some(), "missing key {key}");
        }
    }
}
