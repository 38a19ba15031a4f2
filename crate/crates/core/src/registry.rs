//! String-addressed registries for metrics, domains, coefficient fields and
//! phantoms, shared by experiments and the CLI.

use nalgebra::DVector;

use crate::coefficients::{fixtures, CoefficientField};
use crate::error::{Error, Result};
use crate::geometry::{DomainSpec, MetricField, SmoothScalar};
use crate::xray::phantom::{self, Phantom};

/// `euclidean`, `conformal:mild`, `conformal:ripple`, `conformal:trap`.
pub fn metric_by_id(id: &str, dim: usize) -> Result<MetricField> {
    match id {
        "euclidean" => Ok(MetricField::euclidean(dim)),
        "conformal:mild" => {
            let mut k1 = DVector::zeros(dim);
            k1[0] = 1.0;
            if dim > 1 {
                k1[1] = 0.7;
            }
            Ok(MetricField::conformal(SmoothScalar::trig_sum(
                dim,
                vec![(0.05, k1, 0.3)],
            )))
        }
        "conformal:ripple" => {
            let mut k1 = DVector::zeros(dim);
            k1[0] = 2.0;
            let mut k2 = DVector::zeros(dim);
            k2[dim - 1] = -1.3;
            if dim > 1 {
                k2[0] = 0.4;
            }
            Ok(MetricField::conformal(SmoothScalar::trig_sum(
                dim,
                vec![(0.15, k1, 0.7), (0.08, k2, 1.2)],
            )))
        }
        "conformal:trap" => {
            if dim < 2 {
                return Err(Error::InvalidParameter {
                    name: "dim",
                    detail: "trap fixture needs dim >= 2".into(),
                });
            }
            Ok(MetricField::conformal(SmoothScalar::radial_bump(
                dim, 2.0, 0.3, 0.25,
            )))
        }
        other => Err(Error::UnknownFixture(other.into())),
    }
}

/// `interval`, `unit_ball:<n>`, `square`.
pub fn domain_by_id(id: &str) -> Result<DomainSpec> {
    if id == "interval" {
        return Ok(DomainSpec::unit_interval());
    }
    if id == "square" {
        return Ok(DomainSpec::rectangle(
            DVector::from_vec(vec![0.0, 0.0]),
            DVector::from_vec(vec![1.0, 1.0]),
        ));
    }
    if let Some(n) = id.strip_prefix("unit_ball:") {
        let dim: usize = n.parse().map_err(|_| Error::UnknownFixture(id.into()))?;
        return Ok(DomainSpec::unit_ball(dim));
    }
    Err(Error::UnknownFixture(id.into()))
}

/// `constant:<c>`, `bump`, `hat`, `weierstrass`, `weierstrass:<c>`, `xlog`,
/// `holder_half`, `antimonotone`.
pub fn alpha_by_id(id: &str, dim: usize) -> Result<CoefficientField> {
    if let Some(c) = id.strip_prefix("constant:") {
        let c: f64 = c.parse().map_err(|_| Error::UnknownFixture(id.into()))?;
        return Ok(fixtures::constant(dim, c));
    }
    if let Some(c) = id.strip_prefix("weierstrass:") {
        let c: f64 = c.parse().map_err(|_| Error::UnknownFixture(id.into()))?;
        return Ok(fixtures::weierstrass(dim, c));
    }
    match id {
        "constant" => Ok(fixtures::constant(dim, 1.0)),
        "bump" => Ok(fixtures::bump(dim)),
        "hat" => Ok(fixtures::hat(dim)),
        "weierstrass" => Ok(fixtures::weierstrass(dim, 0.45)),
        "xlog" => Ok(fixtures::xlog(dim)),
        "holder_half" => Ok(fixtures::holder_half(dim)),
        "antimonotone" => Ok(fixtures::antimonotone(dim)),
        "sign_indefinite" => Ok(fixtures::sign_indefinite(dim)),
        other => Err(Error::UnknownFixture(other.into())),
    }
}

pub fn phantom_by_id(id: &str) -> Result<Phantom> {
    phantom::by_id(id).ok_or_else(|| Error::UnknownFixture(id.into()))
}

/// All registered ids, for `list-fixtures`.
pub fn list_fixtures() -> Vec<(&'static str, Vec<&'static str>)> {
    vec![
        (
            "metric",
            vec![
                "euclidean",
                "conformal:mild",
                "conformal:ripple",
                "conformal:trap",
            ],
        ),
        ("domain", vec!["interval", "unit_ball:<n>", "square"]),
        (
            "alpha",
            vec![
                "constant",
                "constant:<c>",
                "bump",
                "hat",
                "weierstrass",
                "weierstrass:<c>",
                "xlog",
                "holder_half",
                "antimonotone",
                "sign_indefinite",
            ],
        ),
        ("phantom", vec!["gauss", "disk", "shepp-like-smooth"]),
    ]
}
