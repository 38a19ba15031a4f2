//! Domain specifications: interval, unit ball, rectangle.

use nalgebra::DVector;

use super::metric::MetricField;

#[derive(Clone, Debug)]
pub enum DomainKind {
    Interval { a: f64, b: f64 },
    UnitBall { dim: usize },
    Rectangle { lo: DVector<f64>, hi: DVector<f64> },
}

/// A bounded domain with signed boundary distance and outward normal.
#[derive(Clone, Debug)]
pub struct DomainSpec {
    kind: DomainKind,
}

impl DomainSpec {
    pub fn interval(a: f64, b: f64) -> Self {
        assert!(b > a);
        Self {
            kind: DomainKind::Interval { a, b },
        }
    }

    pub fn unit_interval() -> Self {
        Self::interval(0.0, 1.0)
    }

    pub fn unit_ball(dim: usize) -> Self {
        Self {
            kind: DomainKind::UnitBall { dim },
        }
    }

    pub fn rectangle(lo: DVector<f64>, hi: DVector<f64>) -> Self {
        assert_eq!(lo.len(), hi.len());
        Self {
            kind: DomainKind::Rectangle { lo, hi },
        }
    }

    pub fn kind(&self) -> &DomainKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            DomainKind::Interval { .. } => 1,
            DomainKind::UnitBall { dim } => *dim,
            DomainKind::Rectangle { lo, .. } => lo.len(),
        }
    }

    /// Signed distance to the boundary: negative inside, positive outside.
    pub fn boundary_distance(&self, x: &DVector<f64>) -> f64 {
        match &self.kind {
            DomainKind::Interval { a, b } => (a - x[0]).max(x[0] - b),
            DomainKind::UnitBall { .. } => x.norm() - 1.0,
            DomainKind::Rectangle { lo, hi } => (0..lo.len())
                .map(|i| (lo[i] - x[i]).max(x[i] - hi[i]))
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }

    pub fn inside(&self, x: &DVector<f64>) -> bool {
        self.boundary_distance(x) < 0.0
    }

    /// Euclidean outward normal direction at (or near) the boundary.
    pub fn euclid_normal(&self, x: &DVector<f64>) -> DVector<f64> {
        match &self.kind {
            DomainKind::Interval { a, b } => {
                let mid = 0.5 * (a + b);
                DVector::from_vec(vec![if x[0] >= mid { 1.0 } else { -1.0 }])
            }
            DomainKind::UnitBall { dim } => {
                let n = x.norm();
                if n > 0.0 {
                    x / n
                } else {
                    let mut e = DVector::zeros(*dim);
                    e[0] = 1.0;
                    e
                }
            }
            DomainKind::Rectangle { lo, hi } => {
                // Face with the largest signed face distance.
                let mut best = f64::NEG_INFINITY;
                let mut normal = DVector::zeros(lo.len());
                for i in 0..lo.len() {
                    if lo[i] - x[i] > best {
                        best = lo[i] - x[i];
                        normal = DVector::zeros(lo.len());
                        normal[i] = -1.0;
                    }
                    if x[i] - hi[i] > best {
                        best = x[i] - hi[i];
                        normal = DVector::zeros(lo.len());
                        normal[i] = 1.0;
                    }
                }
                normal
            }
        }
    }

    /// Outward unit conormal `nu` at a boundary point, normalized so that
    /// `g^{kl} nu_k nu_l = 1`.
    pub fn boundary_normal(&self, x: &DVector<f64>, metric: &MetricField) -> DVector<f64> {
        let n = self.euclid_normal(x);
        let ginv = metric.eval_ginv(x);
        let scale = n.dot(&(&ginv * &n));
        &n / scale.max(0.0).sqrt()
    }

    /// Bounding box `(lo, hi)` for grid construction.
    pub fn bounding_box(&self) -> (DVector<f64>, DVector<f64>) {
        match &self.kind {
            DomainKind::Interval { a, b } => {
                (DVector::from_vec(vec![*a]), DVector::from_vec(vec![*b]))
            }
            DomainKind::UnitBall { dim } => (
                DVector::from_element(*dim, -1.0),
                DVector::from_element(*dim, 1.0),
            ),
            DomainKind::Rectangle { lo, hi } => (lo.clone(), hi.clone()),
        }
    }
}
