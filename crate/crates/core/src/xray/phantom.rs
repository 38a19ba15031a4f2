//! Phantom registry for transform experiments.

use std::sync::Arc;

/// A 2-D test function with a known support radius.
#[derive(Clone)]
pub struct Phantom {
    pub name: String,
    pub support_radius: f64,
    eval: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
}

impl Phantom {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        (self.eval)(x, y)
    }

    pub fn as_fn(&self) -> impl Fn(f64, f64) -> f64 + '_ {
        move |x, y| (self.eval)(x, y)
    }
}

/// Ball-supported Gaussian-like bump.
pub fn gauss() -> Phantom {
    Phantom {
        name: "gauss".into(),
        support_radius: 1.0,
        eval: Arc::new(|x, y| {
            let r2 = x * x + y * y;
            if r2 >= 1.0 {
                0.0
            } else {
                (-r2 / 0.125).exp()
            }
        }),
    }
}

/// Indicator of the radius-0.7 disk.
pub fn disk() -> Phantom {
    Phantom {
        name: "disk".into(),
        support_radius: 0.7,
        eval: Arc::new(|x, y| if x * x + y * y <= 0.49 { 1.0 } else { 0.0 }),
    }
}

/// Smooth head-phantom lookalike: a few C^2 ellipse bumps of both signs.
pub fn shepp_like_smooth() -> Phantom {
    // (cx, cy, ax, ay, angle, amplitude)
    let ellipses: Vec<(f64, f64, f64, f64, f64, f64)> = vec![
        (0.0, 0.0, 0.72, 0.92, 0.0, 1.0),
        (0.0, -0.02, 0.66, 0.87, 0.0, -0.5),
        (0.22, 0.0, 0.11, 0.31, -0.31, -0.35),
        (-0.22, 0.0, 0.16, 0.41, 0.31, -0.35),
        (0.0, 0.35, 0.21, 0.25, 0.0, 0.3),
        (0.0, -0.45, 0.12, 0.12, 0.0, 0.25),
    ];
    Phantom {
        name: "shepp-like-smooth".into(),
        support_radius: 0.95,
        eval: Arc::new(move |x, y| {
            let mut v = 0.0;
            for (cx, cy, ax, ay, ang, amp) in &ellipses {
                let (s, c) = ang.sin_cos();
                let u = c * (x - cx) + s * (y - cy);
                let w = -s * (x - cx) + c * (y - cy);
                let q = (u / ax) * (u / ax) + (w / ay) * (w / ay);
                if q < 1.0 {
                    let b = 1.0 - q;
                    v += amp * b * b * b;
                }
            }
            v
        }),
    }
}

pub fn by_id(id: &str) -> Option<Phantom> {
    match id {
        "gauss" => Some(gauss()),
        "disk" => Some(disk()),
        "shepp-like-smooth" => Some(shepp_like_smooth()),
        _ => None,
    }
}
