//! Plane points, axis-aligned ellipses and their boundary frames.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::solver::ParticleConfig;
use crate::{Error, Result};

/// A point `z = x + iy` of the plane, used interchangeably as a position and a complex scalar.
pub type PlanePoint = Complex64;

/// Relative tolerance used to classify points as lying on an ellipse boundary.
pub const MEMBERSHIP_TOL: f64 = 1e-12;

pub(crate) fn ensure_finite(z: PlanePoint, what: &'static str) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Membership {
    Interior,
    Boundary,
    Exterior,
}

/// Origin-centred, axis-aligned ellipse `x²/a² + y²/b² ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ellipse {
    a: f64,
    b: f64,
}

impl Ellipse {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::NonFinite("ellipse semi-axis"));
        }
        if a <= 0.0 || b <= 0.0 {
            return Err(Error::invalid(format!(
                "ellipse semi-axes must be positive, got ({a}, {b})"
            )));
        }
        Ok(Ellipse { a, b })
    }

    pub fn unit_disk() -> Self {
        Ellipse { a: 1.0, b: 1.0 }
    }

    /// Horizontal semi-axis.
    pub fn a(&self) -> f64 {
        self.a
    }

    /// Vertical semi-axis.
    pub fn b(&self) -> f64 {
        self.b
    }

    /// `(a - b) / (a + b)`, always in `(-1, 1)`.
    pub fn lambda(&self) -> f64 {
        (self.a - self.b) / (self.a + self.b)
    }

    /// `b² - a²`; negative for horizontally elongated ellipses.
    pub fn c2(&self) -> f64 {
        (self.b - self.a) * (self.b + self.a)
    }

    pub fn area(&self) -> f64 {
        PI * self.a * self.b
    }

    /// The ellipse with its axes exchanged, the image under `(x, y) -> (y, x)`.
    pub fn swapped(&self) -> Self {
        Ellipse { a: self.b, b: self.a }
    }

    /// Level function `x²/a² + y²/b²`.
    pub fn level(&self, z: PlanePoint) -> f64 {
        let u = z.re / self.a;
        let v = z.im / self.b;
        u * u + v * v
    }

    pub fn contains(&self, z: PlanePoint) -> Result<Membership> {
        ensure_finite(z, "point")?;
        let q = self.level(z);
        Ok(if (q - 1.0).abs() <= MEMBERSHIP_TOL {
            Membership::Boundary
        } else if q < 1.0 {
            Membership::Interior
        } else {
            Membership::Exterior
        })
    }

    /// Half-length of the focal segment; the segment lies on the major axis.
    pub fn focal_half_length(&self) -> f64 {
        self.c2().abs().sqrt()
    }

    /// Boundary frame at parameter `t` of `(a cos t, b sin t)`, counterclockwise.
    pub fn boundary_point(&self, t: f64) -> BoundaryPoint {
        let (s, c) = t.sin_cos();
        let point = PlanePoint::new(self.a * c, self.b * s);
        let d = PlanePoint::new(-self.a * s, self.b * c);
        let tangent = d / d.norm();
        // rotating the ccw tangent by -90° gives the exterior normal
        let normal = PlanePoint::new(tangent.im, -tangent.re);
        BoundaryPoint {
            point,
            tangent,
            normal,
            t,
        }
    }

    /// Perimeter by the periodic trapezoidal rule on the arc-length density.
    pub fn perimeter(&self) -> f64 {
        let n = 4096;
        let dt = 2.0 * PI / n as f64;
        (0..n)
            .map(|k| {
                let (s, c) = (k as f64 * dt).sin_cos();
                (self.a * s).hypot(self.b * c)
            })
            .sum::<f64>()
            * dt
    }

    /// Closest point of the ellipse to `z`, for `z` outside it.
    ///
    /// Newton iteration on the boundary parameter, solved in the first quadrant and
    /// reflected back. Returns the boundary frame at the projection.
    pub fn project_exterior(&self, z: PlanePoint) -> Result<BoundaryPoint> {
        ensure_finite(z, "point")?;
        if self.level(z) <= 1.0 {
            return Err(Error::domain("projection requires an exterior point"));
        }
        let (px, py) = (z.re.abs(), z.im.abs());
        let (a, b) = (self.a, self.b);
        let d = a * a - b * b;
        let g = |t: f64| {
            let (s, c) = t.sin_cos();
            a * px * s - b * py * c - d * s * c
        };
        let dg = |t: f64| {
            let (s, c) = t.sin_cos();
            a * px * c + b * py * s - d * (c * c - s * s)
        };
        let mut t = (py * a).atan2(px * b);
        let mut converged = false;
        for _ in 0..100 {
            let step = g(t) / dg(t);
            let next = (t - step).clamp(0.0, FRAC_PI_2);
            let moved = (next - t).abs();
            t = next;
            if moved < 1e-15 {
                converged = true;
                break;
            }
        }
        if !converged && g(t).abs() > 1e-12 * (a * px + b * py + d.abs()) {
            return Err(Error::domain("ellipse projection did not converge"));
        }
        let t = match (z.re < 0.0, z.im < 0.0) {
            (false, false) => t,
            (true, false) => PI - t,
            (true, true) => PI + t,
            (false, true) => -t,
        };
        Ok(self.boundary_point(t))
    }
}

/// A boundary point with its unit tangent (counterclockwise) and exterior unit normal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub point: PlanePoint,
    pub tangent: PlanePoint,
    pub normal: PlanePoint,
    /// Parameter of `(a cos t, b sin t)`.
    pub t: f64,
}

/// `n` i.i.d. draws from the normalised indicator of `e`, deterministic in `seed`.
pub fn sample_ellipse_uniform(e: &Ellipse, n: usize, seed: u64) -> Result<ParticleConfig> {
    if n == 0 {
        return Err(Error::invalid("sample size must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..n)
        .map(|_| {
            let r = rng.random::<f64>().sqrt();
            let theta = 2.0 * PI * rng.random::<f64>();
            let (s, c) = theta.sin_cos();
            PlanePoint::new(e.a * r * c, e.b * r * s)
        })
        .collect();
    ParticleConfig::new(points)
}
