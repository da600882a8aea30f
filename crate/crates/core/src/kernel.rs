//! The interaction kernel `W(z) = -log|z| + alpha x²/|z|²` and related pointwise quantities.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::geometry::{ensure_finite, PlanePoint};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    alpha: f64,
}

impl KernelParams {
    /// Any finite `alpha` is accepted; see [`KernelParams::in_theorem_range`].
    pub fn new(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::NonFinite("alpha"));
        }
        Ok(KernelParams { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Whether `-1 < alpha < 1`, the range in which the ellipse is the minimiser.
    pub fn in_theorem_range(&self) -> bool {
        self.alpha.abs() < 1.0
    }

    /// A warning string for reports when `alpha` is outside `(-1, 1)`.
    pub fn range_warning(&self) -> Option<String> {
        (!self.in_theorem_range())
            .then(|| format!("alpha = {} is outside theorem range (-1, 1)", self.alpha))
    }

    /// The kernel with `alpha` negated; `W_{-alpha}(y, x) = W_alpha(x, y) + const`.
    pub fn negated(&self) -> Self {
        KernelParams { alpha: -self.alpha }
    }

    pub fn value(&self, z: PlanePoint) -> Result<f64> {
        ensure_finite(z, "kernel argument")?;
        let r2 = z.norm_sqr();
        if r2 == 0.0 {
            return Err(Error::Singular);
        }
        Ok(self.value_unchecked(z.re, r2))
    }

    #[inline]
    pub(crate) fn value_unchecked(&self, x: f64, r2: f64) -> f64 {
        -0.5 * r2.ln() + self.alpha * x * x / r2
    }

    /// Gradient `(∂W/∂x, ∂W/∂y)` packed as the complex number `2 ∂W/∂z̄`:
    /// `-1/z̄ + (alpha/2)(1/z - z/z̄²)`.
    pub fn gradient(&self, z: PlanePoint) -> Result<PlanePoint> {
        ensure_finite(z, "kernel argument")?;
        if z.norm_sqr() == 0.0 {
            return Err(Error::Singular);
        }
        Ok(self.gradient_unchecked(z))
    }

    #[inline]
    pub(crate) fn gradient_unchecked(&self, z: PlanePoint) -> PlanePoint {
        // real form of -1/z̄ + (α/2)(1/z − z/z̄²), avoiding complex divisions
        let (x, y) = (z.re, z.im);
        let r2 = x * x + y * y;
        let r4 = r2 * r2;
        let gx = -x / r2 + 2.0 * self.alpha * x * y * y / r4;
        let gy = -y / r2 - 2.0 * self.alpha * x * x * y / r4;
        PlanePoint::new(gx, gy)
    }

    /// Density part of the Fourier transform of `W`, `2π((1-α)ξ₁² + (1+α)ξ₂²)/|ξ|⁴`.
    /// The atom at the origin is not represented.
    pub fn fourier_density(&self, xi: PlanePoint) -> Result<f64> {
        ensure_finite(xi, "frequency")?;
        let r2 = xi.norm_sqr();
        if r2 == 0.0 {
            return Err(Error::Singular);
        }
        Ok(self.fourier_density_unchecked(xi.re, xi.im))
    }

    #[inline]
    pub(crate) fn fourier_density_unchecked(&self, k1: f64, k2: f64) -> f64 {
        let r2 = k1 * k1 + k2 * k2;
        2.0 * PI * ((1.0 - self.alpha) * k1 * k1 + (1.0 + self.alpha) * k2 * k2) / (r2 * r2)
    }
}

/// Confinement term `|z|²/2` of the potential.
pub fn confinement_potential(z: PlanePoint) -> f64 {
    0.5 * z.norm_sqr()
}
