//! Closed-form potentials of the normalised indicator of an ellipse.
//!
//! Everything here is expressed through `lambda = (a - b)/(a + b)` and the exterior
//! function `h(z) = 1/(z + sqrt(z² + c²))`, `c² = b² - a²`, which satisfies the boundary
//! identity `z̄ = lambda z + 2ab h(z)` on the ellipse. Inside the ellipse all potentials
//! are polynomials in `z` and `z̄`; outside they are built from `h`.

use serde::{Deserialize, Serialize};

use crate::geometry::{ensure_finite, BoundaryPoint, Ellipse, Membership, PlanePoint};
use crate::kernel::KernelParams;
use crate::{Error, Result};

/// Half-width of the excluded tube around the focal segment where `h` is undefined.
pub const BRANCH_TOL: f64 = 1e-10;

/// Coefficients of the interior gradient `∇P(z) = coef_z z + coef_zbar z̄`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradPCoefficients {
    pub coef_z: f64,
    pub coef_zbar: f64,
}

impl GradPCoefficients {
    pub fn apply(&self, z: PlanePoint) -> PlanePoint {
        z * self.coef_z + z.conj() * self.coef_zbar
    }

    pub fn max_abs(&self) -> f64 {
        self.coef_z.abs().max(self.coef_zbar.abs())
    }
}

pub fn lambda_of(e: &Ellipse) -> f64 {
    e.lambda()
}

fn distance_to_focal_segment(e: &Ellipse, z: PlanePoint) -> f64 {
    let f = e.focal_half_length();
    // the segment lies on the major axis
    let (along, across) = if e.a() >= e.b() {
        (z.re.abs(), z.im.abs())
    } else {
        (z.im.abs(), z.re.abs())
    };
    if along <= f {
        across
    } else {
        (along - f).hypot(across)
    }
}

/// `h(z) = 1/(z + sqrt(z² + c²))` on the branch with `h(z) ~ 1/(2z)` at infinity.
///
/// Of the two roots `w` of `w² = z² + c²`, the products `(z + w)(z - w) = -c²` show that
/// exactly one of `|z ± w|` exceeds `sqrt|c²|` off the focal segment; that one is used.
pub fn h_function(e: &Ellipse, z: PlanePoint) -> Result<PlanePoint> {
    ensure_finite(z, "point")?;
    if distance_to_focal_segment(e, z) <= BRANCH_TOL {
        return Err(Error::domain(format!(
            "h is undefined on the focal segment (z = {z})"
        )));
    }
    let w = (z * z + e.c2()).sqrt();
    let plus = z + w;
    let minus = z - w;
    let denom = if plus.norm_sqr() >= minus.norm_sqr() { plus } else { minus };
    Ok(1.0 / denom)
}

fn is_outside(e: &Ellipse, z: PlanePoint) -> Result<bool> {
    Ok(e.contains(z)? == Membership::Exterior)
}

/// Cauchy transform `((1/(πz)) ⋆ χ_E)(z)`: `z̄ - λz` on `E`, `2ab h(z)` off `E`.
pub fn cauchy_transform_chi(e: &Ellipse, z: PlanePoint) -> Result<PlanePoint> {
    if is_outside(e, z)? {
        Ok(h_function(e, z)? * (2.0 * e.a() * e.b()))
    } else {
        Ok(z.conj() - z * e.lambda())
    }
}

/// `((1/(πz̄)) ⋆ χ_E)(z)`: `z - λz̄` on `E`, `2ab h(z̄)` off `E`.
pub fn conj_cauchy_transform_chi(e: &Ellipse, z: PlanePoint) -> Result<PlanePoint> {
    if is_outside(e, z)? {
        Ok(h_function(e, z.conj())? * (2.0 * e.a() * e.b()))
    } else {
        Ok(z - z.conj() * e.lambda())
    }
}

/// Bounded primitive in `z` of [`conj_cauchy_transform_chi`]; equals
/// `(1/π)(z/z̄) ⋆ χ_E` up to the additive constant [`primitive_constant`].
pub fn primitive_f(e: &Ellipse, z: PlanePoint) -> Result<PlanePoint> {
    if is_outside(e, z)? {
        let g = h_function(e, z.conj())? * (2.0 * e.a() * e.b());
        let big_h = z - z.conj() * e.lambda() - g;
        Ok(g * big_h + 0.5 * g * g)
    } else {
        let u = z - z.conj() * e.lambda();
        Ok(0.5 * u * u)
    }
}

/// The constant `λab` separating [`primitive_f`] from `(1/π)(z/z̄) ⋆ χ_E`.
pub fn primitive_constant(e: &Ellipse) -> f64 {
    e.lambda() * e.a() * e.b()
}

/// `((1/π)(z/z̄²) ⋆ χ_E)(z) = λ(z - λz̄)` for interior `z`.
///
/// Only the interior expression is provided.
pub fn zbar2_potential_inside(e: &Ellipse, z: PlanePoint) -> Result<PlanePoint> {
    if e.contains(z)? != Membership::Interior {
        return Err(Error::domain("z/z̄² potential is only available inside the ellipse"));
    }
    let l = e.lambda();
    Ok((z - z.conj() * l) * l)
}

/// Coefficients of `∇P` on `E` for the potential of the normalised indicator of `e`.
pub fn grad_p_coefficients(p: &KernelParams, e: &Ellipse) -> GradPCoefficients {
    let alpha = p.alpha();
    let l = e.lambda();
    let ab = e.a() * e.b();
    GradPCoefficients {
        coef_z: (-1.0 - alpha * l) / ab + 1.0,
        coef_zbar: (l + 0.5 * alpha + 0.5 * alpha * l * l) / ab,
    }
}

/// Semi-axes for which `∇P` vanishes on the ellipse.
///
/// Solves `αλ² + 2λ + α = 0` for the root in `(-1, 1)`, then `ab = 1 + αλ` together with
/// `a/b = (1 + λ)/(1 - λ)`.
pub fn candidate_axes(p: &KernelParams) -> Result<Ellipse> {
    let alpha = p.alpha();
    if !p.in_theorem_range() {
        return Err(Error::domain(format!(
            "candidate ellipse degenerates for |alpha| >= 1 (alpha = {alpha})"
        )));
    }
    let s = ((1.0 - alpha) * (1.0 + alpha)).sqrt();
    // rationalised form of (-1 + s)/alpha, also valid at alpha = 0
    let l = -alpha / (1.0 + s);
    let ab = 1.0 + alpha * l;
    let ratio = (1.0 + l) / (1.0 - l);
    let a = (ab * ratio).sqrt();
    let b = (ab / ratio).sqrt();
    Ellipse::new(a, b)
}

/// Exterior boundary limit of `ΔP` at `bp`, `(2/ab)(1 + α Re τ²)` with `τ` the unit tangent.
///
/// The Cauchy integral `(1/(iz)) ⋆ τ̄² dz` jumps by `-2π τ̄²` across the boundary, which
/// fixes the sign of the anisotropic term. At `(±a, 0)` the tangent is vertical and the
/// limit is smallest for `α > 0`.
pub fn boundary_laplacian_limit(p: &KernelParams, e: &Ellipse, bp: &BoundaryPoint) -> f64 {
    let tau2 = bp.tangent * bp.tangent;
    2.0 / (e.a() * e.b()) * (1.0 + p.alpha() * tau2.re)
}

/// `(2/ab)(1 - |α|)`, the lower bound of [`boundary_laplacian_limit`] over the boundary.
pub fn boundary_laplacian_bound(p: &KernelParams, e: &Ellipse) -> f64 {
    2.0 / (e.a() * e.b()) * (1.0 - p.alpha().abs())
}
