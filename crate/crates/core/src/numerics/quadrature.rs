//! Convolutions of ellipse-supported densities by integration along rays.
//!
//! For a kernel `K` and the ellipse `E`, `∫_E K(z - w) dA(w)` is written in polar
//! coordinates centred at the evaluation point, `w = z + ρ e^{iθ}`. Each ray meets `E`
//! in an interval `[ρ_lo, ρ_hi]` (with `ρ_lo = 0` when `z ∈ E`), and for the kernels used
//! here the radial integral is elementary. What remains is a one-dimensional angular
//! integral with a smooth integrand:
//!
//! - interior points: periodic in `θ`, integrated by the trapezoidal rule,
//! - exterior points: supported on the cone of rays hitting `E`; the square-root
//!   behaviour at the tangent rays is removed by `θ = θ_c + w sin(πs/2)` and the result
//!   integrated with Gauss–Legendre in `s`.
//!
//! Each integral is refined by doubling the node count until two successive values agree
//! to the requested target.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::geometry::{ensure_finite, Ellipse, PlanePoint};
use crate::kernel::{confinement_potential, KernelParams};
use crate::{Error, Result};

/// Quadrature settings for ellipse convolutions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureLevel {
    /// Angular nodes at the coarsest level.
    pub nodes: usize,
    /// Maximum number of node doublings.
    pub refinements: u32,
    /// Absolute agreement required between successive levels.
    pub target: f64,
}

impl Default for QuadratureLevel {
    fn default() -> Self {
        QuadratureLevel {
            nodes: 256,
            refinements: 6,
            target: 1e-11,
        }
    }
}

impl QuadratureLevel {
    pub fn with_target(target: f64) -> Self {
        QuadratureLevel {
            target,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes < 8 {
            return Err(Error::invalid("quadrature needs at least 8 angular nodes"));
        }
        if self.refinements == 0 {
            return Err(Error::invalid("quadrature needs at least one refinement"));
        }
        if !(self.target > 0.0) {
            return Err(Error::invalid("quadrature target must be positive"));
        }
        Ok(())
    }
}

/// A converged quadrature value with its refinement estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
    pub nodes: usize,
}

struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    fn compute(n: usize) -> Self {
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..(n + 1) / 2 {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                dp = nf * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    fn get(n: usize) -> Arc<GaussLegendre> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(rule) = cache.lock().unwrap().get(&n) {
            return rule.clone();
        }
        let rule = Arc::new(GaussLegendre::compute(n));
        cache.lock().unwrap().insert(n, rule.clone());
        rule
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let rule = GaussLegendre::get(n);
    (rule.nodes.clone(), rule.weights.clone())
}

/// Intersection of the ray `z + ρ(cos θ, sin θ)`, `ρ ≥ 0`, with the ellipse.
#[inline]
fn ray_interval(e: &Ellipse, z: PlanePoint, level_minus_one: f64, c: f64, s: f64) -> Option<(f64, f64)> {
    let (ia2, ib2) = (1.0 / (e.a() * e.a()), 1.0 / (e.b() * e.b()));
    let qa = c * c * ia2 + s * s * ib2;
    let qb = 2.0 * (z.re * c * ia2 + z.im * s * ib2);
    let qc = level_minus_one;
    let disc = (qb * qb - 4.0 * qa * qc).max(0.0);
    let sq = disc.sqrt();
    if qc < 0.0 {
        // one positive root
        let hi = if qb <= 0.0 {
            (-qb + sq) / (2.0 * qa)
        } else {
            2.0 * qc / (-qb - sq)
        };
        Some((0.0, hi))
    } else {
        if qb >= 0.0 {
            return None;
        }
        let t = -qb + sq;
        Some((2.0 * qc / t, t / (2.0 * qa)))
    }
}

/// Cone of directions from an exterior point that meet the ellipse: `(centre, half-width)`.
fn tangent_cone(e: &Ellipse, z: PlanePoint, level_minus_one: f64) -> (f64, f64) {
    let (u, v) = (z.re / e.a(), z.im / e.b());
    if level_minus_one <= 1e-15 {
        // on the boundary: half-plane bounded by the tangent line
        let inward = PlanePoint::new(-u / e.a(), -v / e.b());
        return (inward.arg(), FRAC_PI_2);
    }
    let phi = v.atan2(u);
    // tangent points in scaled coordinates sit at phi ± acos(1/r), and tan(acos(1/r)) = sqrt(r² - 1)
    let beta = level_minus_one.sqrt().atan();
    let tp = PlanePoint::new(e.a() * (phi + beta).cos(), e.b() * (phi + beta).sin()) - z;
    let tm = PlanePoint::new(e.a() * (phi - beta).cos(), e.b() * (phi - beta).sin()) - z;
    let (dp, dm) = (tp / tp.norm(), tm / tm.norm());
    let cross = dp.re * dm.im - dp.im * dm.re;
    let dot = dp.re * dm.re + dp.im * dm.im;
    let half = 0.5 * cross.abs().atan2(dot);
    let mid = dp + dm;
    let centre = if mid.norm() > 1e-12 {
        mid.arg()
    } else {
        PlanePoint::new(-u / e.a(), -v / e.b()).arg()
    };
    (centre, half)
}

/// `∫_E K(z - w) dA(w)` given the radial integral `ray(cos θ, sin θ, ρ_lo, ρ_hi)` of
/// `K(-ρ e^{iθ}) ρ` over `[ρ_lo, ρ_hi]`.
pub fn ellipse_convolution<F>(
    level: &QuadratureLevel,
    e: &Ellipse,
    z: PlanePoint,
    ray: F,
) -> Result<Estimate<Complex64>>
where
    F: Fn(f64, f64, f64, f64) -> Complex64,
{
    level.validate()?;
    ensure_finite(z, "evaluation point")?;
    let qm1 = e.level(z) - 1.0;
    if qm1 < 0.0 {
        interior(level, e, z, qm1, ray)
    } else {
        exterior(level, e, z, qm1, ray)
    }
}

fn finish(
    level: &QuadratureLevel,
    mut step: impl FnMut(usize) -> Complex64,
) -> Result<Estimate<Complex64>> {
    let mut n = level.nodes;
    let mut prev = step(n);
    let mut error = f64::INFINITY;
    for _ in 0..level.refinements {
        n *= 2;
        let next = step(n);
        error = (next - prev).norm();
        prev = next;
        if error <= level.target {
            break;
        }
    }
    if error > 10.0 * level.target {
        return Err(Error::NumericalFailure {
            estimate: error,
            budget: 10.0 * level.target,
        });
    }
    Ok(Estimate {
        value: prev,
        error,
        nodes: n,
    })
}

fn interior<F>(level: &QuadratureLevel, e: &Ellipse, z: PlanePoint, qm1: f64, ray: F) -> Result<Estimate<Complex64>>
where
    F: Fn(f64, f64, f64, f64) -> Complex64,
{
    let eval = |theta: f64| {
        let (s, c) = theta.sin_cos();
        let (lo, hi) = ray_interval(e, z, qm1, c, s).expect("interior rays always exit");
        ray(c, s, lo, hi)
    };
    // nested trapezoidal sums: each doubling only evaluates the new odd nodes
    let mut sum = Complex64::new(0.0, 0.0);
    let mut have = 0usize;
    finish(level, |n| {
        let dt = 2.0 * PI / n as f64;
        if have == 0 {
            sum = (0..n).map(|k| eval(k as f64 * dt)).sum();
        } else {
            debug_assert_eq!(n, 2 * have);
            sum += (0..have).map(|k| eval((2 * k + 1) as f64 * dt)).sum::<Complex64>();
        }
        have = n;
        sum * dt
    })
}

fn exterior<F>(level: &QuadratureLevel, e: &Ellipse, z: PlanePoint, qm1: f64, ray: F) -> Result<Estimate<Complex64>>
where
    F: Fn(f64, f64, f64, f64) -> Complex64,
{
    let (centre, half) = tangent_cone(e, z, qm1);
    finish(level, |n| {
        let rule = GaussLegendre::get(n);
        rule.nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&sn, &wn)| {
                let (ss, cs) = (FRAC_PI_2 * sn).sin_cos();
                let theta = centre + half * ss;
                let jac = half * FRAC_PI_2 * cs;
                let (s, c) = theta.sin_cos();
                match ray_interval(e, z, qm1, c, s) {
                    Some((lo, hi)) if hi > lo => ray(c, s, lo, hi) * (wn * jac),
                    _ => Complex64::new(0.0, 0.0),
                }
            })
            .sum()
    })
}

/// `∫_0^ρ (-log r) r dr`
#[inline]
fn log_moment(rho: f64) -> f64 {
    if rho == 0.0 {
        0.0
    } else {
        rho * rho * (0.25 - 0.5 * rho.ln())
    }
}

/// `(W ⋆ μ_E)(z)` for the normalised indicator `μ_E` of `e`.
pub fn interaction_potential(
    p: &KernelParams,
    e: &Ellipse,
    z: PlanePoint,
    level: &QuadratureLevel,
) -> Result<Estimate<f64>> {
    let alpha = p.alpha();
    let norm = 1.0 / e.area();
    let est = ellipse_convolution(level, e, z, |c, _s, lo, hi| {
        let radial = log_moment(hi) - log_moment(lo);
        let aniso = alpha * c * c * 0.5 * (hi * hi - lo * lo);
        Complex64::new(norm * (radial + aniso), 0.0)
    })?;
    Ok(Estimate {
        value: est.value.re,
        error: est.error,
        nodes: est.nodes,
    })
}

/// `P(z) = (W ⋆ μ_E)(z) + |z|²/2` by quadrature.
pub fn potential_on_ellipse_measure(
    p: &KernelParams,
    e: &Ellipse,
    z: PlanePoint,
    level: &QuadratureLevel,
) -> Result<f64> {
    Ok(interaction_potential(p, e, z, level)?.value + confinement_potential(z))
}

/// `∇P(z)` by quadrature of the kernel gradient (packed as `∂x + i∂y`).
pub fn potential_gradient_on_ellipse_measure(
    p: &KernelParams,
    e: &Ellipse,
    z: PlanePoint,
    level: &QuadratureLevel,
) -> Result<PlanePoint> {
    let half_alpha = 0.5 * p.alpha();
    let norm = 1.0 / e.area();
    let est = ellipse_convolution(level, e, z, |c, s, lo, hi| {
        let e1 = Complex64::new(c, s);
        let e3 = e1 * e1 * e1;
        (e1 + half_alpha * (e3 - e1.conj())) * (norm * (hi - lo))
    })?;
    Ok(est.value + z)
}

/// `ΔP(z)` at a point strictly outside the ellipse, by quadrature.
///
/// Off the support the logarithmic part is harmonic and only the anisotropic kernel
/// `Δ(x²/|z|²) = -2 cos 2θ / |z|²` contributes, plus `2` from the confinement.
pub fn potential_laplacian_exterior(
    p: &KernelParams,
    e: &Ellipse,
    z: PlanePoint,
    level: &QuadratureLevel,
) -> Result<f64> {
    ensure_finite(z, "evaluation point")?;
    if e.level(z) <= 1.0 {
        return Err(Error::domain("exterior Laplacian requested inside the ellipse"));
    }
    let scale = -2.0 * p.alpha() / e.area();
    let est = ellipse_convolution(level, e, z, |c, s, lo, hi| {
        let cos2 = c * c - s * s;
        Complex64::new(scale * cos2 * (hi / lo).ln(), 0.0)
    })?;
    Ok(est.value.re + 2.0)
}

/// `((1/(πz)) ⋆ χ_E)(z)` by quadrature.
pub fn cauchy_transform_numeric(e: &Ellipse, z: PlanePoint, level: &QuadratureLevel) -> Result<Complex64> {
    // 1/(z - w) = -e^{-iθ}/ρ
    let est = ellipse_convolution(level, e, z, |c, s, lo, hi| {
        -Complex64::new(c, -s) * ((hi - lo) / PI)
    })?;
    Ok(est.value)
}

/// `((1/π)(z/z̄²) ⋆ χ_E)(z)` by quadrature.
pub fn zbar2_potential_numeric(e: &Ellipse, z: PlanePoint, level: &QuadratureLevel) -> Result<Complex64> {
    // (z - w)/(z̄ - w̄)² = -e^{3iθ}/ρ
    let est = ellipse_convolution(level, e, z, |c, s, lo, hi| {
        let e1 = Complex64::new(c, s);
        -(e1 * e1 * e1) * ((hi - lo) / PI)
    })?;
    Ok(est.value)
}

/// `((1/π)(z/z̄) ⋆ χ_E)(z)` by quadrature.
pub fn z_over_zbar_potential_numeric(e: &Ellipse, z: PlanePoint, level: &QuadratureLevel) -> Result<Complex64> {
    // (z - w)/(z̄ - w̄) = e^{2iθ}
    let est = ellipse_convolution(level, e, z, |c, s, lo, hi| {
        let e1 = Complex64::new(c, s);
        e1 * e1 * (0.5 * (hi * hi - lo * lo) / PI)
    })?;
    Ok(est.value)
}

/// The equilibrium constant: `P(0)` for the candidate ellipse of `p`.
pub fn c0_of(p: &KernelParams, level: &QuadratureLevel) -> Result<f64> {
    let e = crate::analytic::candidate_axes(p)?;
    potential_on_ellipse_measure(p, &e, PlanePoint::new(0.0, 0.0), level)
}
