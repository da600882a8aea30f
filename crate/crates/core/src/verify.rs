//! Numerical certification of the equilibrium conditions for the candidate ellipse.
//!
//! Every check returns a [`VerificationReport`] holding the sampled values, a list of
//! named criteria and a [`Status`]. The status is decided by the criteria alone, except
//! that a check whose own error estimate exceeds its budget reports
//! [`Status::Inconclusive`].

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::analytic::{boundary_laplacian_bound, boundary_laplacian_limit, candidate_axes};
use crate::geometry::{Ellipse, PlanePoint};
use crate::kernel::KernelParams;
use crate::numerics::{
    c0_of, extrapolate_to_zero, fourier_energy_identity_check, plemelj_jump, plemelj_jump_extrapolated,
    potential_gradient_on_ellipse_measure, potential_laplacian_exterior, potential_on_ellipse_measure,
    CurveDiscretization, FrequencyBox, GridMeasure, QuadratureLevel,
};
use crate::solver::{empirical_stats, minimize, y_marginal_vs_semicircle, ParticleConfig, SolveParams};
use crate::{Error, Result};

/// Names accepted by [`run_check`] and the command line.
pub const CHECK_NAMES: [&str; 7] = ["el1", "el2", "laplacian", "minprinciple", "semicircle", "fourier", "plemelj"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    AtMost,
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Criterion {
    pub name: String,
    pub value: f64,
    pub bound: Bound,
    pub limit: f64,
    pub passed: bool,
}

impl Criterion {
    pub fn at_most(name: &str, value: f64, limit: f64) -> Self {
        Criterion {
            name: name.into(),
            value,
            bound: Bound::AtMost,
            limit,
            passed: value <= limit,
        }
    }

    pub fn at_least(name: &str, value: f64, limit: f64) -> Self {
        Criterion {
            name: name.into(),
            value,
            bound: Bound::AtLeast,
            limit,
            passed: value >= limit,
        }
    }
}

/// One evaluated quantity. For spatial checks `(x, y)` is the evaluation point; the
/// meaning of `value` and `deviation` is documented on each check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub label: String,
    pub x: f64,
    pub y: f64,
    pub value: f64,
    pub deviation: f64,
}

impl Sample {
    fn at(label: &str, z: PlanePoint, value: f64, deviation: f64) -> Self {
        Sample {
            label: label.into(),
            x: z.re,
            y: z.im,
            value,
            deviation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check: String,
    pub alpha: Option<f64>,
    pub parameters: BTreeMap<String, Value>,
    /// Reference constant, e.g. `C₀` for the Euler–Lagrange checks.
    pub reference: Option<f64>,
    pub criteria: Vec<Criterion>,
    pub samples: Vec<Sample>,
    pub status: Status,
    pub notes: Vec<String>,
    pub runtime_seconds: f64,
}

impl VerificationReport {
    fn new(check: &str, alpha: Option<f64>) -> Self {
        VerificationReport {
            check: check.into(),
            alpha,
            parameters: BTreeMap::new(),
            reference: None,
            criteria: Vec::new(),
            samples: Vec::new(),
            status: Status::Inconclusive,
            notes: Vec::new(),
            runtime_seconds: 0.0,
        }
    }

    fn param(&mut self, key: &str, v: Value) {
        self.parameters.insert(key.into(), v);
    }

    fn finish(mut self, start: Instant, inconclusive: bool) -> Self {
        self.status = if inconclusive {
            Status::Inconclusive
        } else if self.criteria.iter().all(|c| c.passed) {
            Status::Pass
        } else {
            Status::Fail
        };
        self.runtime_seconds = start.elapsed().as_secs_f64();
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn criterion(&self, name: &str) -> Option<&Criterion> {
        self.criteria.iter().find(|c| c.name == name)
    }

    /// Largest `|deviation|` over the samples.
    pub fn max_deviation(&self) -> f64 {
        self.samples.iter().map(|s| s.deviation.abs()).fold(0.0, f64::max)
    }

    /// The `k` samples with the largest `|deviation|`.
    pub fn worst(&self, k: usize) -> Vec<&Sample> {
        let mut v: Vec<&Sample> = self.samples.iter().collect();
        v.sort_by(|a, b| b.deviation.abs().total_cmp(&a.deviation.abs()));
        v.truncate(k);
        v
    }
}

/// Compares a report for `-α` with the report for `α` after exchanging `x` and `y`.
///
/// Swapping coordinates maps the kernel for `-α` to the kernel for `α` minus the constant
/// `α`, so potentials and `C₀` differ by that constant while their differences do not.
/// Returns the largest difference over matched sample deviations and criterion values,
/// or `None` when the reports do not describe the same experiment (different check,
/// status, criteria or sample locations).
pub fn duality_deviation(neg: &VerificationReport, pos: &VerificationReport) -> Option<f64> {
    if neg.check != pos.check || neg.status != pos.status || neg.samples.len() != pos.samples.len() {
        return None;
    }
    match (neg.alpha, pos.alpha) {
        (Some(a), Some(b)) if (a + b).abs() <= 1e-15 => {}
        _ => return None,
    }
    if neg.criteria.len() != pos.criteria.len() {
        return None;
    }
    let mut worst: f64 = 0.0;
    for (c, d) in neg.criteria.iter().zip(&pos.criteria) {
        if c.name != d.name || c.passed != d.passed {
            return None;
        }
        worst = worst.max((c.value - d.value).abs());
    }
    let scale = pos.samples.iter().map(|s| s.x.abs().max(s.y.abs())).fold(1.0, f64::max);
    let mut used = vec![false; pos.samples.len()];
    for s in &neg.samples {
        let hit = pos.samples.iter().enumerate().position(|(k, t)| {
            !used[k] && t.label == s.label && (t.x - s.y).abs() <= 1e-9 * scale && (t.y - s.x).abs() <= 1e-9 * scale
        })?;
        used[hit] = true;
        let t = &pos.samples[hit];
        worst = worst.max((t.deviation - s.deviation).abs());
    }
    Some(worst)
}

/// Radical inverse of `k` in base `b`.
fn halton(mut k: usize, b: usize) -> f64 {
    let (mut f, mut r) = (1.0, 0.0);
    while k > 0 {
        f /= b as f64;
        r += f * (k % b) as f64;
        k /= b;
    }
    r
}

/// `n` quasi-random points of the unit disk, closed under `(x, y) → (y, x)`.
fn disk_points(n: usize) -> Vec<PlanePoint> {
    let mut pts = Vec::with_capacity(n);
    let mut k = 1;
    while pts.len() < n {
        let r = halton(k, 2).sqrt() * 0.999;
        let th = 2.0 * PI * halton(k, 3);
        let z = PlanePoint::from_polar(r, th);
        pts.push(z);
        if pts.len() < n {
            pts.push(PlanePoint::new(z.im, z.re));
        }
        k += 1;
    }
    pts
}

/// EL1 on the candidate ellipse: `P` at `n_points` interior points against `C₀ = P(0)`.
///
/// Samples carry `value = P(z)` and `deviation = P(z) - C₀`.
pub fn check_el1(p: &KernelParams, n_points: usize, tol: f64, level: &QuadratureLevel) -> Result<VerificationReport> {
    let e = candidate_axes(p)?;
    check_el1_on(p, &e, n_points, tol, level)
}

/// EL1 on an arbitrary ellipse, with `P(0)` of that ellipse as the reference.
pub fn check_el1_on(
    p: &KernelParams,
    e: &Ellipse,
    n_points: usize,
    tol: f64,
    level: &QuadratureLevel,
) -> Result<VerificationReport> {
    let start = Instant::now();
    if n_points == 0 {
        return Err(Error::invalid("EL1 needs at least one point"));
    }
    let mut r = VerificationReport::new("el1", Some(p.alpha()));
    r.param("n_points", json!(n_points));
    r.param("tol", json!(tol));
    r.param("axes", json!([e.a(), e.b()]));
    r.param("quadrature_target", json!(level.target));
    let c0 = potential_on_ellipse_measure(p, e, PlanePoint::new(0.0, 0.0), level)?;
    r.reference = Some(c0);
    for u in disk_points(n_points) {
        let z = PlanePoint::new(e.a() * u.re, e.b() * u.im);
        let v = potential_on_ellipse_measure(p, e, z, level)?;
        r.samples.push(Sample::at("interior", z, v, v - c0));
    }
    let dev = r.max_deviation();
    r.criteria.push(Criterion::at_most("max_abs_deviation", dev, tol));
    Ok(r.finish(start, false))
}

/// Exterior sample points: a scaled-polar annulus around the ellipse and radial rays.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExteriorGrid {
    /// Boundary parameters `2πk/angles`; a multiple of 4 keeps the grid symmetric.
    pub angles: usize,
    pub radial: usize,
    /// Smallest relative gap `s - 1` for points `s·(a cos t, b sin t)`.
    pub inner_gap: f64,
    pub outer_radius: f64,
    /// Number of rays at angles `2πm/rays`.
    pub rays: usize,
    pub ray_samples: usize,
    pub ray_radius: f64,
}

impl Default for ExteriorGrid {
    fn default() -> Self {
        ExteriorGrid {
            angles: 64,
            radial: 24,
            inner_gap: 1e-4,
            outer_radius: 4.0,
            rays: 8,
            ray_samples: 24,
            ray_radius: 10.0,
        }
    }
}

impl ExteriorGrid {
    pub fn validate(&self) -> Result<()> {
        if self.angles == 0 || self.radial < 2 || self.rays == 0 || self.ray_samples < 2 {
            return Err(Error::invalid("exterior grid needs angles, rays and at least two radial samples"));
        }
        if !(self.inner_gap > 0.0) || !(self.outer_radius > 0.0) || !(self.ray_radius > 0.0) {
            return Err(Error::invalid("exterior grid radii must be positive"));
        }
        Ok(())
    }

    /// Labelled points, `"annulus"` then `"ray"`, all strictly outside `e`.
    pub fn points(&self, e: &Ellipse) -> Result<Vec<(&'static str, PlanePoint)>> {
        self.validate()?;
        let geometric = |lo: f64, hi: f64, n: usize| -> Vec<f64> {
            if hi <= lo {
                return vec![lo];
            }
            (0..n).map(|j| lo * (hi / lo).powf(j as f64 / (n - 1) as f64)).collect()
        };
        let mut out = Vec::new();
        for k in 0..self.angles {
            let bp = e.boundary_point(2.0 * PI * k as f64 / self.angles as f64).point;
            let s_max = self.outer_radius / bp.norm();
            for g in geometric(self.inner_gap, s_max - 1.0, self.radial) {
                out.push(("annulus", bp * (1.0 + g)));
            }
        }
        for m in 0..self.rays {
            let dir = PlanePoint::from_polar(1.0, 2.0 * PI * m as f64 / self.rays as f64);
            let r0 = 1.0 / ((dir.re / e.a()).powi(2) + (dir.im / e.b()).powi(2)).sqrt();
            for g in geometric(self.inner_gap, self.ray_radius / r0 - 1.0, self.ray_samples) {
                out.push(("ray", dir * (r0 * (1.0 + g))));
            }
        }
        Ok(out)
    }
}

/// EL2 on the candidate ellipse: `P - C₀ ≥ -tol` on the exterior grid.
///
/// Samples carry `value = P(z)` and `deviation = P(z) - C₀`.
pub fn check_el2(
    p: &KernelParams,
    grid: &ExteriorGrid,
    tol: f64,
    level: &QuadratureLevel,
) -> Result<VerificationReport> {
    let start = Instant::now();
    let e = candidate_axes(p)?;
    let mut r = VerificationReport::new("el2", Some(p.alpha()));
    r.param("grid", serde_json::to_value(grid)?);
    r.param("tol", json!(tol));
    r.param("quadrature_target", json!(level.target));
    let c0 = c0_of(p, level)?;
    r.reference = Some(c0);
    for (label, z) in grid.points(&e)? {
        let v = potential_on_ellipse_measure(p, &e, z, level)?;
        r.samples.push(Sample::at(label, z, v, v - c0));
    }
    let (argmin, min) = r
        .samples
        .iter()
        .map(|s| (PlanePoint::new(s.x, s.y), s.deviation))
        .fold((PlanePoint::new(0.0, 0.0), f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
    r.notes.push(format!(
        "minimum of P - C0 = {min:.3e} at level x^2/a^2 + y^2/b^2 = {:.6}",
        e.level(argmin)
    ));
    r.criteria.push(Criterion::at_least("min_p_minus_c0", min, -tol));
    Ok(r.finish(start, false))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaplacianSpec {
    pub n_boundary: usize,
    /// Normal offsets `δ` of the stencil centres; the stencil step is `δ/4`.
    pub offsets: Vec<f64>,
    /// Relative tolerance against the closed-form limit.
    pub rel_tol: f64,
    /// Absolute slack below the lower bound `(2/ab)(1 - |α|)`.
    pub bound_tol: f64,
}

impl Default for LaplacianSpec {
    fn default() -> Self {
        LaplacianSpec {
            n_boundary: 32,
            offsets: vec![0.02, 0.01, 0.005],
            rel_tol: 0.03,
            bound_tol: 1e-3,
        }
    }
}

/// Exterior boundary limit of `ΔP` from five-point Laplacians of the quadrature
/// potential at `bp + δn`, extrapolated polynomially to `δ = 0`.
///
/// Samples are boundary points with `value` the extrapolated Laplacian and `deviation`
/// its relative error against [`boundary_laplacian_limit`]. The check is inconclusive when
/// dropping the largest offset moves an estimate by more than half the tolerance, or when
/// the finite-difference noise implied by the quadrature target exceeds a tenth of it.
pub fn check_boundary_laplacian(
    p: &KernelParams,
    spec: &LaplacianSpec,
    level: &QuadratureLevel,
) -> Result<VerificationReport> {
    let start = Instant::now();
    if spec.n_boundary == 0 || spec.offsets.len() < 2 || spec.offsets.iter().any(|d| !(*d > 0.0)) {
        return Err(Error::invalid("laplacian check needs boundary points and at least two positive offsets"));
    }
    let e = candidate_axes(p)?;
    let mut r = VerificationReport::new("laplacian", Some(p.alpha()));
    r.param("n_boundary", json!(spec.n_boundary));
    r.param("offsets", json!(spec.offsets));
    r.param("rel_tol", json!(spec.rel_tol));
    r.param("bound_tol", json!(spec.bound_tol));
    let bound = boundary_laplacian_bound(p, &e);
    r.reference = Some(bound);

    let mut offsets = spec.offsets.clone();
    offsets.sort_by(|a, b| b.total_cmp(a));
    let (mut spread, mut min_est): (f64, f64) = (0.0, f64::INFINITY);
    let pot = |z| potential_on_ellipse_measure(p, &e, z, level);
    for k in 0..spec.n_boundary {
        let bp = e.boundary_point(2.0 * PI * k as f64 / spec.n_boundary as f64);
        let mut lap = Vec::with_capacity(offsets.len());
        for &d in &offsets {
            let z = bp.point + bp.normal * d;
            let h = 0.25 * d;
            let c = pot(z)?;
            let sum = pot(z + h)? + pot(z - h)? + pot(z + PlanePoint::new(0.0, h))? + pot(z - PlanePoint::new(0.0, h))?;
            lap.push((sum - 4.0 * c) / (h * h));
        }
        let est = extrapolate_to_zero(&offsets, &lap);
        let coarse = extrapolate_to_zero(&offsets[1..], &lap[1..]);
        let limit = boundary_laplacian_limit(p, &e, &bp);
        spread = spread.max((est - coarse).abs() / est.abs().max(1e-300));
        min_est = min_est.min(est);
        r.samples.push(Sample::at("boundary", bp.point, est, (est - limit) / limit));
    }
    let h_min = 0.25 * offsets.last().copied().unwrap_or(1.0);
    let c_scale = r.samples.iter().map(|s| PlanePoint::new(s.x, s.y).norm_sqr()).fold(1.0, f64::max);
    let noise = 8.0 * level.target * c_scale / (h_min * h_min);
    r.notes.push(format!(
        "extrapolation spread {spread:.3e} (relative), finite-difference noise estimate {noise:.3e}"
    ));
    let dev = r.max_deviation();
    r.criteria.push(Criterion::at_most("max_rel_error_vs_limit", dev, spec.rel_tol));
    r.criteria.push(Criterion::at_least("min_estimate", min_est, bound - spec.bound_tol));
    let inconclusive = spread > 0.5 * spec.rel_tol || noise > 0.1 * spec.rel_tol * bound;
    Ok(r.finish(start, inconclusive))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinPrincipleSpec {
    pub grid: ExteriorGrid,
    pub tol: f64,
    /// Gap `s - 1` at which boundary values of `h` are sampled.
    pub boundary_gap: f64,
    pub far_radius: f64,
    /// Relative tolerance for `h → ⟨a, n⟩` at `far_radius`.
    pub far_rel_tol: f64,
    pub ray_samples: usize,
}

impl Default for MinPrincipleSpec {
    fn default() -> Self {
        MinPrincipleSpec {
            grid: ExteriorGrid {
                radial: 16,
                ray_samples: 16,
                ..ExteriorGrid::default()
            },
            tol: 1e-6,
            boundary_gap: 1e-5,
            far_radius: 1000.0,
            far_rel_tol: 1e-2,
            ray_samples: 64,
        }
    }
}

/// The auxiliary function `h(z) = ⟨∇P(z), n⟩ - ½ ΔP(z) ⟨z - a, n⟩` for an exterior point `a`
/// with projection `a₀` and normal `n`.
///
/// Samples: `"grid"` and `"boundary"` carry `value = deviation = h(z)`; `"far"` carries
/// `h(z)` and its relative deviation from `⟨a, n⟩`; `"ray"` carries `P` at `a₀ + s n` and
/// the increment from the previous ray sample.
pub fn check_minimum_principle_h(
    p: &KernelParams,
    a_ext: PlanePoint,
    spec: &MinPrincipleSpec,
    level: &QuadratureLevel,
) -> Result<VerificationReport> {
    let start = Instant::now();
    let e = candidate_axes(p)?;
    let a0 = e.project_exterior(a_ext)?;
    let n = a0.normal;
    let dot = |u: PlanePoint, v: PlanePoint| u.re * v.re + u.im * v.im;
    let mut r = VerificationReport::new("minprinciple", Some(p.alpha()));
    r.param("a_ext", json!([a_ext.re, a_ext.im]));
    r.param("projection", json!([a0.point.re, a0.point.im]));
    r.param("normal", json!([n.re, n.im]));
    r.param("spec", serde_json::to_value(spec)?);
    let target = dot(a_ext, n);
    r.reference = Some(target);

    let h = |z: PlanePoint| -> Result<f64> {
        let g = potential_gradient_on_ellipse_measure(p, &e, z, level)?;
        let lap = potential_laplacian_exterior(p, &e, z, level)?;
        Ok(dot(g, n) - 0.5 * lap * dot(z - a_ext, n))
    };
    let mut grid_min = f64::INFINITY;
    for (_, z) in spec.grid.points(&e)? {
        let v = h(z)?;
        grid_min = grid_min.min(v);
        r.samples.push(Sample::at("grid", z, v, v));
    }
    let mut boundary_min = f64::INFINITY;
    for k in 0..spec.grid.angles {
        let z = e.boundary_point(2.0 * PI * k as f64 / spec.grid.angles as f64).point * (1.0 + spec.boundary_gap);
        let v = h(z)?;
        boundary_min = boundary_min.min(v);
        r.samples.push(Sample::at("boundary", z, v, v));
    }
    let mut far_dev: f64 = 0.0;
    for k in 0..8 {
        let z = PlanePoint::from_polar(spec.far_radius, PI * k as f64 / 4.0);
        let v = h(z)?;
        let d = (v - target) / target;
        far_dev = far_dev.max(d.abs());
        r.samples.push(Sample::at("far", z, v, d));
    }
    let len = (a_ext - a0.point).norm();
    let mut prev = None;
    let mut min_increment = f64::INFINITY;
    for j in 0..spec.ray_samples {
        let s = len * j as f64 / (spec.ray_samples - 1).max(1) as f64;
        // the first sample sits just off the boundary, where the exterior formulas apply
        let z = a0.point + n * s.max(spec.boundary_gap * len);
        let v = potential_on_ellipse_measure(p, &e, z, level)?;
        let inc = prev.map_or(0.0, |q: f64| v - q);
        if prev.is_some() {
            min_increment = min_increment.min(inc);
        }
        prev = Some(v);
        r.samples.push(Sample::at("ray", z, v, inc));
    }
    r.criteria.push(Criterion::at_least("min_h_grid", grid_min, -spec.tol));
    r.criteria.push(Criterion::at_least("min_h_boundary", boundary_min, -spec.tol));
    r.criteria.push(Criterion::at_least("limit_a_dot_n", target, f64::MIN_POSITIVE));
    r.criteria.push(Criterion::at_most("far_rel_deviation", far_dev, spec.far_rel_tol));
    r.criteria.push(Criterion::at_least("min_ray_increment", min_increment, -spec.tol));
    Ok(r.finish(start, false))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemicircleSpec {
    pub alphas: Vec<f64>,
    pub n: usize,
    pub tol_ks: f64,
    /// Half-width of the seeded uniform square start.
    pub start_half_width: f64,
    /// Defaults to `grad_tol = 1e-3`: near `α = 1` the descent needs tens of thousands of
    /// iterations to reach `1e-6` at `N = 2000`, while the marginal settles far earlier.
    pub solve: SolveParams,
}

impl Default for SemicircleSpec {
    fn default() -> Self {
        SemicircleSpec {
            alphas: vec![0.5, 0.7, 0.9, 0.95],
            n: 2000,
            tol_ks: 0.05,
            start_half_width: 1.0,
            solve: SolveParams {
                max_iters: 5000,
                grad_tol: 1e-3,
                ..SolveParams::default()
            },
        }
    }
}

/// Descent towards the vertical semicircle law as `α → 1`.
///
/// For each `α` the run starts from the same seeded square. Samples (label `"alpha"`)
/// store `x = α`, `y` the KS distance to the limit law of radius `√2`, `value` the KS
/// distance to the semicircle of radius `√(1+α)` and `deviation = E[x²] - (1-α)/4`.
/// The check requires both the distance to the limit law and `E[x²]` to decrease along
/// `alphas`, and the final KS distance against radius `√(1+α)` to be at most `tol_ks`.
pub fn check_semicircle_limit(spec: &SemicircleSpec) -> Result<VerificationReport> {
    let start = Instant::now();
    if spec.alphas.is_empty() || spec.alphas.iter().any(|a| !(*a > 0.0 && *a < 1.0)) {
        return Err(Error::invalid("semicircle alphas must lie in (0, 1)"));
    }
    if spec.alphas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("semicircle alphas must increase"));
    }
    let mut r = VerificationReport::new("semicircle", None);
    r.param("alphas", json!(spec.alphas));
    r.param("n", json!(spec.n));
    r.param("tol_ks", json!(spec.tol_ks));
    r.param("start_half_width", json!(spec.start_half_width));
    r.param("solve", serde_json::to_value(spec.solve)?);
    let start_cfg = ParticleConfig::uniform_square(spec.n, spec.start_half_width, spec.solve.seed)?;
    let mut all_converged = true;
    let mut rows = Vec::new();
    for &alpha in &spec.alphas {
        let p = KernelParams::new(alpha)?;
        let res = minimize(&p, &start_cfg, &spec.solve)?;
        if !res.converged {
            all_converged = false;
            r.notes.push(format!(
                "alpha = {alpha}: {}",
                res.diagnostic.as_deref().unwrap_or("not converged")
            ));
        }
        let stats = empirical_stats(&res.final_config)?;
        let ks = y_marginal_vs_semicircle(&res.final_config, (1.0 + alpha).sqrt())?;
        let ks_limit = y_marginal_vs_semicircle(&res.final_config, 2f64.sqrt())?;
        rows.push((ks_limit, stats.ex2));
        r.samples.push(Sample {
            label: "alpha".into(),
            x: alpha,
            y: ks_limit,
            value: ks,
            deviation: stats.ex2 - (1.0 - alpha) / 4.0,
        });
    }
    let worst_rise = |f: fn(&(f64, f64)) -> f64| {
        rows.windows(2).map(|w| f(&w[1]) - f(&w[0])).fold(f64::NEG_INFINITY, f64::max)
    };
    if rows.len() > 1 {
        r.criteria.push(Criterion::at_most("ks_to_limit_max_increase", worst_rise(|r| r.0), 0.0));
        r.criteria.push(Criterion::at_most("ex2_max_increase", worst_rise(|r| r.1), 0.0));
    }
    let last = r.samples.last().map(|s| s.value).unwrap_or(f64::INFINITY);
    r.criteria.push(Criterion::at_most("final_ks", last, spec.tol_ks));
    Ok(r.finish(start, !all_converged))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourierSpec {
    pub pairs: usize,
    /// Cells per side on `[-1, 1]²`.
    pub grid: usize,
    pub seed: u64,
    pub rel_tol: f64,
    pub cutoff: FrequencyBox,
}

impl Default for FourierSpec {
    fn default() -> Self {
        FourierSpec {
            pairs: 10,
            grid: 32,
            seed: 0,
            rel_tol: 0.05,
            cutoff: FrequencyBox::default(),
        }
    }
}

/// A random probability measure on the grid: a sum of one to three Gaussian bumps.
pub fn random_grid_measure(n: usize, rng: &mut impl Rng) -> Result<GridMeasure> {
    let bumps: Vec<(PlanePoint, f64, f64)> = (0..rng.random_range(1..=3))
        .map(|_| {
            let c = PlanePoint::new(rng.random_range(-0.4..0.4), rng.random_range(-0.4..0.4));
            (c, rng.random_range(0.12..0.25), rng.random_range(0.5..1.5))
        })
        .collect();
    GridMeasure::square(n, 1.0, |z| {
        bumps
            .iter()
            .map(|&(c, s, w)| w * (-(z - c).norm_sqr() / (2.0 * s * s)).exp())
            .sum()
    })?
    .normalized()
}

/// The energy identity on random pairs of grid measures.
///
/// Samples (label `"pair"`) store `x = lhs`, `y = rhs`, `value = lhs - rhs` and
/// `deviation` the relative gap.
pub fn check_fourier(p: &KernelParams, spec: &FourierSpec) -> Result<VerificationReport> {
    let start = Instant::now();
    if spec.pairs == 0 {
        return Err(Error::invalid("fourier check needs at least one pair"));
    }
    let mut r = VerificationReport::new("fourier", Some(p.alpha()));
    r.param("spec", serde_json::to_value(spec)?);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (mut min_lhs, mut min_rhs, mut all_nonneg) = (f64::INFINITY, f64::INFINITY, true);
    let mut first = None;
    for _ in 0..spec.pairs {
        let m1 = random_grid_measure(spec.grid, &mut rng)?;
        let m2 = random_grid_measure(spec.grid, &mut rng)?;
        let rep = fourier_energy_identity_check(p, &m1, &m2, &spec.cutoff)?;
        min_lhs = min_lhs.min(rep.lhs);
        min_rhs = min_rhs.min(rep.rhs);
        all_nonneg &= rep.rhs_nonnegative;
        r.samples.push(Sample {
            label: "pair".into(),
            x: rep.lhs,
            y: rep.rhs,
            value: rep.gap,
            deviation: rep.relative_gap,
        });
        first.get_or_insert(m1);
    }
    let m = first.expect("at least one pair");
    let same = fourier_energy_identity_check(p, &m, &m, &spec.cutoff)?;
    if !all_nonneg {
        r.notes.push("a Fourier-side term was negative".into());
    }
    let dev = r.max_deviation();
    r.criteria.push(Criterion::at_least("min_rhs", if all_nonneg { min_rhs } else { -1.0 }, 0.0));
    r.criteria.push(Criterion::at_least("min_lhs", min_lhs, -1e-8));
    r.criteria.push(Criterion::at_most("max_relative_gap", dev, spec.rel_tol));
    r.criteria.push(Criterion::at_most("coincident_abs_lhs", same.lhs.abs(), 1e-12));
    Ok(r.finish(start, false))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlemeljSpec {
    pub panels: usize,
    pub n_points: usize,
    pub tol: f64,
    /// Approach distance in units of the local panel length.
    pub delta_panels: f64,
    /// Panel counts `panels / 2^k`, `k < refinements`, used for the empirical order.
    pub refinements: usize,
    pub min_order: f64,
}

impl Default for PlemeljSpec {
    fn default() -> Self {
        PlemeljSpec {
            panels: 2048,
            n_points: 16,
            tol: 1e-8,
            delta_panels: 5.0,
            refinements: 4,
            min_order: 1.0,
        }
    }
}

/// Plemelj jump on `e`: extrapolated jumps of `1` and `ζ` against the data, and the
/// empirical convergence order for `ζ̄ + |ζ|²` with the approach distance tied to the
/// panel length.
///
/// At distance `δ` the jump carries an `O(δ)` bias, so the order is measured on the jump
/// extrapolated from `δ` and `2δ`; the raw order is reported in the notes.
///
/// Samples: `"one"` and `"identity"` carry `value = deviation = |jump - f(a)|`; `"order"`
/// samples store `x` = panels, `y` the worst raw jump error, `value` the worst
/// extrapolated error and `deviation` the local order against the previous level.
pub fn check_plemelj(e: &Ellipse, spec: &PlemeljSpec) -> Result<VerificationReport> {
    let start = Instant::now();
    if spec.n_points == 0 || spec.refinements < 2 || !(spec.delta_panels > 1.0) {
        return Err(Error::invalid("plemelj check needs points, two refinements and delta_panels > 1"));
    }
    let mut r = VerificationReport::new("plemelj", None);
    r.param("axes", json!([e.a(), e.b()]));
    r.param("spec", serde_json::to_value(spec)?);
    let curve = CurveDiscretization::ellipse(e, spec.panels)?;
    let targets: Vec<_> = (0..spec.n_points)
        .map(|k| e.boundary_point(2.0 * PI * (k as f64 + 0.37) / spec.n_points as f64))
        .collect();
    let ones = vec![Complex64::new(1.0, 0.0); curve.len()];
    let ident = curve.sample(|z| z);
    let (mut one_err, mut id_err): (f64, f64) = (0.0, 0.0);
    for a in &targets {
        let delta = spec.delta_panels * curve.nearest_panel(a.point).0;
        let j1 = plemelj_jump_extrapolated(&curve, &ones, a, delta, 4)?;
        let jz = plemelj_jump_extrapolated(&curve, &ident, a, delta, 4)?;
        let (d1, dz) = ((j1 - 1.0).norm(), (jz - a.point).norm());
        one_err = one_err.max(d1);
        id_err = id_err.max(dz);
        r.samples.push(Sample::at("one", a.point, d1, d1));
        r.samples.push(Sample::at("identity", a.point, dz, dz));
    }
    let f = |z: PlanePoint| z.conj() + z.norm_sqr();
    let mut errs: Vec<(usize, f64, f64)> = Vec::new();
    for k in (0..spec.refinements).rev() {
        let panels = spec.panels >> k;
        let c = CurveDiscretization::ellipse(e, panels)?;
        let data = c.sample(f);
        let (mut raw, mut rich): (f64, f64) = (0.0, 0.0);
        for a in &targets {
            let delta = spec.delta_panels * c.nearest_panel(a.point).0;
            raw = raw.max((plemelj_jump(&c, &data, a, delta)? - f(a.point)).norm());
            rich = rich.max((plemelj_jump_extrapolated(&c, &data, a, delta, 2)? - f(a.point)).norm());
        }
        let order = errs.last().map_or(0.0, |prev| (prev.2 / rich).log2());
        errs.push((panels, raw, rich));
        r.samples.push(Sample {
            label: "order".into(),
            x: panels as f64,
            y: raw,
            value: rich,
            deviation: order,
        });
    }
    let (first, last) = (errs[0], errs[errs.len() - 1]);
    let span = (last.0 as f64 / first.0 as f64).ln();
    let raw_order = (first.1 / last.1).ln() / span;
    let order = (first.2 / last.2).ln() / span;
    r.notes.push(format!(
        "empirical order: {order:.4} for the two-distance extrapolated jump, {raw_order:.4} for the raw jump"
    ));
    r.criteria.push(Criterion::at_most("jump_error_one", one_err, spec.tol));
    r.criteria.push(Criterion::at_most("jump_error_identity", id_err, spec.tol));
    r.criteria.push(Criterion::at_most("finest_error", last.2, first.2));
    r.criteria.push(Criterion::at_least("empirical_order", order, spec.min_order));
    Ok(r.finish(start, false))
}

/// Settings shared by [`run_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckSettings {
    pub level: QuadratureLevel,
    pub el1_points: usize,
    pub el1_tol: f64,
    pub el2_grid: ExteriorGrid,
    pub el2_tol: f64,
    pub laplacian: LaplacianSpec,
    pub min_principle: MinPrincipleSpec,
    /// Exterior point for the minimum principle; `None` uses `1.5 (a, b)/√2`.
    pub a_ext: Option<(f64, f64)>,
    pub semicircle: SemicircleSpec,
    pub fourier: FourierSpec,
    pub plemelj: PlemeljSpec,
}

impl Default for CheckSettings {
    fn default() -> Self {
        CheckSettings {
            level: QuadratureLevel::default(),
            el1_points: 200,
            el1_tol: 2e-5,
            el2_grid: ExteriorGrid::default(),
            el2_tol: 1e-5,
            laplacian: LaplacianSpec::default(),
            min_principle: MinPrincipleSpec::default(),
            a_ext: None,
            semicircle: SemicircleSpec::default(),
            fourier: FourierSpec::default(),
            plemelj: PlemeljSpec::default(),
        }
    }
}

/// Runs the named check (see [`CHECK_NAMES`]).
pub fn run_check(name: &str, p: &KernelParams, s: &CheckSettings) -> Result<VerificationReport> {
    match name {
        "el1" => check_el1(p, s.el1_points, s.el1_tol, &s.level),
        "el2" => check_el2(p, &s.el2_grid, s.el2_tol, &s.level),
        "laplacian" => check_boundary_laplacian(p, &s.laplacian, &s.level),
        "minprinciple" => {
            let e = candidate_axes(p)?;
            let a = match s.a_ext {
                Some((x, y)) => PlanePoint::new(x, y),
                None => PlanePoint::new(e.a(), e.b()) * (1.5 / 2f64.sqrt()),
            };
            check_minimum_principle_h(p, a, &s.min_principle, &s.level)
        }
        "semicircle" => check_semicircle_limit(&s.semicircle),
        "fourier" => check_fourier(p, &s.fourier),
        "plemelj" => check_plemelj(&candidate_axes(p)?, &s.plemelj),
        other => Err(Error::invalid(format!(
            "unknown check '{other}', expected one of {}",
            CHECK_NAMES.join(", ")
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn kp(alpha: f64) -> KernelParams {
        KernelParams::new(alpha).unwrap()
    }

    fn lv() -> QuadratureLevel {
        QuadratureLevel::default()
    }

    #[test]
    fn halton_points_are_symmetric_and_inside() {
        let pts = disk_points(200);
        assert_eq!(pts.len(), 200);
        assert!(pts.iter().all(|z| z.norm() < 1.0));
        for z in &pts {
            assert!(pts.iter().any(|w| (w.re - z.im).abs() < 1e-15 && (w.im - z.re).abs() < 1e-15));
        }
    }

    #[test]
    fn el1_disk() {
        let r = check_el1(&kp(0.0), 50, 1e-5, &lv()).unwrap();
        assert!(r.passed());
        assert_abs_diff_eq!(r.reference.unwrap(), 0.5, epsilon = 1e-10);
    }

    #[test]
    fn el1_wrong_ellipse_fails() {
        // grad P = 0.25 z̄ on the unit disk at α = 0.5, so P - P(0) = Re(z²)/8
        let p = kp(0.5);
        let r = check_el1_on(&p, &Ellipse::unit_disk(), 100, 2e-5, &lv()).unwrap();
        assert_eq!(r.status, Status::Fail);
        for s in &r.samples {
            let z = PlanePoint::new(s.x, s.y);
            assert_abs_diff_eq!(s.deviation, (z * z).re / 8.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn el2_disk_profile() {
        let grid = ExteriorGrid {
            angles: 8,
            radial: 6,
            ray_samples: 6,
            ..Default::default()
        };
        let r = check_el2(&kp(0.0), &grid, 1e-5, &lv()).unwrap();
        assert!(r.passed());
        for s in &r.samples {
            let rr = s.x.hypot(s.y);
            assert_abs_diff_eq!(s.deviation, -rr.ln() + 0.5 * rr * rr - 0.5, epsilon = 1e-9);
        }
    }

    #[test]
    fn exterior_grid_is_outside_and_symmetric() {
        let e = Ellipse::new(0.7, 1.3).unwrap();
        let g = ExteriorGrid::default();
        let pts = g.points(&e).unwrap();
        assert!(pts.iter().all(|(_, z)| e.level(*z) > 1.0));
        let swapped = g.points(&e.swapped()).unwrap();
        for (l, z) in &swapped {
            assert!(pts
                .iter()
                .any(|(m, w)| l == m && (w.re - z.im).abs() < 1e-12 && (w.im - z.re).abs() < 1e-12));
        }
        assert!(ExteriorGrid { radial: 1, ..g }.points(&e).is_err());
    }

    #[test]
    fn laplacian_disk() {
        let spec = LaplacianSpec {
            n_boundary: 4,
            ..Default::default()
        };
        let r = check_boundary_laplacian(&kp(0.0), &spec, &lv()).unwrap();
        assert!(r.passed(), "{:?}", r.criteria);
        for s in &r.samples {
            assert_abs_diff_eq!(s.value, 2.0, epsilon = 1e-3);
        }
    }

    #[test]
    fn min_principle_disk() {
        let spec = MinPrincipleSpec {
            grid: ExteriorGrid {
                angles: 8,
                radial: 4,
                ray_samples: 4,
                ..Default::default()
            },
            ..Default::default()
        };
        let r = check_minimum_principle_h(&kp(0.0), PlanePoint::new(2.0, 0.0), &spec, &lv()).unwrap();
        assert!(r.passed(), "{:?}", r.criteria);
        assert_eq!(r.parameters["projection"], json!([1.0, 0.0]));
        assert_abs_diff_eq!(r.reference.unwrap(), 2.0, epsilon = 1e-15);
        assert!(check_minimum_principle_h(&kp(0.0), PlanePoint::new(0.5, 0.0), &spec, &lv()).is_err());
    }

    #[test]
    fn plemelj_default() {
        let r = check_plemelj(&Ellipse::new(2.0, 1.0).unwrap(), &PlemeljSpec::default()).unwrap();
        assert!(r.passed(), "{:?} {:?}", r.criteria, r.notes);
    }

    #[test]
    fn fourier_small() {
        let spec = FourierSpec {
            pairs: 2,
            grid: 16,
            ..Default::default()
        };
        let r = check_fourier(&kp(0.3), &spec).unwrap();
        assert!(r.criterion("coincident_abs_lhs").unwrap().passed);
        assert!(r.criterion("min_rhs").unwrap().passed);
    }

    #[test]
    fn duality_of_el1() {
        let a = check_el1(&kp(0.4), 40, 2e-5, &lv()).unwrap();
        let b = check_el1(&kp(-0.4), 40, 2e-5, &lv()).unwrap();
        let d = duality_deviation(&b, &a).unwrap();
        assert!(d < 1e-10, "{d}");
        let c = check_el1(&kp(0.3), 40, 2e-5, &lv()).unwrap();
        assert!(duality_deviation(&b, &c).is_none());
    }

    #[test]
    fn unknown_check_rejected() {
        assert!(run_check("nope", &kp(0.0), &CheckSettings::default()).is_err());
    }
}
