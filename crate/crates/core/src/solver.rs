//! Discrete N-particle energy and its minimisation.
//!
//! The empirical measure `(1/N) Σ δ_{z_i}` has energy
//!
//! ```text
//! E(z) = (1/N²) Σ_{i≠j} W(z_i - z_j) + (1/N) Σ_i |z_i|²
//! ```
//!
//! with the diagonal excluded. Pair sums are assembled per particle in parallel and
//! reduced in index order with compensated summation, so values do not depend on the
//! number of threads.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::{ensure_finite, PlanePoint};
use crate::kernel::KernelParams;
use crate::numerics::CompensatedSum;
use crate::{Error, Result};

/// Ordered particle positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticleConfig {
    points: Vec<PlanePoint>,
}

impl ParticleConfig {
    /// Rejects empty and non-finite configurations. Coincident points are reported by the
    /// operations that need distinct positions.
    pub fn new(points: Vec<PlanePoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("particle configuration is empty"));
        }
        for &z in &points {
            ensure_finite(z, "particle position")?;
        }
        Ok(ParticleConfig { points })
    }

    /// `n` points uniform on the square `[-half, half]²`.
    pub fn uniform_square(n: usize, half: f64, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points = (0..n)
            .map(|_| {
                PlanePoint::new(
                    half * (2.0 * rng.random::<f64>() - 1.0),
                    half * (2.0 * rng.random::<f64>() - 1.0),
                )
            })
            .collect();
        ParticleConfig::new(points)
    }

    pub fn points(&self) -> &[PlanePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn map(&self, f: impl Fn(PlanePoint) -> PlanePoint) -> Result<Self> {
        ParticleConfig::new(self.points.iter().map(|&z| f(z)).collect())
    }

    /// Largest pairwise distance, bounded via the bounding box.
    pub fn diameter(&self) -> f64 {
        let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for z in &self.points {
            x0 = x0.min(z.re);
            x1 = x1.max(z.re);
            y0 = y0.min(z.im);
            y1 = y1.max(z.im);
        }
        (x1 - x0).hypot(y1 - y0)
    }

    fn require_pairs(&self) -> Result<()> {
        if self.points.len() < 2 {
            return Err(Error::invalid("at least two particles are required"));
        }
        Ok(())
    }
}

struct EnergyEval {
    energy: f64,
    min_dist2: f64,
}

fn energy_eval(p: &KernelParams, points: &[PlanePoint]) -> Result<EnergyEval> {
    let n = points.len();
    let rows: Vec<std::result::Result<(f64, f64), (usize, usize)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let zi = points[i];
            let mut acc = CompensatedSum::default();
            let mut min_d2 = f64::INFINITY;
            for (j, &zj) in points.iter().enumerate().skip(i + 1) {
                let d = zi - zj;
                let r2 = d.norm_sqr();
                if r2 == 0.0 {
                    return Err((i, j));
                }
                min_d2 = min_d2.min(r2);
                acc.add(p.value_unchecked(d.re, r2));
            }
            Ok((acc.value(), min_d2))
        })
        .collect();
    let nf = n as f64;
    let mut pair = CompensatedSum::default();
    let mut min_dist2 = f64::INFINITY;
    for row in rows {
        let (s, d) = row.map_err(|(i, j)| Error::Coincident { i, j })?;
        pair.add(s);
        min_dist2 = min_dist2.min(d);
    }
    let conf: CompensatedSum = points.iter().map(|z| z.norm_sqr()).collect();
    Ok(EnergyEval {
        energy: 2.0 * pair.value() / (nf * nf) + conf.value() / nf,
        min_dist2,
    })
}

/// `(1/N²) Σ_{i≠j} W(z_i - z_j) + (1/N) Σ |z_i|²`.
pub fn discrete_energy(p: &KernelParams, c: &ParticleConfig) -> Result<f64> {
    c.require_pairs()?;
    Ok(energy_eval(p, c.points())?.energy)
}

/// Per-particle gradient `∂E/∂z_i = (2/N²) Σ_{j≠i} ∇W(z_i - z_j) + (2/N) z_i`.
pub fn discrete_gradient(p: &KernelParams, c: &ParticleConfig) -> Result<Vec<PlanePoint>> {
    c.require_pairs()?;
    let n = c.len() as f64;
    Ok(forces(p, c.points())?
        .into_iter()
        .map(|f| f * (2.0 / n))
        .collect())
}

/// `(1/N) Σ_{j≠i} ∇W(z_i - z_j) + z_i`, the empirical potential gradient at each particle.
fn forces(p: &KernelParams, points: &[PlanePoint]) -> Result<Vec<PlanePoint>> {
    let n = points.len();
    let nf = n as f64;
    points
        .par_iter()
        .enumerate()
        .map(|(i, &zi)| {
            let (mut gx, mut gy) = (CompensatedSum::default(), CompensatedSum::default());
            for (j, &zj) in points.iter().enumerate() {
                if i == j {
                    continue;
                }
                let d = zi - zj;
                if d.norm_sqr() == 0.0 {
                    return Err(Error::Coincident { i: i.min(j), j: i.max(j) });
                }
                let g = p.gradient_unchecked(d);
                gx.add(g.re);
                gy.add(g.im);
            }
            Ok(PlanePoint::new(gx.value(), gy.value()) / nf + zi)
        })
        .collect()
}

fn rms(v: &[PlanePoint]) -> f64 {
    (v.iter().map(|g| g.norm_sqr()).sum::<f64>() / v.len() as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveParams {
    pub max_iters: usize,
    /// Tolerance on the RMS over particles of `(N/2) ∂E/∂z_i`, the empirical potential
    /// gradient, which does not scale with `N`.
    pub grad_tol: f64,
    /// Step length of the first trial, in units of the per-particle force.
    pub initial_step: f64,
    pub backtrack_factor: f64,
    pub armijo_c: f64,
    /// Seed for generated start configurations.
    pub seed: u64,
    /// Minimum admissible pair distance, relative to the start configuration diameter.
    pub min_sep_guard: f64,
}

impl Default for SolveParams {
    fn default() -> Self {
        SolveParams {
            max_iters: 20_000,
            grad_tol: 1e-6,
            initial_step: 0.1,
            backtrack_factor: 0.5,
            armijo_c: 1e-4,
            seed: 0,
            min_sep_guard: 1e-9,
        }
    }
}

impl SolveParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.grad_tol, self.initial_step, self.min_sep_guard];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::invalid("grad_tol, initial_step and min_sep_guard must be positive"));
        }
        for (name, v) in [("backtrack_factor", self.backtrack_factor), ("armijo_c", self.armijo_c)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::invalid(format!("{name} must lie in (0, 1), got {v}")));
            }
        }
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub final_config: ParticleConfig,
    pub energy_trace: Vec<f64>,
    pub grad_norm_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub diagnostic: Option<String>,
}

const MAX_STEP: f64 = 1e3;

/// Gradient descent with Armijo backtracking.
///
/// The search direction is the per-particle force `d_i = (N/2) ∂E/∂z_i`; a trial step
/// `s` is accepted when `E(z - s d) ≤ E(z) - c s ⟨∂E, d⟩` and no pair comes closer than
/// the separation guard. Trial steps after the first use the Barzilai–Borwein length of
/// the previous move.
pub fn minimize(p: &KernelParams, start: &ParticleConfig, sp: &SolveParams) -> Result<SolveResult> {
    start.require_pairs()?;
    sp.validate()?;
    let n = start.len();
    let nf = n as f64;
    let guard = sp.min_sep_guard * start.diameter();
    let guard2 = guard * guard;

    let mut x = start.points().to_vec();
    let mut cur = energy_eval(p, &x)?;
    let mut dir = forces(p, &x)?;
    let mut energy_trace = vec![cur.energy];
    let mut grad_norm_trace = vec![rms(&dir)];
    let mut step = sp.initial_step;
    let mut converged = grad_norm_trace[0] <= sp.grad_tol;
    let mut diagnostic = None;
    let mut iterations = 0;

    while !converged && iterations < sp.max_iters {
        // ⟨∂E, d⟩ = (2/N) Σ |d_i|²
        let slope: f64 = dir.iter().map(|d| d.norm_sqr()).sum::<f64>() * 2.0 / nf;
        let mut s = step;
        let accepted = loop {
            let trial: Vec<PlanePoint> = x.iter().zip(&dir).map(|(&z, &d)| z - d * s).collect();
            match energy_eval(p, &trial) {
                Ok(ev) if ev.min_dist2 >= guard2 && ev.energy <= cur.energy - sp.armijo_c * s * slope => {
                    break Some((trial, ev, s));
                }
                Ok(_) | Err(Error::Coincident { .. }) => {}
                Err(e) => return Err(e),
            }
            s *= sp.backtrack_factor;
            if s < 1e-16 * step.max(1e-300) || s < 1e-20 {
                break None;
            }
        };
        let Some((trial, ev, s)) = accepted else {
            diagnostic = Some(format!(
                "line search failed at iteration {iterations}: no Armijo step above machine scale"
            ));
            break;
        };
        let new_dir = forces(p, &trial)?;
        // Barzilai–Borwein: Δx = -s d, Δg ∝ d_new - d
        let (mut sy, mut ss) = (0.0, 0.0);
        for (d_old, d_new) in dir.iter().zip(&new_dir) {
            let dx = -*d_old * s;
            let dg = *d_new - *d_old;
            sy += dx.re * dg.re + dx.im * dg.im;
            ss += dx.norm_sqr();
        }
        step = if sy > 0.0 { (ss / sy).min(MAX_STEP) } else { (2.0 * s).min(MAX_STEP) };

        x = trial;
        cur = ev;
        dir = new_dir;
        iterations += 1;
        energy_trace.push(cur.energy);
        let g = rms(&dir);
        grad_norm_trace.push(g);
        converged = g <= sp.grad_tol;
    }
    if !converged && diagnostic.is_none() {
        diagnostic = Some(format!("reached max_iters = {} without convergence", sp.max_iters));
    }
    Ok(SolveResult {
        final_config: ParticleConfig::new(x)?,
        energy_trace,
        grad_norm_trace,
        iterations,
        converged,
        diagnostic,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipseFit {
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalStats {
    pub n: usize,
    pub mean: (f64, f64),
    pub ex2: f64,
    pub ey2: f64,
    pub exy: f64,
    pub max_abs: f64,
    /// Smallest axis-aligned ellipse with the aspect ratio `sqrt(E[y²]/E[x²])` that
    /// contains every point.
    pub support_fit: EllipseFit,
}

/// Sample moments about the origin and the support ellipse fit.
pub fn empirical_stats(c: &ParticleConfig) -> Result<EmpiricalStats> {
    c.require_pairs()?;
    let n = c.len() as f64;
    let mut acc = [CompensatedSum::default(); 5];
    for z in c.points() {
        for (k, v) in [z.re, z.im, z.re * z.re, z.im * z.im, z.re * z.im].into_iter().enumerate() {
            acc[k].add(v);
        }
    }
    let [mx, my, ex2, ey2, exy] = acc.map(|s| s.value() / n);
    let max_abs = c.points().iter().map(|z| z.norm()).fold(0.0, f64::max);
    let support_fit = if ex2 > 0.0 && ey2 > 0.0 {
        let aspect = (ey2 / ex2).sqrt();
        let a = c
            .points()
            .iter()
            .map(|z| z.re.hypot(z.im / aspect))
            .fold(0.0, f64::max);
        EllipseFit { a, b: a * aspect }
    } else {
        let a = c.points().iter().map(|z| z.re.abs()).fold(0.0, f64::max);
        let b = c.points().iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        EllipseFit { a, b }
    };
    Ok(EmpiricalStats {
        n: c.len(),
        mean: (mx, my),
        ex2,
        ey2,
        exy,
        max_abs,
        support_fit,
    })
}

/// CDF of the semicircle law with density `(2/(πR²)) sqrt(R² - y²)` on `[-R, R]`.
pub fn semicircle_cdf(y: f64, radius: f64) -> f64 {
    if y <= -radius {
        return 0.0;
    }
    if y >= radius {
        return 1.0;
    }
    let u = y / radius;
    0.5 + (u * (1.0 - u * u).sqrt() + u.asin()) / PI
}

/// Kolmogorov–Smirnov distance between the empirical law of the `y` coordinates and
/// the semicircle law of the given radius.
pub fn y_marginal_vs_semicircle(c: &ParticleConfig, radius: f64) -> Result<f64> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::invalid("semicircle radius must be positive"));
    }
    let mut ys: Vec<f64> = c.points().iter().map(|z| z.im).collect();
    ys.sort_by(f64::total_cmp);
    let n = ys.len() as f64;
    Ok(ys
        .iter()
        .enumerate()
        .map(|(i, &y)| {
            let f = semicircle_cdf(y, radius);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max))
}
