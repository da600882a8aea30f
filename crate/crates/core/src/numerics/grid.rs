//! Measures sampled on uniform grids: potentials, energies and the Fourier-side
//! energy identity `(2π)² ∬ W d(ν)d(ν) = ∫ Ŵ |ν̂|²` for mass-zero `ν`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::CompensatedSum;
use crate::geometry::{ensure_finite, PlanePoint};
use crate::kernel::{confinement_potential, KernelParams};
use crate::{Error, Result};

/// Cell masses on an `nx × ny` grid of spacing `h`; cell `(i, j)` is centred at
/// `origin + (i h, j h)`. Values are stored row-major with `i` fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMeasure {
    origin: PlanePoint,
    spacing: f64,
    nx: usize,
    ny: usize,
    values: Vec<f64>,
}

impl GridMeasure {
    pub fn new(origin: PlanePoint, spacing: f64, nx: usize, ny: usize, values: Vec<f64>) -> Result<Self> {
        ensure_finite(origin, "grid origin")?;
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::invalid("grid spacing must be positive"));
        }
        if nx == 0 || ny == 0 || values.len() != nx * ny {
            return Err(Error::invalid(format!(
                "grid of {nx}x{ny} cells needs {} values, got {}",
                nx * ny,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("grid value"));
        }
        Ok(GridMeasure {
            origin,
            spacing,
            nx,
            ny,
            values,
        })
    }

    /// Square grid of `n × n` cells covering `[-half, half]²`, with masses `f(centre)`.
    pub fn square(n: usize, half: f64, f: impl Fn(PlanePoint) -> f64) -> Result<Self> {
        let h = 2.0 * half / n as f64;
        let origin = PlanePoint::new(-half + 0.5 * h, -half + 0.5 * h);
        let values = (0..n * n)
            .map(|k| f(origin + PlanePoint::new((k % n) as f64 * h, (k / n) as f64 * h)))
            .collect();
        GridMeasure::new(origin, h, n, n, values)
    }

    /// Rescaled to unit total mass.
    pub fn normalized(mut self) -> Result<Self> {
        let total = self.mass();
        if !(total > 0.0) {
            return Err(Error::invalid("cannot normalise a measure with non-positive mass"));
        }
        self.values.iter_mut().for_each(|v| *v /= total);
        Ok(self)
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cell_center(&self, i: usize, j: usize) -> PlanePoint {
        self.origin + PlanePoint::new(i as f64 * self.spacing, j as f64 * self.spacing)
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().copied().collect::<CompensatedSum>().value()
    }

    /// Non-negative with unit mass (to `1e-12`).
    pub fn is_probability(&self) -> bool {
        self.values.iter().all(|&v| v >= 0.0) && (self.mass() - 1.0).abs() <= 1e-12
    }

    pub fn same_grid(&self, other: &GridMeasure) -> bool {
        self.nx == other.nx
            && self.ny == other.ny
            && self.spacing == other.spacing
            && self.origin == other.origin
    }

    /// `self + t (other - self)`, cellwise.
    pub fn lerp(&self, other: &GridMeasure, t: f64) -> Result<GridMeasure> {
        if !self.same_grid(other) {
            return Err(Error::invalid("measures live on different grids"));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + t * (b - a))
            .collect();
        Ok(GridMeasure {
            values,
            ..self.clone()
        })
    }

    /// Signed difference `self - other`.
    pub fn difference(&self, other: &GridMeasure) -> Result<GridMeasure> {
        if !self.same_grid(other) {
            return Err(Error::invalid("measures live on different grids"));
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(GridMeasure {
            values,
            ..self.clone()
        })
    }

    fn atoms(&self) -> Vec<(PlanePoint, f64)> {
        (0..self.nx * self.ny)
            .filter(|&k| self.values[k] != 0.0)
            .map(|k| (self.cell_center(k % self.nx, k / self.nx), self.values[k]))
            .collect()
    }

    /// Average of `W` over a cell around its own centre: the logarithm is averaged over
    /// the disk of equal area, the anisotropic term by its angular mean `1/2`.
    pub fn self_cell_kernel(&self, p: &KernelParams) -> f64 {
        let r0 = self.spacing / PI.sqrt();
        -r0.ln() + 0.5 + 0.5 * p.alpha()
    }
}

/// `Σ_cells W(z - c) m_c + |z|²/2`, with the cell containing `z` replaced by its average.
pub fn potential_grid_measure(p: &KernelParams, m: &GridMeasure, z: PlanePoint) -> Result<f64> {
    ensure_finite(z, "evaluation point")?;
    let self_value = m.self_cell_kernel(p);
    let half = 0.5 * m.spacing;
    let mut acc = CompensatedSum::default();
    for (c, mass) in m.atoms() {
        let d = z - c;
        let r2 = d.norm_sqr();
        let w = if r2 < half * half {
            self_value
        } else {
            p.value_unchecked(d.re, r2)
        };
        acc.add(w * mass);
    }
    Ok(acc.value() + confinement_potential(z))
}

/// Interaction energy `Σ_i Σ_j W(c_i - c_j) m_i m_j` with the self-cell rule on the diagonal.
pub fn interaction_energy(p: &KernelParams, m: &GridMeasure) -> f64 {
    let atoms = m.atoms();
    let self_value = m.self_cell_kernel(p);
    let rows: Vec<f64> = atoms
        .par_iter()
        .enumerate()
        .map(|(i, &(ci, mi))| {
            let mut acc = CompensatedSum::default();
            acc.add(self_value * mi * mi);
            for &(cj, mj) in &atoms[i + 1..] {
                let d = ci - cj;
                acc.add(2.0 * p.value_unchecked(d.re, d.norm_sqr()) * mi * mj);
            }
            acc.value()
        })
        .collect();
    rows.into_iter().collect::<CompensatedSum>().value()
}

/// Discrete frequency box for the Fourier side of the energy identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyBox {
    /// Frequency step is `2π / (oversample · L)` for a grid of side `L`.
    pub oversample: usize,
    /// Box half-width as a multiple of the Nyquist frequency `π/h`.
    pub extent: f64,
}

impl Default for FrequencyBox {
    fn default() -> Self {
        FrequencyBox {
            oversample: 4,
            extent: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourierIdentityReport {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    /// `|lhs - rhs| / max(lhs, 1e-12)`.
    pub relative_gap: f64,
    pub rhs_nonnegative: bool,
    pub frequencies: usize,
}

/// Both sides of the energy identity for `ν = m1 - m2`.
///
/// `lhs = (2π)² Σ_i Σ_j W(c_i - c_j) ν_i ν_j`; `rhs` sums the Fourier density of `W`
/// against `|ν̂|²` over the frequency box, excluding `ξ = 0`, with `ν̂` by direct summation.
pub fn fourier_energy_identity_check(
    p: &KernelParams,
    m1: &GridMeasure,
    m2: &GridMeasure,
    cutoff: &FrequencyBox,
) -> Result<FourierIdentityReport> {
    if !m1.same_grid(m2) {
        return Err(Error::invalid("measures live on different grids"));
    }
    if cutoff.oversample == 0 || !(cutoff.extent > 0.0) {
        return Err(Error::invalid("frequency box needs positive oversampling and extent"));
    }
    let nu = m1.difference(m2)?;
    let lhs = (2.0 * PI).powi(2) * interaction_energy(p, &nu);

    let (nx, ny) = nu.dims();
    let h = nu.spacing;
    let side = nx.max(ny) as f64 * h;
    let dk = 2.0 * PI / (cutoff.oversample as f64 * side);
    let kmax = cutoff.extent * PI / h;
    let m = (kmax / dk).floor() as i64;
    let ks: Vec<f64> = (-m..=m).map(|k| k as f64 * dk).collect();
    let nk = ks.len();

    // ν̂(k1, k2) = Σ_j e^{-i k2 y_j} Σ_i e^{-i k1 x_i} ν_ij, separable in the two axes
    let xs: Vec<f64> = (0..nx).map(|i| nu.cell_center(i, 0).re).collect();
    let ys: Vec<f64> = (0..ny).map(|j| nu.cell_center(0, j).im).collect();
    let partial: Vec<Complex64> = (0..nk)
        .into_par_iter()
        .flat_map_iter(|a| {
            let k1 = ks[a];
            let phase: Vec<Complex64> = xs.iter().map(|&x| Complex64::from_polar(1.0, -k1 * x)).collect();
            let nu = &nu;
            (0..ny).map(move |j| {
                (0..nx)
                    .map(|i| phase[i] * nu.values[i + nx * j])
                    .sum::<Complex64>()
            })
        })
        .collect();
    let rows: Vec<(f64, bool)> = (0..nk)
        .into_par_iter()
        .map(|a| {
            let mut acc = CompensatedSum::default();
            let mut nonneg = true;
            let k1 = ks[a];
            for &k2 in &ks {
                if k1 == 0.0 && k2 == 0.0 {
                    continue;
                }
                let hat: Complex64 = ys
                    .iter()
                    .enumerate()
                    .map(|(j, &y)| partial[a * ny + j] * Complex64::from_polar(1.0, -k2 * y))
                    .sum();
                let term = p.fourier_density_unchecked(k1, k2) * hat.norm_sqr();
                nonneg &= term >= 0.0;
                acc.add(term);
            }
            (acc.value() * dk * dk, nonneg)
        })
        .collect();
    let rhs = rows.iter().map(|r| r.0).collect::<CompensatedSum>().value();
    let rhs_nonnegative = rhs >= 0.0 && rows.iter().all(|r| r.1);
    let gap = lhs - rhs;
    Ok(FourierIdentityReport {
        lhs,
        rhs,
        gap,
        relative_gap: gap.abs() / lhs.max(1e-12),
        rhs_nonnegative,
        frequencies: nk * nk - 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn kp(alpha: f64) -> KernelParams {
        KernelParams::new(alpha).unwrap()
    }

    fn disk(n: usize, cx: f64, cy: f64, r: f64) -> GridMeasure {
        GridMeasure::square(n, 1.0, |z| {
            if (z - PlanePoint::new(cx, cy)).norm() <= r { 1.0 } else { 0.0 }
        })
        .unwrap()
        .normalized()
        .unwrap()
    }

    fn one_cell(n: usize, i: usize, j: usize) -> GridMeasure {
        let mut values = vec![0.0; n * n];
        values[i + n * j] = 1.0;
        let h = 2.0 / n as f64;
        GridMeasure::new(PlanePoint::new(-1.0 + 0.5 * h, -1.0 + 0.5 * h), h, n, n, values).unwrap()
    }

    #[test]
    fn validation() {
        let o = PlanePoint::new(0.0, 0.0);
        assert!(GridMeasure::new(o, 0.0, 1, 1, vec![1.0]).is_err());
        assert!(GridMeasure::new(o, 0.1, 2, 2, vec![1.0]).is_err());
        assert!(GridMeasure::new(o, 0.1, 1, 1, vec![f64::NAN]).is_err());
        let m = GridMeasure::new(o, 0.1, 1, 2, vec![0.25, 0.75]).unwrap();
        assert!(m.is_probability());
        let n = GridMeasure::new(o, 0.1, 1, 2, vec![-0.25, 1.25]).unwrap();
        assert!(!n.is_probability());
        let other = GridMeasure::new(PlanePoint::new(1.0, 0.0), 0.1, 1, 2, vec![0.5, 0.5]).unwrap();
        assert!(m.difference(&other).is_err());
    }

    #[test]
    fn single_cell_far_field() {
        let p = kp(0.4);
        let m = one_cell(16, 3, 5);
        let w = m.cell_center(3, 5);
        let z = PlanePoint::new(4.0, -3.0);
        let got = potential_grid_measure(&p, &m, z).unwrap();
        let want = p.value(z - w).unwrap() + 0.5 * z.norm_sqr();
        assert_abs_diff_eq!(got, want, epsilon = 1e-12);
    }

    #[test]
    fn uniform_disk_centre_potential_converges() {
        // disk of radius 1 inside a slightly larger box, exact value 1/2 at the centre
        let p = kp(0.0);
        let err = |n: usize| {
            let m = GridMeasure::square(n, 1.2, |z| if z.norm() <= 1.0 { 1.0 } else { 0.0 })
                .unwrap()
                .normalized()
                .unwrap();
            (potential_grid_measure(&p, &m, PlanePoint::new(1e-9, 1e-9)).unwrap() - 0.5).abs()
        };
        for n in [40, 80, 160] {
            let e = err(n);
            assert!(e < 0.01, "n = {n}: {e}");
        }
    }

    #[test]
    fn identity_vanishes_for_equal_measures() {
        let m = disk(24, 0.1, 0.0, 0.5);
        let r = fourier_energy_identity_check(&kp(0.5), &m, &m, &FrequencyBox::default()).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert_eq!(r.rhs, 0.0);
    }

    #[test]
    fn two_cell_expansion() {
        let p = kp(0.3);
        let (a, b) = (one_cell(16, 4, 4), one_cell(16, 10, 7));
        let r = fourier_energy_identity_check(&p, &a, &b, &FrequencyBox::default()).unwrap();
        let d = a.cell_center(4, 4) - b.cell_center(10, 7);
        let want = (2.0 * PI).powi(2) * 2.0 * (a.self_cell_kernel(&p) - p.value(d).unwrap());
        assert_abs_diff_eq!(r.lhs, want, epsilon = 1e-10);
        assert!(r.lhs >= 0.0);
        assert!(r.rhs_nonnegative);
    }

    #[test]
    fn shifted_disks_identity() {
        let (m1, m2) = (disk(64, 0.0, 0.0, 0.5), disk(64, 0.2, 0.1, 0.5));
        let r = fourier_energy_identity_check(&kp(0.5), &m1, &m2, &FrequencyBox::default()).unwrap();
        assert!(r.lhs >= -1e-8);
        assert!(r.rhs_nonnegative);
        assert!(r.relative_gap <= 0.05, "{r:?}");
    }

    #[test]
    fn midpoint_convexity() {
        let p = kp(-0.6);
        let (m1, m2) = (disk(32, -0.2, 0.0, 0.4), disk(32, 0.3, 0.2, 0.3));
        let mid = m1.lerp(&m2, 0.5).unwrap();
        let (j1, j2, jm) = (interaction_energy(&p, &m1), interaction_energy(&p, &m2), interaction_energy(&p, &mid));
        assert!(jm < 0.5 * (j1 + j2));
        // exact quadratic identity: (J1 + J2)/2 - J(mid) = J(m1 - m2)/4
        let nu = m1.difference(&m2).unwrap();
        assert_abs_diff_eq!(0.5 * (j1 + j2) - jm, 0.25 * interaction_energy(&p, &nu), epsilon = 1e-10);
    }
}
