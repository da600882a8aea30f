//! Brute-force numerical oracles, independent of the closed forms in [`crate::analytic`].

pub mod cauchy;
pub mod grid;
pub mod quadrature;

pub use cauchy::{cauchy_integral, plemelj_jump, plemelj_jump_extrapolated, CauchyValue, CurveDiscretization};
pub use grid::{
    fourier_energy_identity_check, interaction_energy, potential_grid_measure, FourierIdentityReport,
    FrequencyBox, GridMeasure,
};
pub use quadrature::{
    c0_of, cauchy_transform_numeric, ellipse_convolution, interaction_potential,
    potential_gradient_on_ellipse_measure, potential_laplacian_exterior, potential_on_ellipse_measure,
    z_over_zbar_potential_numeric, zbar2_potential_numeric, Estimate, QuadratureLevel,
};

/// Value at `0` of the polynomial through `(xs[k], ys[k])` (Neville).
pub fn extrapolate_to_zero<T>(xs: &[f64], ys: &[T]) -> T
where
    T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Sub<Output = T> + std::ops::Div<f64, Output = T>,
{
    assert!(!xs.is_empty() && xs.len() == ys.len());
    let n = xs.len();
    let mut table = ys.to_vec();
    for m in 1..n {
        for i in 0..n - m {
            table[i] = (table[i + 1] * xs[i] - table[i] * xs[i + m]) / (xs[i] - xs[i + m]);
        }
    }
    table[0]
}

/// Neumaier-compensated running sum, so results do not depend on how work is split.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    #[inline]
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}
