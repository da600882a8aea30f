//! Discretised Cauchy integrals over an ellipse and the Plemelj jump.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::geometry::{ensure_finite, BoundaryPoint, Ellipse, PlanePoint};
use crate::{Error, Result};

/// Counterclockwise boundary nodes with arc-length weights (periodic trapezoidal rule).
#[derive(Debug, Clone)]
pub struct CurveDiscretization {
    nodes: Vec<BoundaryPoint>,
    weights: Vec<f64>,
}

impl CurveDiscretization {
    pub fn ellipse(e: &Ellipse, panels: usize) -> Result<Self> {
        if panels < 3 {
            return Err(Error::invalid("curve discretisation needs at least 3 panels"));
        }
        let dt = 2.0 * PI / panels as f64;
        let (nodes, weights) = (0..panels)
            .map(|k| {
                let t = k as f64 * dt;
                let (s, c) = t.sin_cos();
                (e.boundary_point(t), (e.a() * s).hypot(e.b() * c) * dt)
            })
            .unzip();
        Ok(CurveDiscretization { nodes, weights })
    }

    pub fn nodes(&self) -> &[BoundaryPoint] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn perimeter(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Samples `f` at the nodes.
    pub fn sample(&self, f: impl Fn(PlanePoint) -> Complex64) -> Vec<Complex64> {
        self.nodes.iter().map(|n| f(n.point)).collect()
    }

    /// Length of the panel nearest to `z` and the distance to that node.
    pub fn nearest_panel(&self, z: PlanePoint) -> (f64, f64) {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(n, &w)| (w, (n.point - z).norm()))
            .fold((0.0, f64::INFINITY), |best, x| if x.1 < best.1 { x } else { best })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CauchyValue {
    pub value: Complex64,
    /// Set when `z` lies within one panel length of the curve, where the rule loses accuracy.
    pub near_curve: bool,
}

/// `C(f)(z) = (1/2πi) Σ_k f(ζ_k) τ_k w_k / (ζ_k - z)`.
pub fn cauchy_integral(curve: &CurveDiscretization, f: &[Complex64], z: PlanePoint) -> Result<CauchyValue> {
    ensure_finite(z, "evaluation point")?;
    if f.len() != curve.len() {
        return Err(Error::invalid(format!(
            "boundary data has {} values for {} nodes",
            f.len(),
            curve.len()
        )));
    }
    let (panel, dist) = curve.nearest_panel(z);
    let sum: Complex64 = curve
        .nodes
        .iter()
        .zip(&curve.weights)
        .zip(f)
        .map(|((n, &w), &fk)| fk * n.tangent * w / (n.point - z))
        .sum();
    Ok(CauchyValue {
        value: sum / Complex64::new(0.0, 2.0 * PI),
        near_curve: dist < panel,
    })
}

/// `C(f)(a - δn) - C(f)(a + δn)`: inside minus outside along the normal at `a`.
pub fn plemelj_jump(curve: &CurveDiscretization, f: &[Complex64], a: &BoundaryPoint, delta: f64) -> Result<Complex64> {
    let (panel, _) = curve.nearest_panel(a.point);
    if !(delta > panel) {
        return Err(Error::invalid(format!(
            "approach distance {delta:e} must exceed the local panel length {panel:e}"
        )));
    }
    let inside = cauchy_integral(curve, f, a.point - a.normal * delta)?;
    let outside = cauchy_integral(curve, f, a.point + a.normal * delta)?;
    Ok(inside.value - outside.value)
}

/// The jump extrapolated to `δ → 0` from distances `δ, 2δ, …, levels·δ` (Neville).
pub fn plemelj_jump_extrapolated(
    curve: &CurveDiscretization,
    f: &[Complex64],
    a: &BoundaryPoint,
    delta: f64,
    levels: usize,
) -> Result<Complex64> {
    if levels == 0 {
        return Err(Error::invalid("extrapolation needs at least one level"));
    }
    let xs: Vec<f64> = (1..=levels).map(|k| k as f64 * delta).collect();
    let jumps = xs
        .iter()
        .map(|&d| plemelj_jump(curve, f, a, d))
        .collect::<Result<Vec<_>>>()?;
    Ok(super::extrapolate_to_zero(&xs, &jumps))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64, y: f64) -> Complex64 {
        Complex64::new(x, y)
    }

    #[test]
    fn perimeter_of_panels() {
        let e = Ellipse::new(2.0, 1.0).unwrap();
        let curve = CurveDiscretization::ellipse(&e, 512).unwrap();
        assert!((curve.perimeter() - e.perimeter()).abs() <= 1e-8 * e.perimeter());
    }

    #[test]
    fn winding_numbers() {
        let e = Ellipse::new(2.0, 1.0).unwrap();
        let curve = CurveDiscretization::ellipse(&e, 1024).unwrap();
        let ones = vec![c(1.0, 0.0); curve.len()];
        let ident = curve.sample(|z| z);
        for &z in &[c(0.0, 0.0), c(1.5, 0.3), c(-0.4, -0.8)] {
            let v = cauchy_integral(&curve, &ones, z).unwrap();
            assert!((v.value - 1.0).norm() < 1e-10);
            assert!(!v.near_curve);
            assert!((cauchy_integral(&curve, &ident, z).unwrap().value - z).norm() < 1e-10);
        }
        for &z in &[c(3.0, 0.0), c(0.5, 1.5), c(-5.0, 4.0)] {
            assert!(cauchy_integral(&curve, &ones, z).unwrap().value.norm() < 1e-10);
            assert!(cauchy_integral(&curve, &ident, z).unwrap().value.norm() < 1e-10);
        }
        let near = cauchy_integral(&curve, &ones, c(2.0 + 1e-4, 0.0)).unwrap();
        assert!(near.near_curve);
    }

    #[test]
    fn conjugate_data_on_unit_circle() {
        // ζ̄ = 1/ζ on the unit circle, so C(ζ̄)(z) = 0 inside and -1/z outside
        let curve = CurveDiscretization::ellipse(&Ellipse::unit_disk(), 512).unwrap();
        let f = curve.sample(|z| z.conj());
        assert!(cauchy_integral(&curve, &f, c(0.3, -0.2)).unwrap().value.norm() < 1e-12);
        let z = c(1.7, 0.4);
        assert!((cauchy_integral(&curve, &f, z).unwrap().value + 1.0 / z).norm() < 1e-12);
    }

    #[test]
    fn jump_of_holomorphic_data() {
        let e = Ellipse::new(2.0, 1.0).unwrap();
        let curve = CurveDiscretization::ellipse(&e, 2048).unwrap();
        let ones = vec![c(1.0, 0.0); curve.len()];
        let ident = curve.sample(|z| z);
        let a = e.boundary_point(0.9);
        let (panel, _) = curve.nearest_panel(a.point);
        let j = plemelj_jump(&curve, &ones, &a, 5.0 * panel).unwrap();
        assert!((j - 1.0).norm() < 1e-10);
        // raw jump of ζ is a - δn; the extrapolated one recovers a
        let raw = plemelj_jump(&curve, &ident, &a, 5.0 * panel).unwrap();
        assert!((raw - (a.point - a.normal * 5.0 * panel)).norm() < 1e-10);
        let ext = plemelj_jump_extrapolated(&curve, &ident, &a, 5.0 * panel, 4).unwrap();
        assert!((ext - a.point).norm() < 1e-10);
        assert!(plemelj_jump(&curve, &ones, &a, 0.5 * panel).is_err());
    }

    #[test]
    fn mismatched_data_rejected() {
        let curve = CurveDiscretization::ellipse(&Ellipse::unit_disk(), 64).unwrap();
        assert!(cauchy_integral(&curve, &[c(1.0, 0.0)], c(0.0, 0.0)).is_err());
    }
}
