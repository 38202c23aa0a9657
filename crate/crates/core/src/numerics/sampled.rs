use std::sync::Arc;

use num_complex::Complex64;

use super::grid::LogGrid;
use super::vecnorm::VecNorm;
use crate::error::{domain, param, Result};

/// `c · t^γ`, the model used to extend sampled data beyond the grid.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PowerLaw {
    pub coeff: f64,
    pub exponent: f64,
}

impl PowerLaw {
    pub const ZERO: PowerLaw = PowerLaw {
        coeff: 0.0,
        exponent: 0.0,
    };

    pub fn eval(&self, t: f64) -> f64 {
        if self.coeff == 0.0 {
            0.0
        } else {
            self.coeff * t.powf(self.exponent)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeff == 0.0
    }

    /// Least-squares fit of `ln|v|` against `ln t`. Falls back to a constant
    /// (the value nearest `anchor`) when fewer than two points are nonzero or
    /// the signs disagree.
    pub fn fit(ts: &[f64], vs: &[f64], anchor: f64) -> PowerLaw {
        let pts: Vec<(f64, f64)> = ts
            .iter()
            .zip(vs)
            .filter(|(_, v)| **v != 0.0)
            .map(|(t, v)| (*t, *v))
            .collect();
        if pts.is_empty() {
            return PowerLaw::ZERO;
        }
        let sign = pts[0].1.signum();
        let mixed = pts.iter().any(|(_, v)| v.signum() != sign);
        let nearest = pts
            .iter()
            .min_by(|a, b| {
                (a.0 / anchor)
                    .ln()
                    .abs()
                    .total_cmp(&(b.0 / anchor).ln().abs())
            })
            .copied()
            .unwrap();
        if pts.len() < 2 || mixed {
            return PowerLaw {
                coeff: nearest.1,
                exponent: 0.0,
            };
        }
        let m = pts.len() as f64;
        let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
        for (t, v) in &pts {
            let x = t.ln();
            let y = v.abs().ln();
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        let det = m * sxx - sx * sx;
        if det.abs() < 1e-300 {
            return PowerLaw {
                coeff: nearest.1,
                exponent: 0.0,
            };
        }
        let mut exponent = (m * sxy - sx * sy) / det;
        // snap round-off on exact power laws
        let snapped = (exponent * 1e9).round() / 1e9;
        if (snapped - exponent).abs() < 1e-10 {
            exponent = snapped;
        }
        // anchor the fit at the endpoint so the extension is continuous there
        let coeff = sign * nearest.1.abs() / nearest.0.powf(exponent);
        PowerLaw { coeff, exponent }
    }
}

/// Scalar function on `(0, ∞)` sampled on a [`LogGrid`], piecewise constant
/// on the grid cells and zero outside `[t_min, t_max]` unless a consumer
/// attaches a tail model.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    grid: Arc<LogGrid>,
    values: Vec<f64>,
}

impl SampledFunction {
    pub fn new(grid: Arc<LogGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return param(format!(
                "sample count {} does not match grid size {}",
                values.len(),
                grid.len()
            ));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return param(format!("non-finite sample {} at node {i}", values[i]));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Arc<LogGrid>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes().iter().map(|&t| f(t)).collect();
        Self::new(grid, values)
    }

    pub fn zeros(grid: Arc<LogGrid>) -> Self {
        let n = grid.len();
        Self {
            grid,
            values: vec![0.0; n],
        }
    }

    /// Indicator of `(a, b)`, sampled at the nodes.
    pub fn indicator(grid: Arc<LogGrid>, a: f64, b: f64) -> Self {
        let values = grid
            .nodes()
            .iter()
            .map(|&t| if t > a && t < b { 1.0 } else { 0.0 })
            .collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &LogGrid {
        &self.grid
    }

    pub fn grid_arc(&self) -> &Arc<LogGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(
            self.grid.clone(),
            self.values.iter().map(|&v| f(v)).collect(),
        )
    }

    pub fn abs(&self) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v.abs()).collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    /// Pointwise combination of two functions on the same grid.
    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if *self.grid != *other.grid {
            return param("functions live on different grids");
        }
        Self::new(
            self.grid.clone(),
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    /// Multiply pointwise by `g(t)` evaluated at the nodes.
    pub fn times_fn(&self, g: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(
            self.grid.clone(),
            self.grid
                .nodes()
                .iter()
                .zip(&self.values)
                .map(|(&t, &v)| v * g(t))
                .collect(),
        )
    }

    /// `D_s f(t) = f(t / s)`: the same samples carried on the dilated grid.
    pub fn dilate(&self, s: f64) -> Result<Self> {
        Ok(Self {
            grid: Arc::new(self.grid.dilate(s)?),
            values: self.values.clone(),
        })
    }

    /// `∫_a^b f dt` of the piecewise-constant interpretation.
    pub fn integrate(&self, a: f64, b: f64) -> Result<f64> {
        let g = &self.grid;
        if !(a >= g.t_min() && b <= g.t_max() && a < b) {
            return domain(format!(
                "integration interval [{a}, {b}] outside grid [{}, {}]",
                g.t_min(),
                g.t_max()
            ));
        }
        let edges = g.edges();
        let first = g.locate(a).unwrap_or(0);
        let mut acc = 0.0;
        for i in first..g.len() {
            let (lo, hi) = (edges[i], edges[i + 1]);
            if lo >= b {
                break;
            }
            let len = hi.min(b) - lo.max(a);
            if len > 0.0 {
                acc += self.values[i] * len;
            }
        }
        Ok(acc)
    }

    /// Integral over the whole grid.
    pub fn integral(&self) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| v * self.grid.cell_length(i))
            .sum()
    }

    /// Power law fitted to the first decade of samples.
    pub fn head_fit(&self) -> PowerLaw {
        let g = &self.grid;
        let cut = (g.t_min() * 10.0).min(g.t_max());
        let k = g
            .nodes()
            .partition_point(|&t| t <= cut * (1.0 + 1e-12))
            .max(2)
            .min(g.len());
        PowerLaw::fit(&g.nodes()[..k], &self.values[..k], g.t_min())
    }

    /// Power law fitted to the last decade of samples.
    pub fn tail_fit(&self) -> PowerLaw {
        let g = &self.grid;
        let cut = (g.t_max() / 10.0).max(g.t_min());
        let k = g
            .nodes()
            .partition_point(|&t| t < cut * (1.0 - 1e-12))
            .min(g.len() - 2);
        PowerLaw::fit(&g.nodes()[k..], &self.values[k..], g.t_max())
    }
}

/// `C^d`-valued function sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorFunction {
    grid: Arc<LogGrid>,
    values: Vec<Vec<Complex64>>,
}

impl VectorFunction {
    pub fn new(grid: Arc<LogGrid>, values: Vec<Vec<Complex64>>) -> Result<Self> {
        if values.len() != grid.len() {
            return param("sample count does not match grid size");
        }
        let dim = values.first().map_or(0, Vec::len);
        for v in &values {
            if v.len() != dim {
                return param("vector samples have inconsistent dimension");
            }
            if v.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
                return param("non-finite vector sample");
            }
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &LogGrid {
        &self.grid
    }

    pub fn grid_arc(&self) -> &Arc<LogGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[Vec<Complex64>] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    /// `t ↦ |f(t)|` for the given coordinate norm.
    pub fn pointwise_norm(&self, norm: &VecNorm) -> SampledFunction {
        SampledFunction {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| norm.eval(v)).collect(),
        }
    }

    /// `t ↦ |g(f(t))|` for an arbitrary functional `g`.
    pub fn map_norm(&self, g: impl Fn(&[Complex64]) -> f64) -> SampledFunction {
        SampledFunction {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| g(v)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(a: f64, b: f64, n: usize) -> Arc<LogGrid> {
        Arc::new(LogGrid::new(a, b, n).unwrap())
    }

    #[test]
    fn integrate_zero_and_constant() {
        let g = grid(0.5, 4.0, 200);
        let zero = SampledFunction::zeros(g.clone());
        assert_eq!(zero.integrate(1.0, 2.0).unwrap(), 0.0);
        let one = SampledFunction::from_fn(g, |_| 1.0).unwrap();
        assert!((one.integrate(1.0, 2.0).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn integrate_reciprocal() {
        let e = std::f64::consts::E;
        let f = SampledFunction::from_fn(grid(1.0, e, 1000), |t| 1.0 / t).unwrap();
        assert!((f.integrate(1.0, e).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn integrate_outside_grid_is_domain_error() {
        let f = SampledFunction::zeros(grid(1.0, 2.0, 10));
        assert!(f.integrate(0.5, 1.5).is_err());
        assert!(f.integrate(1.5, 1.2).is_err());
    }

    #[test]
    fn cell_indicator_is_exact() {
        let g = grid(1e-3, 1e3, 301);
        for i in [0, 7, 150, 300] {
            let mut v = vec![0.0; g.len()];
            v[i] = 1.0;
            let f = SampledFunction::new(g.clone(), v).unwrap();
            let (a, b) = g.cell(i);
            let got = f.integrate(g.t_min(), g.t_max()).unwrap();
            assert!((got - (b - a)).abs() < 1e-12 * (b - a).max(1.0));
        }
    }

    #[test]
    fn refinement_halves_error_for_powers() {
        for gamma in [-0.9, -0.5, 0.5, 1.0, 2.0] {
            let exact = (5f64.powf(gamma + 1.0) - 0.3f64.powf(gamma + 1.0)) / (gamma + 1.0);
            let mut prev = f64::INFINITY;
            for n in [50, 100, 200, 400] {
                let f = SampledFunction::from_fn(grid(0.3, 5.0, n), |t| t.powf(gamma)).unwrap();
                let err = (f.integral() - exact).abs();
                assert!(
                    err <= 0.5 * prev || err < 1e-13,
                    "gamma {gamma}, n {n}: {err} vs {prev}"
                );
                prev = err;
            }
        }
    }

    #[test]
    fn power_fit_recovers_exact_laws() {
        let g = grid(1e-4, 1e4, 321);
        let f = SampledFunction::from_fn(g, |t| {
            if t < 1.0 {
                3.0 * t.powf(-0.4)
            } else {
                2.0 / (t * t)
            }
        })
        .unwrap();
        let h = f.head_fit();
        assert!((h.exponent + 0.4).abs() < 1e-9 && (h.coeff - 3.0).abs() < 1e-9);
        let t = f.tail_fit();
        assert!((t.exponent + 2.0).abs() < 1e-9 && (t.coeff - 2.0).abs() < 1e-9);
        let z = SampledFunction::indicator(f.grid_arc().clone(), 1.0, 2.0);
        assert!(z.head_fit().is_zero() && z.tail_fit().is_zero());
    }
}
