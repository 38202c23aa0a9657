use serde::{Deserialize, Serialize};

use crate::error::{param, Result};

/// Log-uniform discretisation of an interval `[t_min, t_max] ⊂ (0, ∞)`.
///
/// Each node `t_i` owns the geometric cell `[t_i r^{-1/2}, t_i r^{1/2}]`
/// (clipped to `[t_min, t_max]` at both ends), where `r` is the node ratio.
/// Sampled data is read as piecewise constant on these cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogGrid {
    t_min: f64,
    t_max: f64,
    nodes: Vec<f64>,
    edges: Vec<f64>,
    log_step: f64,
}

impl LogGrid {
    pub fn new(t_min: f64, t_max: f64, n: usize) -> Result<Self> {
        if !(t_min.is_finite() && t_max.is_finite()) || t_min <= 0.0 || t_min >= t_max {
            return param(format!(
                "grid bounds must satisfy 0 < t_min < t_max (got {t_min}, {t_max})"
            ));
        }
        if n < 2 {
            return param(format!("grid needs at least two nodes (got {n})"));
        }
        let log_step = (t_max / t_min).ln() / (n - 1) as f64;
        let mut nodes: Vec<f64> = (0..n)
            .map(|i| t_min * (i as f64 * log_step).exp())
            .collect();
        nodes[0] = t_min;
        nodes[n - 1] = t_max;
        let mut edges = Vec::with_capacity(n + 1);
        edges.push(t_min);
        for i in 1..n {
            edges.push(t_min * ((i as f64 - 0.5) * log_step).exp());
        }
        edges.push(t_max);
        Ok(Self {
            t_min,
            t_max,
            nodes,
            edges,
            log_step,
        })
    }

    /// Grid with (approximately) `per_decade` cells per factor of ten.
    pub fn per_decade(t_min: f64, t_max: f64, per_decade: usize) -> Result<Self> {
        if per_decade == 0 {
            return param("per_decade must be positive");
        }
        let decades = (t_max / t_min).log10();
        let n = ((decades * per_decade as f64).round() as usize).max(1) + 1;
        Self::new(t_min, t_max, n)
    }

    /// Grid with `per_decade` cells per decade whose interior cell edges sit
    /// at `a · 10^{k/per_decade}`, so indicators of such intervals are exact.
    pub fn staggered(a: f64, b: f64, per_decade: usize) -> Result<Self> {
        if per_decade == 0 || !(a > 0.0 && b > a) {
            return param("staggered grid needs 0 < a < b and per_decade > 0");
        }
        let m = ((b / a).log10() * per_decade as f64).round() as usize;
        if m < 2 {
            return param("staggered grid needs at least two cells");
        }
        let half = 10f64.powf(0.5 / per_decade as f64);
        let mut g = Self::new(a * half, b / half, m)?;
        for (i, e) in g.edges.iter_mut().enumerate().take(m).skip(1) {
            *e = a * 10f64.powf(i as f64 / per_decade as f64);
        }
        Ok(g)
    }

    pub fn t_min(&self) -> f64 {
        self.t_min
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Cell boundaries; `edges()[i]..edges()[i + 1]` is the cell of node `i`.
    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    /// Step in `ln t` between neighbouring nodes.
    pub fn log_step(&self) -> f64 {
        self.log_step
    }

    /// Ratio `t_{i+1} / t_i`.
    pub fn ratio(&self) -> f64 {
        self.log_step.exp()
    }

    pub fn cell(&self, i: usize) -> (f64, f64) {
        (self.edges[i], self.edges[i + 1])
    }

    pub fn cell_length(&self, i: usize) -> f64 {
        self.edges[i + 1] - self.edges[i]
    }

    /// Index of the cell containing `t`, if `t` lies in `[t_min, t_max]`.
    pub fn locate(&self, t: f64) -> Option<usize> {
        if !(t >= self.t_min && t <= self.t_max) {
            return None;
        }
        let i = self.edges.partition_point(|&e| e <= t);
        Some(i.saturating_sub(1).min(self.len() - 1))
    }

    /// Same interval with `factor` times as many cells.
    pub fn refine(&self, factor: usize) -> Result<Self> {
        if factor == 0 {
            return param("refinement factor must be positive");
        }
        Self::new(self.t_min, self.t_max, (self.len() - 1) * factor + 1)
    }

    /// Grid scaled by `s`: every node and edge multiplied by `s`.
    pub fn dilate(&self, s: f64) -> Result<Self> {
        if !(s > 0.0 && s.is_finite()) {
            return param(format!("dilation factor must be positive (got {s})"));
        }
        Ok(Self {
            t_min: self.t_min * s,
            t_max: self.t_max * s,
            nodes: self.nodes.iter().map(|t| t * s).collect(),
            edges: self.edges.iter().map(|t| t * s).collect(),
            log_step: self.log_step,
        })
    }

    /// Number of decades spanned.
    pub fn decades(&self) -> f64 {
        (self.t_max / self.t_min).log10()
    }
}

impl Default for LogGrid {
    /// `1e-6 .. 1e6` with 400 cells per decade.
    fn default() -> Self {
        Self::new(1e-6, 1e6, 4801).expect("default grid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_interval_is_rejected() {
        assert!(LogGrid::new(1.0, 1.0, 4).is_err());
        assert!(LogGrid::new(0.0, 1.0, 4).is_err());
        assert!(LogGrid::new(1.0, 2.0, 1).is_err());
    }

    #[test]
    fn decade_grid() {
        let g = LogGrid::new(0.01, 100.0, 5).unwrap();
        let expect = [0.01, 0.1, 1.0, 10.0, 100.0];
        for (a, b) in g.nodes().iter().zip(expect) {
            assert!((a / b - 1.0).abs() < 1e-14, "{a} vs {b}");
        }
        for w in g.nodes().windows(2) {
            assert!((w[1] / w[0] - 10.0).abs() < 1e-12);
        }
    }

    #[test]
    fn two_point_grid() {
        let e = std::f64::consts::E;
        let g = LogGrid::new(1.0, e, 2).unwrap();
        assert_eq!(g.nodes(), &[1.0, e]);
        assert!((g.edges()[1] - e.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn staggered_edges_hit_decades() {
        let g = LogGrid::staggered(1e-3, 1e3, 10).unwrap();
        assert_eq!(g.len(), 60);
        assert_eq!(g.edges()[30], 1.0);
        assert!((g.edges()[40] - 10.0).abs() < 1e-14);
        assert!((g.ratio() - 10f64.powf(0.1)).abs() < 1e-14);
    }

    #[test]
    fn locate_and_cells() {
        let g = LogGrid::new(1e-3, 1e3, 61).unwrap();
        for i in 0..g.len() {
            assert_eq!(g.locate(g.nodes()[i]), Some(i));
            let (a, b) = g.cell(i);
            assert!(a <= g.nodes()[i] && g.nodes()[i] <= b);
        }
        assert_eq!(g.locate(1e-4), None);
        assert_eq!(g.locate(1e3), Some(60));
        let total: f64 = (0..g.len()).map(|i| g.cell_length(i)).sum();
        assert!((total - (1e3 - 1e-3)).abs() < 1e-9);
    }
}
