use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};

/// Coordinate norms on `C^d`, optionally with positive coordinate weights
/// (`|x| = |(μ_i x_i)_i|`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum VecNorm {
    L1,
    L2,
    LInf,
    Lp(f64),
    Weighted {
        base: Box<VecNorm>,
        weights: Vec<f64>,
    },
}

impl VecNorm {
    pub fn lp(p: f64) -> Result<Self> {
        if !(p >= 1.0) {
            return param(format!("coordinate exponent must be >= 1 (got {p})"));
        }
        Ok(if p == 1.0 {
            VecNorm::L1
        } else if p == 2.0 {
            VecNorm::L2
        } else if p.is_infinite() {
            VecNorm::LInf
        } else {
            VecNorm::Lp(p)
        })
    }

    pub fn weighted(base: VecNorm, weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|&m| !(m > 0.0 && m.is_finite())) {
            return param("coordinate weights must be positive and finite");
        }
        Ok(VecNorm::Weighted {
            base: Box::new(base),
            weights,
        })
    }

    /// Exponent of the underlying ℓ^p norm.
    pub fn exponent(&self) -> f64 {
        match self {
            VecNorm::L1 => 1.0,
            VecNorm::L2 => 2.0,
            VecNorm::LInf => f64::INFINITY,
            VecNorm::Lp(p) => *p,
            VecNorm::Weighted { base, .. } => base.exponent(),
        }
    }

    pub fn eval(&self, x: &[Complex64]) -> f64 {
        match self {
            VecNorm::L1 => x.iter().map(|z| z.norm()).sum(),
            VecNorm::L2 => x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt(),
            VecNorm::LInf => x.iter().map(|z| z.norm()).fold(0.0, f64::max),
            VecNorm::Lp(p) => {
                let m = x.iter().map(|z| z.norm()).fold(0.0, f64::max);
                if m == 0.0 {
                    return 0.0;
                }
                m * x
                    .iter()
                    .map(|z| (z.norm() / m).powf(*p))
                    .sum::<f64>()
                    .powf(1.0 / p)
            }
            VecNorm::Weighted { base, weights } => {
                let y: Vec<Complex64> = x.iter().zip(weights).map(|(z, m)| z * m).collect();
                base.eval(&y)
            }
        }
    }

    /// A subgradient of the norm at `x`, as a real-linear functional on
    /// `C^d ≅ R^{2d}` represented by `g` with `Re Σ conj(g_i) h_i`.
    pub fn subgradient(&self, x: &[Complex64]) -> Vec<Complex64> {
        let unit = |z: &Complex64| {
            if z.norm() > 0.0 {
                z / z.norm()
            } else {
                Complex64::new(0.0, 0.0)
            }
        };
        match self {
            VecNorm::L1 => x.iter().map(unit).collect(),
            VecNorm::L2 => {
                let n = self.eval(x);
                if n == 0.0 {
                    vec![Complex64::new(0.0, 0.0); x.len()]
                } else {
                    x.iter().map(|z| z / n).collect()
                }
            }
            VecNorm::LInf => {
                let mut g = vec![Complex64::new(0.0, 0.0); x.len()];
                if let Some((i, _)) = x
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
                {
                    g[i] = unit(&x[i]);
                }
                g
            }
            VecNorm::Lp(p) => {
                let n = self.eval(x);
                if n == 0.0 {
                    return vec![Complex64::new(0.0, 0.0); x.len()];
                }
                x.iter()
                    .map(|z| unit(z) * (z.norm() / n).powf(p - 1.0))
                    .collect()
            }
            VecNorm::Weighted { base, weights } => {
                let y: Vec<Complex64> = x.iter().zip(weights).map(|(z, m)| z * m).collect();
                base.subgradient(&y)
                    .iter()
                    .zip(weights)
                    .map(|(g, m)| g * m)
                    .collect()
            }
        }
    }

    /// Dual norm, used for lower bounds in the K-functional optimiser.
    pub fn dual(&self) -> VecNorm {
        match self {
            VecNorm::L1 => VecNorm::LInf,
            VecNorm::L2 => VecNorm::L2,
            VecNorm::LInf => VecNorm::L1,
            VecNorm::Lp(p) => VecNorm::Lp(p / (p - 1.0)),
            VecNorm::Weighted { base, weights } => VecNorm::Weighted {
                base: Box::new(base.dual()),
                weights: weights.iter().map(|m| 1.0 / m).collect(),
            },
        }
    }
}
