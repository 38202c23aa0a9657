//! Ellipsoid method for small convex problems with a certified lower bound.

use nalgebra::{DMatrix, DVector};

/// Result of a convex minimisation.
#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub argmin: Vec<f64>,
    /// Best objective value found (an upper bound for the infimum).
    pub upper: f64,
    /// Certified lower bound for the infimum.
    pub lower: f64,
    pub iterations: usize,
}

impl Minimum {
    pub fn gap(&self) -> f64 {
        (self.upper - self.lower).max(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipsoidConfig {
    /// Stop when `upper − lower ≤ rel_tol · upper + abs_tol`.
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_iter: usize,
}

impl Default for EllipsoidConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-7,
            abs_tol: 1e-300,
            max_iter: 200_000,
        }
    }
}

/// Minimise a convex `f` over the Euclidean ball of `radius` around `center`,
/// which must contain a minimiser. `oracle` returns the value and a
/// subgradient at a point.
pub fn minimize(
    oracle: impl Fn(&[f64]) -> (f64, Vec<f64>),
    center: &[f64],
    radius: f64,
    cfg: &EllipsoidConfig,
) -> Minimum {
    let n = center.len();
    if n == 1 {
        return minimize_scalar(|x| oracle(&[x]), center[0], radius, cfg);
    }
    let nf = n as f64;
    let mut c = DVector::from_column_slice(center);
    let mut p = DMatrix::<f64>::identity(n, n) * (radius * radius);
    let mut best = Minimum {
        argmin: center.to_vec(),
        upper: f64::INFINITY,
        lower: f64::NEG_INFINITY,
        iterations: 0,
    };
    for k in 0..cfg.max_iter {
        let (fc, g) = oracle(c.as_slice());
        if fc < best.upper {
            best.upper = fc;
            best.argmin = c.as_slice().to_vec();
        }
        let g = DVector::from_vec(g);
        let pg = &p * &g;
        let gpg = g.dot(&pg);
        best.iterations = k + 1;
        if !(gpg > 0.0) {
            // zero subgradient: the centre is optimal
            best.lower = best.lower.max(fc);
            best.upper = best.upper.min(fc);
            break;
        }
        let s = gpg.sqrt();
        best.lower = best.lower.max(fc - s);
        if best.upper - best.lower <= cfg.rel_tol * best.upper.abs() + cfg.abs_tol {
            break;
        }
        let gt = &pg / s;
        c -= &gt * (1.0 / (nf + 1.0));
        p = (&p - (&gt * gt.transpose()) * (2.0 / (nf + 1.0))) * (nf * nf / (nf * nf - 1.0));
        p = (&p + p.transpose()) * 0.5;
    }
    best
}

/// Golden-section search for the one-dimensional case; the lower bound comes
/// from the subgradient inequality at the bracket ends.
fn minimize_scalar(
    oracle: impl Fn(f64) -> (f64, Vec<f64>),
    center: f64,
    radius: f64,
    cfg: &EllipsoidConfig,
) -> Minimum {
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (center - radius, center + radius);
    let f = |x: f64| oracle(x).0;
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    let mut iterations = 0;
    let mut lower = f64::NEG_INFINITY;
    let mut upper = f1.min(f2);
    let mut argmin = if f1 < f2 { x1 } else { x2 };
    while iterations < cfg.max_iter {
        iterations += 1;
        if f1 > f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = f(x1);
        }
        let (fx, x) = if f1 < f2 { (f1, x1) } else { (f2, x2) };
        if fx < upper {
            upper = fx;
            argmin = x;
        }
        // the minimiser lies in [a, b]; linear minorants at both ends bound it
        let (fa, ga) = oracle(a);
        let (fb, gb) = oracle(b);
        let lo_a = fa + (ga[0] * (b - a)).min(0.0);
        let lo_b = fb + (-gb[0] * (b - a)).min(0.0);
        lower = lower.max(lo_a.max(lo_b).min(upper));
        if upper - lower <= cfg.rel_tol * upper.abs() + cfg.abs_tol
            || b - a < 1e-15 * (1.0 + center.abs() + radius)
        {
            break;
        }
    }
    Minimum {
        argmin: vec![argmin],
        upper,
        lower,
        iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_bowl() {
        let m = minimize(
            |z| {
                let v = (z[0] - 1.0).powi(2) + 2.0 * (z[1] + 0.5).powi(2);
                (v, vec![2.0 * (z[0] - 1.0), 4.0 * (z[1] + 0.5)])
            },
            &[0.0, 0.0],
            5.0,
            &EllipsoidConfig {
                rel_tol: 0.0,
                abs_tol: 1e-12,
                ..Default::default()
            },
        );
        assert!(m.upper < 1e-11 && m.lower <= m.upper);
        assert!((m.argmin[0] - 1.0).abs() < 1e-5 && (m.argmin[1] + 0.5).abs() < 1e-5);
    }

    #[test]
    fn nonsmooth_l1() {
        let m = minimize(
            |z| {
                let v = (z[0] - 0.3).abs() + 2.0 * (z[1] - 0.7).abs() + z[2].abs();
                (
                    v + 1.0,
                    vec![
                        (z[0] - 0.3).signum(),
                        2.0 * (z[1] - 0.7).signum(),
                        z[2].signum(),
                    ],
                )
            },
            &[0.0; 3],
            3.0,
            &EllipsoidConfig::default(),
        );
        assert!((m.upper - 1.0).abs() < 1e-6 && m.lower <= 1.0 + 1e-12 && m.gap() <= 1e-6);
    }

    #[test]
    fn scalar_abs() {
        let m = minimize(
            |z| ((z[0] - 0.25).abs() + 2.0, vec![(z[0] - 0.25).signum()]),
            &[0.0],
            1.0,
            &EllipsoidConfig::default(),
        );
        assert!((m.upper - 2.0).abs() < 1e-7 && m.lower <= m.upper && m.gap() < 1e-6);
    }
}
