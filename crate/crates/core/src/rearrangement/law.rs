use serde::{Deserialize, Serialize};

use crate::numerics::PowerLaw;

/// A function on `(0, ∞)` that is a power law `c_k t^{γ_k}` on each piece
/// `(b_{k-1}, b_k)`, with `b_{-1} = 0` and `b_last = ∞`.
///
/// Every weight variant normalises to this form, so all weight integrals are
/// closed-form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLaw {
    breaks: Vec<f64>,
    pieces: Vec<PowerLaw>,
}

/// `∫_lo^hi c t^γ dt` with `lo` possibly 0 and `hi` possibly ∞.
pub fn power_integral(c: f64, gamma: f64, lo: f64, hi: f64) -> f64 {
    if c == 0.0 || !(hi > lo) {
        return 0.0;
    }
    let g = gamma + 1.0;
    if lo == 0.0 || hi.is_infinite() {
        if (lo == 0.0 && g <= 0.0) || (hi.is_infinite() && g >= 0.0) {
            return f64::INFINITY * c.signum();
        }
        let top = if hi.is_infinite() { 0.0 } else { hi.powf(g) };
        let bot = if lo == 0.0 { 0.0 } else { lo.powf(g) };
        return c * (top - bot) / g;
    }
    let l = (hi / lo).ln();
    if (g * l).abs() < 1e-14 {
        return c * lo.powf(g) * l;
    }
    c * lo.powf(g) * (g * l).exp_m1() / g
}

impl PiecewiseLaw {
    pub fn new(breaks: Vec<f64>, pieces: Vec<PowerLaw>) -> Self {
        debug_assert_eq!(breaks.len() + 1, pieces.len());
        debug_assert!(breaks.windows(2).all(|w| w[0] < w[1]));
        Self { breaks, pieces }
    }

    pub fn power(c: f64, gamma: f64) -> Self {
        Self {
            breaks: vec![],
            pieces: vec![PowerLaw {
                coeff: c,
                exponent: gamma,
            }],
        }
    }

    /// Step function through `(t_i, v_i)` with geometric-midpoint cell edges,
    /// extended by the given power laws below the first and above the last edge.
    pub fn from_steps(nodes: &[f64], values: &[f64], head: PowerLaw, tail: PowerLaw) -> Self {
        let n = nodes.len();
        let mut breaks = Vec::with_capacity(n + 1);
        breaks.push(nodes[0]);
        for w in nodes.windows(2) {
            breaks.push((w[0] * w[1]).sqrt());
        }
        breaks.push(nodes[n - 1]);
        let mut pieces = Vec::with_capacity(n + 2);
        pieces.push(head);
        pieces.extend(values.iter().map(|&v| PowerLaw {
            coeff: v,
            exponent: 0.0,
        }));
        pieces.push(tail);
        Self { breaks, pieces }
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn pieces(&self) -> &[PowerLaw] {
        &self.pieces
    }

    fn piece_index(&self, t: f64) -> usize {
        self.breaks.partition_point(|&b| b <= t)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.pieces[self.piece_index(t)].eval(t)
    }

    /// Exponent of the piece adjacent to 0.
    pub fn exponent_at_zero(&self) -> f64 {
        self.pieces[0].exponent
    }

    /// Exponent of the piece adjacent to ∞.
    pub fn exponent_at_infinity(&self) -> f64 {
        self.pieces[self.pieces.len() - 1].exponent
    }

    /// `∫_a^b law dt`; `a = 0` and `b = ∞` are allowed and may give `+∞`.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        if !(b > a) {
            return 0.0;
        }
        let mut k = self.piece_index(a);
        let mut lo = a;
        let mut acc = 0.0;
        loop {
            let end = self.breaks.get(k).copied().unwrap_or(f64::INFINITY);
            let hi = end.min(b);
            let p = self.pieces[k];
            acc += power_integral(p.coeff, p.exponent, lo, hi);
            if end >= b || k + 1 == self.pieces.len() {
                break;
            }
            lo = end;
            k += 1;
        }
        acc
    }

    /// Pointwise power `law^r` (the law must be positive).
    pub fn powf(&self, r: f64) -> Self {
        Self {
            breaks: self.breaks.clone(),
            pieces: self
                .pieces
                .iter()
                .map(|p| PowerLaw {
                    coeff: p.coeff.powf(r),
                    exponent: p.exponent * r,
                })
                .collect(),
        }
    }

    /// `t^k · law(t)`.
    pub fn times_power(&self, k: f64) -> Self {
        Self {
            breaks: self.breaks.clone(),
            pieces: self
                .pieces
                .iter()
                .map(|p| PowerLaw {
                    coeff: p.coeff,
                    exponent: p.exponent + k,
                })
                .collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            breaks: self.breaks.clone(),
            pieces: self
                .pieces
                .iter()
                .map(|p| PowerLaw {
                    coeff: p.coeff * c,
                    exponent: p.exponent,
                })
                .collect(),
        }
    }

    /// `t ↦ law(λ t)`.
    pub fn dilate(&self, lambda: f64) -> Self {
        Self {
            breaks: self.breaks.iter().map(|b| b / lambda).collect(),
            pieces: self
                .pieces
                .iter()
                .map(|p| PowerLaw {
                    coeff: p.coeff * lambda.powf(p.exponent),
                    exponent: p.exponent,
                })
                .collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut breaks: Vec<f64> = self.breaks.iter().chain(&other.breaks).copied().collect();
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let mut pieces = Vec::with_capacity(breaks.len() + 1);
        for k in 0..=breaks.len() {
            // a point strictly inside piece k identifies the factors
            let lo = if k == 0 { 0.0 } else { breaks[k - 1] };
            let probe = match breaks.get(k) {
                Some(&hi) if k == 0 => hi * 0.5,
                Some(&hi) => (lo * hi).sqrt(),
                None => lo * 2.0 + 1.0,
            };
            let a = self.pieces[self.piece_index(probe)];
            let b = other.pieces[other.piece_index(probe)];
            pieces.push(PowerLaw {
                coeff: a.coeff * b.coeff,
                exponent: a.exponent + b.exponent,
            });
        }
        Self { breaks, pieces }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_integrals() {
        assert!((power_integral(1.0, -0.5, 0.0, 1.0) - 2.0).abs() < 1e-15);
        assert!(power_integral(1.0, -1.0, 0.0, 1.0).is_infinite());
        assert!((power_integral(1.0, -1.0, 1.0, std::f64::consts::E) - 1.0).abs() < 1e-15);
        assert!((power_integral(3.0, -2.0, 1.0, f64::INFINITY) - 3.0).abs() < 1e-15);
        assert!(power_integral(1.0, -1.0, 1.0, f64::INFINITY).is_infinite());
        assert!((power_integral(1.0, 2.0, 1.0, 2.0) - 7.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn product_and_dilation() {
        let pp = PiecewiseLaw::new(
            vec![1.0],
            vec![
                PowerLaw {
                    coeff: 1.0,
                    exponent: -0.5,
                },
                PowerLaw {
                    coeff: 1.0,
                    exponent: -1.0,
                },
            ],
        );
        let sq = pp.mul(&pp);
        assert!((sq.eval(0.25) - 4.0).abs() < 1e-14);
        assert!((sq.eval(4.0) - 1.0 / 16.0).abs() < 1e-14);
        let d = pp.dilate(10.0);
        for t in [0.01, 0.05, 0.2, 3.0] {
            assert!((d.eval(t) - pp.eval(10.0 * t)).abs() < 1e-14 * pp.eval(10.0 * t));
        }
        assert!((pp.integral(0.0, 4.0) - (2.0 + 4f64.ln())).abs() < 1e-14);
    }
}
