//! Rearrangement-invariant norms, weighted `E_w` norms, dilation norms and
//! Boyd indices.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::numerics::fsum::fsum;
use crate::numerics::{LogGrid, PowerLaw, SampledFunction};
use crate::rearrangement::{
    continuation, decreasing_rearrangement, extend_with, RearrangementResult, Tails, Weight,
};

/// Extra decades sampled when a Lorentz norm needs the fitted continuation.
const EXTENSION_DECADES: f64 = 6.0;

/// Unweighted rearrangement-invariant base space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RiSpace {
    Lp { p: f64 },
    Lorentz { p: f64, q: f64 },
}

impl RiSpace {
    pub fn lp(p: f64) -> Result<Self> {
        if !(p >= 1.0 && p.is_finite()) {
            return param(format!("L^p needs 1 <= p < inf (got {p})"));
        }
        Ok(RiSpace::Lp { p })
    }

    pub fn lorentz(p: f64, q: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) || !(q >= 1.0 && q.is_finite()) {
            return param(format!(
                "L^(p,q) needs 1 < p < inf and 1 <= q < inf (got {p}, {q})"
            ));
        }
        Ok(RiSpace::Lorentz { p, q })
    }

    /// The exponent `p` (both Boyd indices equal it).
    pub fn p(&self) -> f64 {
        match *self {
            RiSpace::Lp { p } | RiSpace::Lorentz { p, .. } => p,
        }
    }

    /// Lorentz functionals with `q > p` are only quasi-norms.
    pub fn is_quasi_norm(&self) -> bool {
        matches!(*self, RiSpace::Lorentz { p, q } if q > p)
    }

    /// `‖g‖_E` for the nonincreasing step function `g`.
    pub fn norm_of(&self, r: &RearrangementResult) -> f64 {
        let sup = r.sup();
        if sup == 0.0 {
            return 0.0;
        }
        let b = r.breakpoints();
        let levels = r.levels();
        match *self {
            RiSpace::Lp { p } => {
                let s = fsum(
                    levels
                        .iter()
                        .enumerate()
                        .map(|(k, l)| (l / sup).powf(p) * (b[k + 1] - b[k])),
                );
                sup * s.powf(1.0 / p)
            }
            RiSpace::Lorentz { p, q } => {
                let e = q / p;
                let s = fsum(levels.iter().enumerate().map(|(k, l)| {
                    let inc = if b[k] == 0.0 {
                        b[k + 1].powf(e)
                    } else {
                        b[k].powf(e) * (e * (b[k + 1] / b[k]).ln()).exp_m1()
                    };
                    (l / sup).powf(q) * inc * p / q
                }));
                sup * s.powf(1.0 / q)
            }
        }
    }
}

impl fmt::Display for RiSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RiSpace::Lp { p } => write!(f, "lp:{p}"),
            RiSpace::Lorentz { p, q } => write!(f, "lorentz:{p},{q}"),
        }
    }
}

/// Weighted space `E_w` with `‖f‖ = ‖f*_w‖_E`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiSpace {
    pub base: RiSpace,
    pub weight: Weight,
}

impl PhiSpace {
    pub fn new(base: RiSpace, weight: Weight) -> Self {
        Self { base, weight }
    }

    pub fn unweighted(base: RiSpace) -> Self {
        Self {
            base,
            weight: Weight::one(),
        }
    }

    /// `L^q(t^{q(1-θ)-1} dt)`, whose K-method space is the classical `(X, Y)_{θ,q}`.
    pub fn classical(theta: f64, q: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < 1.0) {
            return param(format!("θ must lie in (0, 1) (got {theta})"));
        }
        Ok(Self {
            base: RiSpace::lp(q)?,
            weight: Weight::power(q * (1.0 - theta) - 1.0),
        })
    }
}

impl fmt::Display for PhiSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.base, self.weight)
    }
}

impl FromStr for PhiSpace {
    type Err = Error;

    /// `lp:P` or `lorentz:P,Q`, optionally followed by `@WEIGHT`.
    fn from_str(s: &str) -> Result<Self> {
        let (base, weight) = match s.trim().split_once('@') {
            Some((b, w)) => (b, w.parse::<Weight>()?),
            None => (s.trim(), Weight::one()),
        };
        let num = |x: &str| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parameter(format!("cannot parse exponent `{x}`")))
        };
        let base = match base.split_once(':') {
            Some(("lp", p)) => RiSpace::lp(num(p)?)?,
            Some(("lorentz", pq)) => {
                let (p, q) = pq.split_once(',').ok_or_else(|| {
                    Error::Parameter(format!("lorentz space needs p,q (got `{pq}`)"))
                })?;
                RiSpace::lorentz(num(p)?, num(q)?)?
            }
            _ => return param(format!("space spec `{base}` must be lp:P or lorentz:P,Q")),
        };
        Ok(Self { base, weight })
    }
}

/// A norm value together with the size of the contribution from outside the
/// grid under the fitted continuation (`+∞` if that continuation diverges).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub value: f64,
    pub tail_bound: f64,
}

impl NormEstimate {
    /// Whether the tail contribution is at most `fraction` of the value.
    pub fn tail_ok(&self, fraction: f64) -> bool {
        self.tail_bound <= fraction * self.value.abs()
    }
}

/// `‖f‖_{E_w}` with `f` zero outside the grid.
pub fn phi_norm(phi: &PhiSpace, f: &SampledFunction) -> Result<NormEstimate> {
    phi_norm_with(phi, f, Tails::Zero)
}

/// `‖f‖_{E_w}` under the given continuation of `f` beyond the grid.
pub fn phi_norm_with(phi: &PhiSpace, f: &SampledFunction, tails: Tails) -> Result<NormEstimate> {
    let truncated = phi.base.norm_of(&decreasing_rearrangement(f, &phi.weight)?);
    // the error bar of a truncated norm is measured against the fitted continuation
    let model = if tails == Tails::Head {
        Tails::Head
    } else {
        Tails::Fitted
    };
    let (head, tail) = continuation(f, model);
    if head.is_zero() && tail.is_zero() {
        return Ok(NormEstimate {
            value: truncated,
            tail_bound: 0.0,
        });
    }
    let p = phi.base.p();
    let (a0, ainf) = phi.weight.asymptotic_exponents();
    let head_ok = head.is_zero() || head.exponent * p + a0 + 1.0 > 0.0;
    let tail_ok = tail.is_zero() || tail.exponent * p + ainf + 1.0 < 0.0;
    if !(head_ok && tail_ok) {
        return match tails {
            Tails::Zero => Ok(NormEstimate {
                value: truncated,
                tail_bound: f64::INFINITY,
            }),
            Tails::Fitted | Tails::Head => Ok(NormEstimate {
                value: f64::INFINITY,
                tail_bound: f64::INFINITY,
            }),
        };
    }
    let full = match phi.base {
        RiSpace::Lp { p } => {
            let law = phi.weight.law();
            let piece = |pl: PowerLaw, a: f64, b: f64| {
                if pl.is_zero() {
                    0.0
                } else {
                    law.times_power(pl.exponent * p)
                        .scale(pl.coeff.abs().powf(p))
                        .integral(a, b)
                }
            };
            let h = piece(head, 0.0, f.grid().t_min());
            let t = piece(tail, f.grid().t_max(), f64::INFINITY);
            (truncated.powf(p) + h + t).powf(1.0 / p)
        }
        RiSpace::Lorentz { .. } => {
            let at = |decades: f64| -> Result<f64> {
                Ok(phi.base.norm_of(&decreasing_rearrangement(
                    &extend_with(f, decades, model)?,
                    &phi.weight,
                )?))
            };
            let v3 = at(EXTENSION_DECADES / 2.0)?;
            let v6 = at(EXTENSION_DECADES)?;
            let (d3, d6) = (v3 - truncated, v6 - v3);
            if d3 <= 0.0 || d6 <= 0.0 {
                v6
            } else {
                let ratio = d6 / d3;
                if ratio >= 1.0 {
                    f64::INFINITY
                } else {
                    v6 + d6 * ratio / (1.0 - ratio)
                }
            }
        }
    };
    let tail_bound = (full - truncated).abs();
    let value = match tails {
        Tails::Zero => truncated,
        Tails::Fitted | Tails::Head => full,
    };
    Ok(NormEstimate { value, tail_bound })
}

/// Lower bound for `h_E(t) = ‖D_t‖` over a test family; exact `t^{1/p}` for `L^p`.
pub fn dilation_norm(e: &RiSpace, t: f64, family: &[SampledFunction]) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return param(format!("dilation parameter must be positive (got {t})"));
    }
    if family.is_empty() {
        return param("dilation test family is empty");
    }
    if let RiSpace::Lp { p } = e {
        return Ok(t.powf(1.0 / p));
    }
    let phi = PhiSpace::unweighted(*e);
    let mut best = 0.0f64;
    for f in family {
        let base = phi_norm(&phi, f)?.value;
        if base > 0.0 {
            best = best.max(phi_norm(&phi, &f.dilate(t)?)?.value / base);
        }
    }
    if best == 0.0 {
        return param("dilation test family contains only zero functions");
    }
    Ok(best)
}

/// Indicators, `t^{-γ}χ_(0,1)` and `t^{-δ}χ_(1,∞)` with `γ < 1/p < δ`.
pub fn default_dilation_family(e: &RiSpace, grid: Arc<LogGrid>) -> Result<Vec<SampledFunction>> {
    let p = e.p();
    let (gamma, delta) = (0.5 / p, 2.0 / p);
    Ok(vec![
        SampledFunction::indicator(grid.clone(), 0.0, 0.01),
        SampledFunction::indicator(grid.clone(), 0.0, 1.0),
        SampledFunction::indicator(grid.clone(), 0.0, 100.0),
        SampledFunction::from_fn(grid.clone(), |t| if t < 1.0 { t.powf(-gamma) } else { 0.0 })?,
        SampledFunction::from_fn(grid, |t| if t > 1.0 { t.powf(-delta) } else { 0.0 })?,
    ])
}

/// Boyd index estimates with the dilation-norm curve they were fitted on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoydIndices {
    /// Limit of `log t / log h(t)` as `t → ∞`.
    pub lower: f64,
    /// Limit of `log t / log h(t)` as `t → 0+`.
    pub upper: f64,
    pub curve: Vec<(f64, f64)>,
}

fn slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let m = points.len() as f64;
    let (sx, sy) = points
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let sxx: f64 = points.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Slope fits of `log h_E(t)` against `log t` for `t ≥ 10` and `t ≤ 0.1`.
pub fn boyd_indices(e: &RiSpace, ts: &[f64], family: &[SampledFunction]) -> Result<BoydIndices> {
    let lo = ts.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ts.iter().copied().fold(0.0, f64::max);
    if !(lo <= 1e-4 * (1.0 + 1e-9) && hi >= 1e4 * (1.0 - 1e-9)) {
        return param("Boyd index sweep must span at least four decades on each side of 1");
    }
    let mut curve = Vec::with_capacity(ts.len());
    for &t in ts {
        curve.push((t, dilation_norm(e, t, family)?));
    }
    let logs = |keep: &dyn Fn(f64) -> bool| -> Vec<(f64, f64)> {
        curve
            .iter()
            .filter(|(t, _)| keep(*t))
            .map(|(t, h)| (t.ln(), h.ln()))
            .collect()
    };
    let up = slope(&logs(&|t| t >= 10.0));
    let down = slope(&logs(&|t| t <= 0.1));
    match (up, down) {
        (Some(a), Some(b)) if a > 0.0 && b > 0.0 => Ok(BoydIndices {
            lower: 1.0 / a,
            upper: 1.0 / b,
            curve,
        }),
        _ => Err(Error::Estimation {
            reason: format!("degenerate dilation slopes {up:?} (t >= 10) and {down:?} (t <= 0.1)"),
            gap: f64::NAN,
        }),
    }
}

/// Three-valued verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Membership {
    In,
    Out,
    Unknown,
}

impl Membership {
    fn from_margin(margin: f64, fitted: bool) -> Self {
        if fitted && margin.abs() < 0.05 {
            Membership::Unknown
        } else if margin > 0.0 {
            Membership::In
        } else {
            Membership::Out
        }
    }

    pub fn and(self, other: Membership) -> Membership {
        match (self, other) {
            (Membership::Out, _) | (_, Membership::Out) => Membership::Out,
            (Membership::In, Membership::In) => Membership::In,
            _ => Membership::Unknown,
        }
    }
}

/// Whether `χ_(0,1)` and `min(1, 1/t)` belong to `E_w`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffMembership {
    pub indicator: Membership,
    pub min_one: Membership,
    pub exponent_at_zero: f64,
    pub exponent_at_infinity: f64,
}

/// Decided from the weight's power-law behaviour at 0 and ∞: `χ_(0,1) ∈ E_w`
/// iff `∫_0^1 w < ∞`, and `min(1, 1/t)` additionally needs `w(t) t^{-p}`
/// integrable at ∞. Fitted exponents within 0.05 of a threshold give `Unknown`.
pub fn cutoff_membership(phi: &PhiSpace) -> CutoffMembership {
    let (a0, ainf) = phi.weight.asymptotic_exponents();
    let fitted = phi.weight.is_fitted();
    let indicator = Membership::from_margin(a0 + 1.0, fitted);
    let at_infinity = Membership::from_margin(phi.base.p() - 1.0 - ainf, fitted);
    CutoffMembership {
        indicator,
        min_one: indicator.and(at_infinity),
        exponent_at_zero: a0,
        exponent_at_infinity: ainf,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn staggered(a: f64, b: f64, n: usize) -> Arc<LogGrid> {
        Arc::new(LogGrid::staggered(a, b, n).unwrap())
    }

    #[test]
    fn parse_spaces() {
        let s: PhiSpace = "lp:2@pow:-0.5".parse().unwrap();
        assert_eq!(s.base, RiSpace::Lp { p: 2.0 });
        assert_eq!(s.weight, Weight::power(-0.5));
        let s: PhiSpace = "lorentz:3,2".parse().unwrap();
        assert_eq!(s.base, RiSpace::Lorentz { p: 3.0, q: 2.0 });
        assert!("lorentz:1,2".parse::<PhiSpace>().is_err());
        assert!("lp:0.5".parse::<PhiSpace>().is_err());
        assert!("lq:2".parse::<PhiSpace>().is_err());
    }

    #[test]
    fn norm_examples() {
        let chi4 = SampledFunction::indicator(staggered(4e-6, 4e3, 20), 0.0, 4.0);
        let l2 = phi_norm_with(&"lp:2".parse().unwrap(), &chi4, Tails::Fitted).unwrap();
        assert!((l2.value - 2.0).abs() < 1e-12);
        let g = staggered(1e-6, 1e3, 20);
        let chi = SampledFunction::indicator(g.clone(), 0.0, 1.0);
        let l21 = phi_norm_with(&"lorentz:2,1".parse().unwrap(), &chi, Tails::Fitted).unwrap();
        assert!((l21.value - 2.0).abs() < 1e-6, "{}", l21.value);
        for (p, alpha) in [(2.0, -0.5), (3.0, 1.0), (1.5, -0.9)] {
            let phi = PhiSpace::new(RiSpace::lp(p).unwrap(), Weight::power(alpha));
            let v = phi_norm_with(&phi, &chi, Tails::Fitted).unwrap().value;
            assert!((v - (1.0 + alpha).powf(-1.0 / p)).abs() < 1e-12);
        }
    }

    #[test]
    fn tail_bound_flags_divergence() {
        let g = staggered(1e-3, 1e3, 20);
        let one = SampledFunction::from_fn(g.clone(), |_| 1.0).unwrap();
        let est = phi_norm(&"lp:2".parse().unwrap(), &one).unwrap();
        assert!(est.tail_bound.is_infinite());
        let m = SampledFunction::from_fn(g, |t| 1f64.min(1.0 / t)).unwrap();
        let est = phi_norm(&"lp:2".parse().unwrap(), &m).unwrap();
        assert!(est.tail_bound.is_finite() && est.tail_bound > 0.0);
    }

    #[test]
    fn dilation_examples() {
        let g = staggered(1e-6, 1e6, 20);
        let lp = RiSpace::lp(2.0).unwrap();
        let fam = default_dilation_family(&lp, g.clone()).unwrap();
        assert_eq!(dilation_norm(&lp, 4.0, &fam).unwrap(), 2.0);
        let l31 = RiSpace::lorentz(3.0, 1.0).unwrap();
        let fam = default_dilation_family(&l31, g).unwrap();
        assert!((dilation_norm(&l31, 1.0, &fam).unwrap() - 1.0).abs() < 1e-12);
        assert!((dilation_norm(&l31, 8.0, &fam).unwrap() - 2.0).abs() < 0.04);
        assert!(dilation_norm(&l31, 8.0, &[]).is_err());
    }

    #[test]
    fn boyd_of_l1() {
        let ts: Vec<f64> = (-5..=5).map(|k| 10f64.powi(k)).collect();
        let e = RiSpace::lp(1.0).unwrap();
        let fam = default_dilation_family(&e, staggered(1e-3, 1e3, 10)).unwrap();
        let b = boyd_indices(&e, &ts, &fam).unwrap();
        assert!((b.lower - 1.0).abs() < 1e-9 && (b.upper - 1.0).abs() < 1e-9);
        assert!(boyd_indices(&e, &ts[2..], &fam).is_err());
    }

    #[test]
    fn cutoffs() {
        let c = cutoff_membership(&PhiSpace::new(
            RiSpace::lp(2.0).unwrap(),
            Weight::power(-0.5),
        ));
        assert_eq!((c.indicator, c.min_one), (Membership::In, Membership::In));
        let c = cutoff_membership(&PhiSpace::new(
            RiSpace::lp(2.0).unwrap(),
            Weight::power(-1.0),
        ));
        assert_eq!((c.indicator, c.min_one), (Membership::Out, Membership::Out));
        for (theta, q) in [(0.3, 2.0), (0.5, 3.0), (0.9, 1.2)] {
            let c = cutoff_membership(&PhiSpace::classical(theta, q).unwrap());
            assert_eq!((c.indicator, c.min_one), (Membership::In, Membership::In));
        }
        let c = cutoff_membership(&PhiSpace::new(
            RiSpace::lp(2.0).unwrap(),
            Weight::power(1.0),
        ));
        assert_eq!((c.indicator, c.min_one), (Membership::In, Membership::Out));
    }
}
