//! The Hardy operator `P`, its adjoint `Q`, the Calderón operator `P + Q`,
//! duality checks and operator-norm lower bounds.

use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, param, Error, Result};
use crate::numerics::fsum::fsum;
use crate::numerics::{LogGrid, SampledFunction};
use crate::rearrangement::{fitted_tails, Tails, Weight};
use crate::ri_spaces::{phi_norm, PhiSpace, RiSpace};

/// `∫_0^{t_min} f` under the given continuation.
fn head_integral(f: &SampledFunction, tails: Tails) -> Result<f64> {
    if tails == Tails::Zero {
        return Ok(0.0);
    }
    let (head, _) = fitted_tails(f);
    if head.is_zero() {
        return Ok(0.0);
    }
    if head.exponent <= -1.0 {
        return domain(format!(
            "head ~ t^{:.4} is not integrable at 0",
            head.exponent
        ));
    }
    let t0 = f.grid().t_min();
    Ok(head.coeff * t0.powf(head.exponent + 1.0) / (head.exponent + 1.0))
}

/// `∫_{t_max}^∞ f(s) ds/s` under the given continuation.
fn tail_integral(f: &SampledFunction, tails: Tails) -> Result<f64> {
    if tails != Tails::Fitted {
        return Ok(0.0);
    }
    let (_, tail) = fitted_tails(f);
    if tail.is_zero() {
        return Ok(0.0);
    }
    if tail.exponent >= 0.0 {
        return domain(format!(
            "tail ~ t^{:.4} is not integrable against ds/s at infinity",
            tail.exponent
        ));
    }
    let t1 = f.grid().t_max();
    Ok(-tail.coeff * t1.powf(tail.exponent) / tail.exponent)
}

/// `(Pf)(t_i) = t_i^{-1} ∫_0^{t_i} f` with the head fitted on the first decade.
pub fn apply_hardy(f: &SampledFunction) -> Result<SampledFunction> {
    apply_hardy_with(f, Tails::Fitted)
}

pub fn apply_hardy_with(f: &SampledFunction, tails: Tails) -> Result<SampledFunction> {
    let g = f.grid();
    let v = f.values();
    let mut acc = head_integral(f, tails)?;
    let mut out = Vec::with_capacity(g.len());
    for (i, &t) in g.nodes().iter().enumerate() {
        let (a, b) = g.cell(i);
        out.push((acc + v[i] * (t - a)) / t);
        acc += v[i] * (b - a);
    }
    SampledFunction::new(f.grid_arc().clone(), out)
}

/// `(Qf)(t_i) = ∫_{t_i}^∞ f(s) ds/s` with the analytic tail of the fit on the
/// last decade.
pub fn apply_adjoint(f: &SampledFunction) -> Result<SampledFunction> {
    apply_adjoint_with(f, Tails::Fitted)
}

pub fn apply_adjoint_with(f: &SampledFunction, tails: Tails) -> Result<SampledFunction> {
    let g = f.grid();
    let v = f.values();
    let mut acc = tail_integral(f, tails)?;
    let mut out = vec![0.0; g.len()];
    for i in (0..g.len()).rev() {
        let (a, b) = g.cell(i);
        let t = g.nodes()[i];
        out[i] = acc + v[i] * (b / t).ln();
        acc += v[i] * (b / a).ln();
    }
    SampledFunction::new(f.grid_arc().clone(), out)
}

/// `Pf + Qf`.
pub fn apply_calderon(f: &SampledFunction) -> Result<SampledFunction> {
    apply_calderon_with(f, Tails::Fitted)
}

pub fn apply_calderon_with(f: &SampledFunction, tails: Tails) -> Result<SampledFunction> {
    apply_hardy_with(f, tails)?.zip_with(&apply_adjoint_with(f, tails)?, |a, b| a + b)
}

/// `|∫ f·Qg − ∫ g·Pf| / max(|∫ f·Qg|, tiny)` for step functions vanishing
/// outside the grid; both pairings are integrated exactly cell by cell.
pub fn duality_residual(f: &SampledFunction, g: &SampledFunction) -> Result<f64> {
    if f.grid() != g.grid() {
        return param("duality pairing needs both functions on one grid");
    }
    let grid = f.grid();
    let (fv, gv) = (f.values(), g.values());
    let n = grid.len();
    let logs: Vec<f64> = (0..n)
        .map(|i| {
            let (a, b) = grid.cell(i);
            (b / a).ln()
        })
        .collect();

    // ∫ f·Qg, with Qg(t) = g_j ln(b/t) + Σ_{k>j} g_k L_k on cell j
    let mut after = 0.0;
    let mut left = Vec::with_capacity(n);
    for j in (0..n).rev() {
        let (a, b) = grid.cell(j);
        left.push(fv[j] * (gv[j] * ((b - a) - a * logs[j]) + after * (b - a)));
        after += gv[j] * logs[j];
    }
    // ∫ g·Pf, with Pf(t) = (S_j + f_j (t − a)) / t on cell j
    let mut before = 0.0;
    let mut right = Vec::with_capacity(n);
    for j in 0..n {
        let (a, b) = grid.cell(j);
        right.push(gv[j] * ((before - fv[j] * a) * logs[j] + fv[j] * (b - a)));
        before += fv[j] * (b - a);
    }
    let (l, r) = (fsum(left), fsum(right));
    Ok((l - r).abs() / l.abs().max(f64::MIN_POSITIVE))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HardyOp {
    P,
    Q,
    /// The Calderón operator `P + Q`.
    S,
}

impl FromStr for HardyOp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "P" | "p" => Ok(HardyOp::P),
            "Q" | "q" => Ok(HardyOp::Q),
            "S" | "s" | "P+Q" => Ok(HardyOp::S),
            _ => param(format!("unknown operator `{s}` (expected P, Q or S)")),
        }
    }
}

impl HardyOp {
    /// Apply to `f` extended by zero outside the grid.
    pub fn apply_truncated(&self, f: &SampledFunction) -> Result<SampledFunction> {
        match self {
            HardyOp::P => apply_hardy_with(f, Tails::Zero),
            HardyOp::Q => apply_adjoint_with(f, Tails::Zero),
            HardyOp::S => apply_calderon_with(f, Tails::Zero),
        }
    }

    /// Known operator norm on `L^p(t^α dt)`: `p/(p−1−α)` for `P`, `p/(1+α)`
    /// for `Q`, and their sum as an upper bound for `P + Q`.
    pub fn analytic_upper(&self, phi: &PhiSpace) -> Option<f64> {
        let (RiSpace::Lp { p }, Weight::Power { alpha }) = (&phi.base, &phi.weight) else {
            return None;
        };
        let (p, alpha) = (*p, *alpha);
        let pn = (alpha < p - 1.0).then(|| p / (p - 1.0 - alpha));
        let qn = (alpha > -1.0).then(|| p / (1.0 + alpha));
        match self {
            HardyOp::P => pn,
            HardyOp::Q => qn,
            HardyOp::S => pn.zip(qn).map(|(a, b)| a + b),
        }
    }
}

/// Family entry outcome in an operator-norm sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyRatio {
    pub index: usize,
    pub ratio: Option<f64>,
    pub tail_bound: f64,
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpNormReport {
    pub op: HardyOp,
    /// Largest observed ratio; 0 if every member was skipped.
    pub lower_bound: f64,
    pub analytic_upper: Option<f64>,
    pub ratios: Vec<FamilyRatio>,
}

impl OpNormReport {
    pub fn skipped(&self) -> usize {
        self.ratios.iter().filter(|r| r.skipped.is_some()).count()
    }
}

/// `max_f ‖op f‖_Φ / ‖f‖_Φ` with test functions and images truncated to the
/// grid, which keeps every ratio a lower bound for `‖op‖`.
pub fn opnorm_lower(
    op: HardyOp,
    phi: &PhiSpace,
    family: &[SampledFunction],
) -> Result<OpNormReport> {
    let ratios: Vec<FamilyRatio> = family
        .par_iter()
        .enumerate()
        .map(|(index, f)| {
            let base = phi_norm(phi, f)?;
            if !(base.value > 0.0) || !base.value.is_finite() {
                return Ok(FamilyRatio {
                    index,
                    ratio: None,
                    tail_bound: base.tail_bound,
                    skipped: Some(format!("test function has norm {}", base.value)),
                });
            }
            let image = phi_norm(phi, &op.apply_truncated(f)?)?;
            Ok(FamilyRatio {
                index,
                ratio: Some(image.value / base.value),
                tail_bound: image.tail_bound / base.value,
                skipped: None,
            })
        })
        .collect::<Result<_>>()?;
    let lower_bound = ratios.iter().filter_map(|r| r.ratio).fold(0.0, f64::max);
    Ok(OpNormReport {
        op,
        lower_bound,
        analytic_upper: op.analytic_upper(phi),
        ratios,
    })
}

/// Near-extremal test functions for `op` on `Φ`: `t^{-(α+1)/p+ε}χ_(0,1)` for
/// `P` and `t^{-(α+1)/p-ε}χ_(1,∞)` for `Q`, with `α` the weight exponent at
/// 0 (resp. ∞).
pub fn default_family(
    op: HardyOp,
    phi: &PhiSpace,
    grid: Arc<LogGrid>,
) -> Result<Vec<SampledFunction>> {
    let p = phi.base.p();
    let (a0, ainf) = phi.weight.asymptotic_exponents();
    let eps = [0.001, 0.002, 0.005, 0.01, 0.02, 0.05];
    let mut family = Vec::new();
    if matches!(op, HardyOp::P | HardyOp::S) {
        for e in eps {
            let g = -(a0 + 1.0) / p + e;
            family.push(SampledFunction::from_fn(grid.clone(), |t| {
                if t < 1.0 {
                    t.powf(g)
                } else {
                    0.0
                }
            })?);
        }
    }
    if matches!(op, HardyOp::Q | HardyOp::S) {
        for e in eps {
            let g = -(ainf + 1.0) / p - e;
            family.push(SampledFunction::from_fn(grid.clone(), |t| {
                if t > 1.0 {
                    t.powf(g)
                } else {
                    0.0
                }
            })?);
        }
    }
    Ok(family)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn staggered(a: f64, b: f64, n: usize) -> Arc<LogGrid> {
        Arc::new(LogGrid::staggered(a, b, n).unwrap())
    }

    fn max_err(f: &SampledFunction, exact: impl Fn(f64) -> f64) -> f64 {
        f.grid()
            .nodes()
            .iter()
            .zip(f.values())
            .map(|(&t, v)| (v - exact(t)).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn hardy_examples() {
        let g = staggered(1e-4, 1e4, 50);
        let chi = SampledFunction::indicator(g.clone(), 0.0, 1.0);
        assert!(max_err(&apply_hardy(&chi).unwrap(), |t| 1f64.min(1.0 / t)) < 1e-12);
        let c = SampledFunction::from_fn(g.clone(), |_| 3.0).unwrap();
        assert!(max_err(&apply_hardy(&c).unwrap(), |_| 3.0) < 1e-12);
        let lin = SampledFunction::from_fn(g, |t| t).unwrap();
        let p = apply_hardy(&lin).unwrap();
        let rel = p
            .grid()
            .nodes()
            .iter()
            .zip(p.values())
            .map(|(&t, v)| (v / (t / 2.0) - 1.0).abs());
        assert!(rel.fold(0.0, f64::max) < 1e-3);
    }

    #[test]
    fn adjoint_examples() {
        let g = staggered(1e-4, 1e4, 50);
        let chi = SampledFunction::indicator(g.clone(), 0.0, 1.0);
        let q = apply_adjoint(&chi).unwrap();
        let h = g.log_step();
        assert!(max_err(&q, |t| (1.0 / t).ln().max(0.0)) < h);
        assert!(
            max_err(
                &apply_adjoint(&SampledFunction::zeros(g.clone())).unwrap(),
                |_| 0.0
            ) == 0.0
        );
        let f = SampledFunction::from_fn(g.clone(), |t| if t > 1.0 { t.powi(-2) } else { 0.0 })
            .unwrap();
        let q = apply_adjoint(&f).unwrap();
        assert!(max_err(&q, |t| t.max(1.0).powi(-2) / 2.0) < 2e-3);
        let one = SampledFunction::from_fn(g, |_| 1.0).unwrap();
        assert!(matches!(apply_adjoint(&one), Err(Error::Domain(_))));
    }

    #[test]
    fn calderon_of_power() {
        let g = staggered(1e-4, 1e4, 100);
        let gamma = -0.5;
        let f = SampledFunction::from_fn(g, |t| if t < 1.0 { t.powf(gamma) } else { 0.0 }).unwrap();
        let s = apply_calderon(&f).unwrap();
        let exact = |t: f64| {
            let p = if t < 1.0 {
                t.powf(gamma) / (gamma + 1.0)
            } else {
                1.0 / ((gamma + 1.0) * t)
            };
            let q = if t < 1.0 {
                (1.0 - t.powf(gamma)) / gamma
            } else {
                0.0
            };
            p + q
        };
        let rel = s
            .grid()
            .nodes()
            .iter()
            .zip(s.values())
            .map(|(&t, v)| (v - exact(t)).abs() / exact(t));
        assert!(rel.fold(0.0, f64::max) < 0.03);
    }

    #[test]
    fn duality_on_unit_step() {
        let g = staggered(0.1, 10.0, 20);
        let f = SampledFunction::indicator(g.clone(), 1.0, 2.0);
        assert!(duality_residual(&f, &f).unwrap() <= 1e-8);
        let z = SampledFunction::zeros(g);
        assert_eq!(duality_residual(&z, &f).unwrap(), 0.0);
    }

    #[test]
    fn zero_family_is_skipped() {
        let g = staggered(1e-3, 1e3, 10);
        let phi: PhiSpace = "lp:2".parse().unwrap();
        let r = opnorm_lower(HardyOp::P, &phi, &[SampledFunction::zeros(g)]).unwrap();
        assert_eq!(r.skipped(), 1);
        assert_eq!(r.lower_bound, 0.0);
        assert_eq!(r.analytic_upper, Some(2.0));
    }

    #[test]
    fn analytic_norms() {
        let phi = PhiSpace::classical(0.3, 2.0).unwrap();
        assert!((HardyOp::P.analytic_upper(&phi).unwrap() - 1.0 / 0.3).abs() < 1e-12);
        let phi: PhiSpace = "lp:4".parse().unwrap();
        assert_eq!(HardyOp::Q.analytic_upper(&phi), Some(4.0));
    }
}
