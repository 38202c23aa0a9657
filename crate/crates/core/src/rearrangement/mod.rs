//! Weights, weighted distribution functions and decreasing rearrangements.
//!
//! Sampled functions are piecewise constant on their grid cells. Outside the
//! grid they are zero under [`Tails::Zero`] (the default), or continued by the
//! power laws fitted on the first and last decade under [`Tails::Fitted`].

mod law;
mod weight;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use law::{power_integral, PiecewiseLaw};
pub use weight::Weight;

use crate::error::{param, Error, Result};
use crate::numerics::fsum::{fsum, ExactSum};
use crate::numerics::{LogGrid, PowerLaw, SampledFunction};

/// How a sampled function continues beyond its grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Tails {
    #[default]
    Zero,
    Fitted,
    /// Fitted below the grid, zero above it.
    Head,
}

/// Nonincreasing right-continuous step function on the measure axis:
/// `f*(s) = levels[k]` for `breakpoints[k] ≤ s < breakpoints[k+1]`, and 0
/// beyond the last breakpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RearrangementResult {
    breakpoints: Vec<f64>,
    levels: Vec<f64>,
}

impl RearrangementResult {
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn is_zero(&self) -> bool {
        self.levels.is_empty()
    }

    /// Measure of the support of `f*`.
    pub fn support(&self) -> f64 {
        *self.breakpoints.last().unwrap_or(&0.0)
    }

    pub fn eval(&self, s: f64) -> f64 {
        let k = self.breakpoints.partition_point(|&b| b <= s);
        if k == 0 || k > self.levels.len() {
            0.0
        } else {
            self.levels[k - 1]
        }
    }

    /// Lebesgue measure of `{f* > λ}`.
    pub fn measure_above(&self, lambda: f64) -> f64 {
        let k = self.levels.partition_point(|&l| l > lambda);
        self.breakpoints[k]
    }

    pub fn sup(&self) -> f64 {
        self.levels.first().copied().unwrap_or(0.0)
    }
}

/// `w`-measure of every grid cell.
pub fn cell_measures(grid: &LogGrid, w: &Weight) -> Vec<f64> {
    let law = w.law();
    (0..grid.len())
        .map(|i| {
            let (a, b) = grid.cell(i);
            law.integral(a, b)
        })
        .collect()
}

/// Head and tail continuation of `f` used by [`Tails::Fitted`].
pub fn fitted_tails(f: &SampledFunction) -> (PowerLaw, PowerLaw) {
    let v = f.values();
    let head = if v[0] == 0.0 {
        PowerLaw::ZERO
    } else {
        f.head_fit()
    };
    let tail = if v[v.len() - 1] == 0.0 {
        PowerLaw::ZERO
    } else {
        f.tail_fit()
    };
    (head, tail)
}

/// Head and tail continuation of `f` under `tails`.
pub fn continuation(f: &SampledFunction, tails: Tails) -> (PowerLaw, PowerLaw) {
    match tails {
        Tails::Zero => (PowerLaw::ZERO, PowerLaw::ZERO),
        Tails::Fitted => fitted_tails(f),
        Tails::Head => (fitted_tails(f).0, PowerLaw::ZERO),
    }
}

/// `w`-measure of `{t ∈ (lo, hi) : |c t^γ| > λ}`.
fn law_superlevel_measure(p: PowerLaw, lambda: f64, lo: f64, hi: f64, law: &PiecewiseLaw) -> f64 {
    let c = p.coeff.abs();
    if c == 0.0 {
        return 0.0;
    }
    let (a, b) = if p.exponent == 0.0 {
        if c > lambda {
            (lo, hi)
        } else {
            return 0.0;
        }
    } else {
        let cross = (lambda / c).powf(1.0 / p.exponent);
        if p.exponent > 0.0 {
            (cross.max(lo), hi)
        } else {
            (lo, cross.min(hi))
        }
    };
    if b > a {
        law.integral(a, b)
    } else {
        0.0
    }
}

/// `w({|f| > λ})` with `f` zero outside the grid.
pub fn distribution_function(f: &SampledFunction, w: &Weight, lambda: f64) -> Result<f64> {
    distribution_function_with(f, w, lambda, Tails::Zero)
}

/// `w({|f| > λ})` under the given continuation of `f`; `+∞` when the
/// superlevel set has infinite measure.
pub fn distribution_function_with(
    f: &SampledFunction,
    w: &Weight,
    lambda: f64,
    tails: Tails,
) -> Result<f64> {
    if !(lambda > 0.0) {
        return param(format!(
            "distribution level must be positive (got {lambda})"
        ));
    }
    let measures = cell_measures(f.grid(), w);
    let mut parts: Vec<f64> = f
        .values()
        .iter()
        .zip(&measures)
        .filter(|(v, _)| v.abs() > lambda)
        .map(|(_, m)| *m)
        .collect();
    if tails != Tails::Zero {
        let law = w.law();
        let (head, tail) = continuation(f, tails);
        parts.push(law_superlevel_measure(
            head,
            lambda,
            0.0,
            f.grid().t_min(),
            &law,
        ));
        parts.push(law_superlevel_measure(
            tail,
            lambda,
            f.grid().t_max(),
            f64::INFINITY,
            &law,
        ));
    }
    Ok(fsum(parts))
}

/// Decreasing rearrangement of `|f|` with respect to `w dt`, `f` zero outside
/// the grid.
pub fn decreasing_rearrangement(f: &SampledFunction, w: &Weight) -> Result<RearrangementResult> {
    rearrange_cells(f.values(), &cell_measures(f.grid(), w))
}

/// Decreasing rearrangement with `f` continued by its fitted tails, which are
/// sampled on `extra_decades` further decades on each side.
pub fn decreasing_rearrangement_with(
    f: &SampledFunction,
    w: &Weight,
    tails: Tails,
    extra_decades: f64,
) -> Result<RearrangementResult> {
    match tails {
        Tails::Zero => decreasing_rearrangement(f, w),
        Tails::Fitted | Tails::Head => {
            check_finite_superlevels(f, w, tails)?;
            let ext = extend_with(f, extra_decades, tails)?;
            decreasing_rearrangement(&ext, w)
        }
    }
}

/// Fails when some superlevel set of the fitted continuation has infinite
/// `w`-measure.
pub fn check_finite_superlevels(f: &SampledFunction, w: &Weight, tails: Tails) -> Result<()> {
    let (head, tail) = continuation(f, tails);
    let (a0, ainf) = w.asymptotic_exponents();
    if !head.is_zero() && head.exponent <= 0.0 && a0 <= -1.0 {
        return Err(Error::RearrangementUndefined(format!(
            "head ~ t^{:.4} does not decay at 0 and the weight is not integrable there",
            head.exponent
        )));
    }
    if !tail.is_zero() && tail.exponent >= 0.0 && ainf >= -1.0 {
        return Err(Error::RearrangementUndefined(format!(
            "tail ~ t^{:.4} does not decay at infinity and the weight is not integrable there",
            tail.exponent
        )));
    }
    Ok(())
}

/// `f` resampled on a grid widened by `decades` on each side, at the same
/// density, using the fitted continuation outside the original grid.
pub fn extend(f: &SampledFunction, decades: f64) -> Result<SampledFunction> {
    extend_with(f, decades, Tails::Fitted)
}

/// [`extend`] under the given continuation.
pub fn extend_with(f: &SampledFunction, decades: f64, tails: Tails) -> Result<SampledFunction> {
    if !(decades >= 0.0) {
        return param("extension must be nonnegative");
    }
    let g = f.grid();
    let k = (decades * std::f64::consts::LN_10 / g.log_step()).round() as usize;
    let step = g.log_step();
    let lo = g.t_min() * (-(k as f64) * step).exp();
    let hi = g.t_max() * ((k as f64) * step).exp();
    let wide = Arc::new(LogGrid::new(lo, hi, g.len() + 2 * k)?);
    let (head, tail) = continuation(f, tails);
    let mut values = Vec::with_capacity(wide.len());
    for (i, &t) in wide.nodes().iter().enumerate() {
        values.push(if i < k {
            head.eval(t)
        } else if i >= k + g.len() {
            tail.eval(t)
        } else {
            f.values()[i - k]
        });
    }
    SampledFunction::new(wide, values)
}

/// Rearrangement of a step function given by cell values and cell measures.
pub fn rearrange_cells(values: &[f64], measures: &[f64]) -> Result<RearrangementResult> {
    if values.len() != measures.len() {
        return param("values and measures differ in length");
    }
    let mut order: Vec<usize> = (0..values.len()).filter(|&i| values[i] != 0.0).collect();
    order.sort_by(|&i, &j| values[j].abs().total_cmp(&values[i].abs()));
    let mut levels = Vec::new();
    let mut breakpoints = vec![0.0];
    let mut taken = ExactSum::default();
    let mut k = 0;
    while k < order.len() {
        let level = values[order[k]].abs();
        while k < order.len() && values[order[k]].abs() == level {
            let m = measures[order[k]];
            if !m.is_finite() {
                return Err(Error::RearrangementUndefined(format!(
                    "superlevel set of level {level} has infinite measure"
                )));
            }
            taken.add(m);
            k += 1;
        }
        let b = taken.value();
        if b > *breakpoints.last().unwrap() {
            levels.push(level);
            breakpoints.push(b);
        }
    }
    Ok(RearrangementResult {
        breakpoints,
        levels,
    })
}

/// `∫_0^1 w` when finite.
pub fn cutoff_integrability(w: &Weight) -> Option<f64> {
    let v = w.integral(0.0, 1.0);
    v.is_finite().then_some(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(a: f64, b: f64, n: usize) -> Arc<LogGrid> {
        Arc::new(LogGrid::new(a, b, n).unwrap())
    }

    /// `2 χ_(0,1) + χ_(1,3)` on a grid whose edges contain 1 and 3.
    fn two_step() -> SampledFunction {
        let g = grid(3f64.powf(-6.5), 3f64.powf(1.5), 9);
        let v = g
            .nodes()
            .iter()
            .map(|&t| {
                if t < 1.0 {
                    2.0
                } else if t < 3.0 {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        SampledFunction::new(g, v).unwrap()
    }

    #[test]
    fn distribution_of_two_step() {
        let f = two_step();
        let g = f.grid();
        let w = Weight::one();
        // zero outside the grid: the measures are taken from t_min
        let base = g.t_min();
        for (lambda, want) in [
            (0.5, 3.0 - base),
            (1.0, 1.0 - base),
            (1.5, 1.0 - base),
            (2.0, 0.0),
            (7.0, 0.0),
        ] {
            let got = distribution_function(&f, &w, lambda).unwrap();
            assert!((got - want).abs() < 1e-12, "λ {lambda}: {got} vs {want}");
        }
        let fitted = distribution_function_with(&f, &w, 0.5, Tails::Fitted).unwrap();
        assert!((fitted - 3.0).abs() < 1e-12);
    }

    #[test]
    fn rearrangement_of_two_step() {
        let f = two_step();
        let r = decreasing_rearrangement_with(&f, &Weight::one(), Tails::Fitted, 6.0).unwrap();
        assert_eq!(r.levels(), &[2.0, 1.0]);
        let b = r.breakpoints();
        assert_eq!(b[0], 0.0);
        // the continuation stops six decades below t_min
        assert!((b[1] - 1.0).abs() < 1e-8 && (b[2] - 3.0).abs() < 1e-8);
    }

    #[test]
    fn zero_function() {
        let f = SampledFunction::zeros(grid(0.1, 10.0, 50));
        assert_eq!(
            distribution_function(&f, &Weight::power(-0.5), 0.1).unwrap(),
            0.0
        );
        assert!(decreasing_rearrangement(&f, &Weight::one())
            .unwrap()
            .is_zero());
        assert!(distribution_function(&f, &Weight::one(), 0.0).is_err());
    }

    #[test]
    fn indicator_with_singular_weight() {
        let g = Arc::new(LogGrid::staggered(1e-6, 1e2, 40).unwrap());
        let chi = SampledFunction::indicator(g, 0.0, 1.0);
        let w = Weight::power(-0.5);
        let got = distribution_function_with(&chi, &w, 0.5, Tails::Fitted).unwrap();
        assert!((got - 2.0).abs() < 1e-12, "{got}");
        let r = decreasing_rearrangement_with(&chi, &w, Tails::Fitted, 6.0).unwrap();
        assert_eq!(r.levels(), &[1.0]);
        assert!((r.support() - 2.0).abs() < 1e-5);
        let bad = decreasing_rearrangement_with(&chi, &Weight::power(-1.0), Tails::Fitted, 6.0);
        assert!(matches!(bad, Err(Error::RearrangementUndefined(_))));
    }

    #[test]
    fn decreasing_input_is_its_own_rearrangement() {
        let g = grid(1e-3, 20.0, 600);
        let f = SampledFunction::from_fn(g.clone(), |t| (-t).exp()).unwrap();
        let r = decreasing_rearrangement(&f, &Weight::one()).unwrap();
        let step = g.ratio();
        for &t in g.nodes().iter().step_by(37) {
            let s = t - g.t_min();
            let v = r.eval(s);
            assert!(v <= (-t / step).exp() + 1e-15 && v >= (-t * step).exp() - 1e-15);
        }
    }

    #[test]
    fn cutoff_integrals() {
        assert_eq!(cutoff_integrability(&Weight::one()), Some(1.0));
        assert_eq!(cutoff_integrability(&Weight::power(-1.0)), None);
        assert!((cutoff_integrability(&Weight::power(-0.5)).unwrap() - 2.0).abs() < 1e-15);
    }
}
