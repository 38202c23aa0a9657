//! Weight-class constants: `M_p`, `M_1`, `M^p`, `A_p^-`, `A_p^+` and `C_p`.
//!
//! Every weight normalises to a piecewise power law, so the defining
//! integrals are closed-form. A constant is reported as diverging when one of
//! its factors is non-integrable (an analytic certificate), or when the sweep
//! over growing truncation ranges grows by at least `growth_factor` per decade
//! for `growth_decades` consecutive decades.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::rearrangement::{PiecewiseLaw, Weight};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    /// Half-width in decades (around 1) of the parameter range.
    pub decades: usize,
    /// Parameter samples per decade.
    pub per_decade: usize,
    /// Relative positions of `b` in `(a, c)` for the `A_p^-` triples.
    pub positions: usize,
    pub growth_factor: f64,
    pub growth_decades: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            decades: 4,
            per_decade: 10,
            positions: 8,
            growth_factor: 10.0,
            growth_decades: 3,
        }
    }
}

impl SweepConfig {
    /// The same ranges sampled `factor` times more densely.
    pub fn refined(&self, factor: usize) -> Self {
        Self {
            per_decade: self.per_decade * factor,
            positions: self.positions * factor,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    In,
    Out,
    Inconclusive,
}

/// One class constant with its sweep diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassConstant {
    pub class: String,
    pub p: f64,
    /// Estimate of the constant when finite.
    pub value: Option<f64>,
    pub diverging: bool,
    pub verdict: Verdict,
    pub reason: Option<String>,
    /// `(D, constant with every range truncated to [10^-D, 10^D])`.
    pub sweep: Vec<(f64, f64)>,
    /// Ratios of consecutive sweep values.
    pub growth_per_decade: Vec<f64>,
}

impl ClassConstant {
    fn assemble(
        class: &str,
        p: f64,
        full: f64,
        certificate: Option<String>,
        sweep: Vec<(f64, f64)>,
        cfg: &SweepConfig,
    ) -> Self {
        let growth: Vec<f64> = sweep.windows(2).map(|w| w[1].1 / w[0].1).collect();
        let k = cfg.growth_decades;
        let grows = growth.len() >= k
            && growth[growth.len() - k..]
                .iter()
                .all(|g| *g >= cfg.growth_factor);
        let saturated = growth.last().is_some_and(|g| *g <= 1.1);
        let (diverging, verdict, reason) = if let Some(r) = certificate {
            (true, Verdict::Out, Some(r))
        } else if grows || !full.is_finite() {
            (
                true,
                Verdict::Out,
                Some(format!(
                    "sweep grows by at least {}x per decade",
                    cfg.growth_factor
                )),
            )
        } else if saturated {
            (false, Verdict::In, None)
        } else {
            (
                false,
                Verdict::Inconclusive,
                Some("sweep has not saturated".to_string()),
            )
        };
        ClassConstant {
            class: class.to_string(),
            p,
            value: (!diverging).then_some(full),
            diverging,
            verdict,
            reason,
            sweep,
            growth_per_decade: growth,
        }
    }

    pub fn is_in(&self) -> bool {
        self.verdict == Verdict::In
    }
}

fn conjugate(p: f64) -> f64 {
    p / (p - 1.0)
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 1.0 && p.is_finite()) {
        return param(format!("class exponent must satisfy 1 < p < inf (got {p})"));
    }
    Ok(())
}

/// Log-spaced samples of `[10^-d, 10^d]` plus the law's breakpoints inside.
fn r_samples(d: f64, per_decade: usize, law: &PiecewiseLaw) -> Vec<f64> {
    let n = (2.0 * d * per_decade as f64).round() as usize;
    let mut rs: Vec<f64> = (0..=n)
        .map(|i| 10f64.powf(-d + 2.0 * d * i as f64 / n as f64))
        .collect();
    let (lo, hi) = (10f64.powf(-d), 10f64.powf(d));
    rs.extend(law.breaks().iter().copied().filter(|&b| b > lo && b < hi));
    rs.sort_by(f64::total_cmp);
    rs
}

/// Golden-section refinement of a unimodal-looking maximum in `[lo, hi]`.
fn refine_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..60 {
        if f1 > f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
    }
    f1.max(f2)
}

/// `sup_r (∫_r^R w s^{-p}) (∫_ε^r w^{1-p'})^{p-1}` over `r ∈ [10^-d, 10^d]`
/// with `(ε, R)` the truncation range.
fn mp_sup(law: &PiecewiseLaw, p: f64, d: f64, per_decade: usize, eps: f64, big: f64) -> f64 {
    let upper = law.times_power(-p);
    let lower = law.powf(1.0 - conjugate(p));
    let prod = |r: f64| upper.integral(r, big) * lower.integral(eps, r).powf(p - 1.0);
    let rs = r_samples(d, per_decade, law);
    let vals: Vec<f64> = rs.iter().map(|&r| prod(r)).collect();
    let (k, mut best) =
        vals.iter().enumerate().fold(
            (0, f64::NEG_INFINITY),
            |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc },
        );
    if best.is_finite() && rs.len() > 2 {
        let lo = rs[k.saturating_sub(1)].ln();
        let hi = rs[(k + 1).min(rs.len() - 1)].ln();
        best = best.max(refine_max(|x| prod(x.exp()), lo, hi));
    }
    best
}

fn truncated_sweep(cfg: &SweepConfig, at: impl Fn(f64) -> f64 + Sync) -> Vec<(f64, f64)> {
    (1..=cfg.decades.max(cfg.growth_decades + 1))
        .into_par_iter()
        .map(|d| (d as f64, at(d as f64)))
        .collect()
}

/// `[w]_{M_p}`.
pub fn mp_constant(w: &Weight, p: f64, cfg: &SweepConfig) -> Result<ClassConstant> {
    check_p(p)?;
    let law = w.law();
    let (a0, ainf) = (law.exponent_at_zero(), law.exponent_at_infinity());
    let pc = conjugate(p);
    let mut certificate = None;
    if ainf - p >= -1.0 {
        certificate = Some(format!(
            "∫_r^∞ w(s) s^-p ds diverges (w ~ t^{ainf} at infinity)"
        ));
    } else if a0 * (1.0 - pc) <= -1.0 {
        certificate = Some(format!("∫_0^r w^(1-p') diverges (w ~ t^{a0} at 0)"));
    }
    let d = cfg.decades as f64;
    let full = if certificate.is_some() {
        f64::INFINITY
    } else {
        mp_sup(&law, p, d, cfg.per_decade, 0.0, f64::INFINITY)
    };
    let sweep = truncated_sweep(cfg, |dd| {
        mp_sup(&law, p, dd, cfg.per_decade, 10f64.powf(-dd), 10f64.powf(dd))
    });
    Ok(ClassConstant::assemble(
        "M_p",
        p,
        full,
        certificate,
        sweep,
        cfg,
    ))
}

/// `[w]_{M^p} = [w^{1/(1-p)}]_{M_{p'}}`, and `‖Pw/w‖_∞` for `p = 1`.
pub fn mup_constant(w: &Weight, p: f64, cfg: &SweepConfig) -> Result<ClassConstant> {
    if p == 1.0 {
        return m_sup_ratio(w, cfg, false);
    }
    check_p(p)?;
    let mut c = mp_constant(&w.powered(1.0 / (1.0 - p)), conjugate(p), cfg)?;
    c.class = "M^p".to_string();
    c.p = p;
    Ok(c)
}

/// `[w]_{M_1} = ‖Qw/w‖_∞`.
pub fn m1_constant(w: &Weight, cfg: &SweepConfig) -> Result<ClassConstant> {
    m_sup_ratio(w, cfg, true)
}

fn m_sup_ratio(w: &Weight, cfg: &SweepConfig, adjoint: bool) -> Result<ClassConstant> {
    let law = w.law();
    let (a0, ainf) = (law.exponent_at_zero(), law.exponent_at_infinity());
    let certificate = if adjoint && ainf >= 0.0 {
        Some(format!("Qw diverges (w ~ t^{ainf} at infinity)"))
    } else if !adjoint && a0 <= -1.0 {
        Some(format!("Pw diverges (w ~ t^{a0} at 0)"))
    } else {
        None
    };
    let ratio = |t: f64, eps: f64, big: f64| {
        let num = if adjoint {
            law.times_power(-1.0).integral(t, big)
        } else {
            law.integral(eps, t) / t
        };
        num / law.eval(t)
    };
    let sup = |d: f64, eps: f64, big: f64| {
        r_samples(d, cfg.per_decade, &law)
            .iter()
            .map(|&t| ratio(t, eps, big))
            .fold(0.0, f64::max)
    };
    let d = cfg.decades as f64;
    let full = if certificate.is_some() {
        f64::INFINITY
    } else {
        sup(d, 0.0, f64::INFINITY)
    };
    let sweep = truncated_sweep(cfg, |dd| sup(dd, 10f64.powf(-dd), 10f64.powf(dd)));
    let class = if adjoint { "M_1" } else { "M^1" };
    Ok(ClassConstant::assemble(
        class,
        1.0,
        full,
        certificate,
        sweep,
        cfg,
    ))
}

/// `(c−a)^{-p} (∫_b^c w) (∫_a^b w^{1-p'})^{p-1}`.
fn ap_product(w: &PiecewiseLaw, wd: &PiecewiseLaw, p: f64, a: f64, b: f64, c: f64) -> f64 {
    w.integral(b, c) * wd.integral(a, b).powf(p - 1.0) / (c - a).powf(p)
}

/// Sup over triples with `c` log-spaced in `[10^-d, 10^d]`, `a ∈ {0, c/10, c/2}`
/// (the lower end clipped to `eps`) and `b` at relative positions in `(a, c)`,
/// refined around the best position.
fn ap_sup(law: &PiecewiseLaw, p: f64, d: f64, cfg: &SweepConfig, eps: f64) -> f64 {
    let wd = law.powf(1.0 - conjugate(p));
    let n = (2.0 * d * cfg.per_decade as f64).round() as usize;
    let cs: Vec<f64> = (0..=n)
        .map(|i| 10f64.powf(-d + 2.0 * d * i as f64 / n as f64))
        .collect();
    let m = cfg.positions;
    cs.par_iter()
        .map(|&c| {
            let mut best = 0.0f64;
            for a in [0.0f64, c / 10.0, c / 2.0] {
                let a = a.max(eps);
                if a >= c {
                    continue;
                }
                let at = |s: f64| ap_product(law, &wd, p, a, a + s * (c - a), c);
                let (j, v) = (1..m).map(|j| (j, at(j as f64 / m as f64))).fold(
                    (0, f64::NEG_INFINITY),
                    |acc, x| if x.1 > acc.1 { x } else { acc },
                );
                best = best.max(v);
                if v.is_finite() {
                    let lo = (j as f64 - 1.0) / m as f64;
                    let hi = (j as f64 + 1.0) / m as f64;
                    best = best.max(refine_max(at, lo.max(1e-12), hi.min(1.0 - 1e-12)));
                } else {
                    best = f64::INFINITY;
                }
            }
            best
        })
        .reduce(|| 0.0, f64::max)
}

/// `[w]_{A_p^-}`.
pub fn apminus_constant(w: &Weight, p: f64, cfg: &SweepConfig) -> Result<ClassConstant> {
    check_p(p)?;
    let law = w.law();
    let a0 = law.exponent_at_zero();
    let certificate = (a0 * (1.0 - conjugate(p)) <= -1.0)
        .then(|| format!("∫_0^b w^(1-p') diverges (w ~ t^{a0} at 0)"));
    let full = if certificate.is_some() {
        f64::INFINITY
    } else {
        ap_sup(&law, p, cfg.decades as f64, cfg, 0.0)
    };
    let sweep = truncated_sweep(cfg, |dd| ap_sup(&law, p, dd, cfg, 10f64.powf(-dd - 1.0)));
    Ok(ClassConstant::assemble(
        "A_p^-",
        p,
        full,
        certificate,
        sweep,
        cfg,
    ))
}

/// `[w]_{A_p^+} = [w^{1/(1-p)}]_{A^-_{p'}}`.
pub fn applus_constant(w: &Weight, p: f64, cfg: &SweepConfig) -> Result<ClassConstant> {
    check_p(p)?;
    let mut c = apminus_constant(&w.powered(1.0 / (1.0 - p)), conjugate(p), cfg)?;
    c.class = "A_p^+".to_string();
    c.p = p;
    Ok(c)
}

/// Openness probe: `A_q^-` at exponents slightly below `p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpennessProbe {
    pub q: f64,
    pub verdict: Verdict,
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightClassReport {
    pub weight: String,
    pub p: f64,
    pub fitted_exponents: Option<(f64, f64)>,
    pub m_p: ClassConstant,
    pub m_up: ClassConstant,
    pub a_minus: ClassConstant,
    pub a_plus: ClassConstant,
    /// `C_p = M_p ∩ M^p`.
    pub c_p: Verdict,
    /// `A_p^- ⊆ M_p` holds on this weight (vacuous unless `A_p^-` is in).
    pub a_minus_in_m_p: bool,
    pub openness: Vec<OpennessProbe>,
}

fn both(a: Verdict, b: Verdict) -> Verdict {
    match (a, b) {
        (Verdict::Out, _) | (_, Verdict::Out) => Verdict::Out,
        (Verdict::In, Verdict::In) => Verdict::In,
        _ => Verdict::Inconclusive,
    }
}

/// All class constants of `w` at exponent `p`.
pub fn classify(w: &Weight, p: f64, cfg: &SweepConfig) -> Result<WeightClassReport> {
    check_p(p)?;
    let m_p = mp_constant(w, p, cfg)?;
    let m_up = mup_constant(w, p, cfg)?;
    let a_minus = apminus_constant(w, p, cfg)?;
    let a_plus = applus_constant(w, p, cfg)?;
    let c_p = both(m_p.verdict, m_up.verdict);
    let a_minus_in_m_p = !a_minus.is_in() || m_p.verdict != Verdict::Out;
    let openness = [0.02, 0.05, 0.1]
        .iter()
        .map(|&delta| p - delta * (p - 1.0))
        .map(|q| {
            let c = apminus_constant(w, q, cfg)?;
            Ok(OpennessProbe {
                q,
                verdict: c.verdict,
                value: c.value,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(WeightClassReport {
        weight: w.to_string(),
        p,
        fitted_exponents: w.is_fitted().then(|| w.asymptotic_exponents()),
        m_p,
        m_up,
        a_minus,
        a_plus,
        c_p,
        a_minus_in_m_p,
        openness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> SweepConfig {
        SweepConfig::default()
    }

    #[test]
    fn mp_examples() {
        for p in [1.5, 2.0, 3.0] {
            let c = mp_constant(&Weight::one(), p, &cfg()).unwrap();
            assert!((c.value.unwrap() - 1.0 / (p - 1.0)).abs() < 1e-9);
            assert_eq!(c.verdict, Verdict::In);
        }
        let c = mp_constant(&Weight::power(0.5), 2.0, &cfg()).unwrap();
        assert!((c.value.unwrap() - 4.0).abs() < 1e-9);
        let c = mp_constant(&Weight::power(1.0), 2.0, &cfg()).unwrap();
        assert!(c.diverging && c.verdict == Verdict::Out);
    }

    #[test]
    fn m1_examples() {
        let c = m1_constant(&Weight::power(-0.5), &cfg()).unwrap();
        assert!((c.value.unwrap() - 2.0).abs() < 1e-12);
        assert!(m1_constant(&Weight::one(), &cfg()).unwrap().diverging);
        let c = m1_constant(&Weight::power(-0.25), &cfg()).unwrap();
        assert!((c.value.unwrap() - 4.0).abs() < 1e-12);
        let c = mup_constant(&Weight::power(0.5), 1.0, &cfg()).unwrap();
        assert!((c.value.unwrap() - 1.0 / 1.5).abs() < 1e-12);
    }

    #[test]
    fn mup_examples() {
        let c = mup_constant(&Weight::one(), 2.0, &cfg()).unwrap();
        assert!((c.value.unwrap() - 1.0).abs() < 1e-9);
        // t^α ∈ M^p iff the transformed exponent α/(1-p) lies below p' - 1
        for (alpha, inside) in [(0.5, true), (-0.5, true), (-1.0, false), (1.5, true)] {
            let c = mup_constant(&Weight::power(alpha), 2.0, &cfg()).unwrap();
            assert_eq!(c.is_in(), inside, "alpha {alpha}");
        }
    }

    #[test]
    fn apminus_examples() {
        let c = apminus_constant(&Weight::one(), 2.0, &cfg()).unwrap();
        assert!((c.value.unwrap() - 0.25).abs() < 1e-9);
        for p in [1.5, 2.0, 4.0] {
            let c = apminus_constant(&Weight::piecewise_power(-0.5, -1.0), p, &cfg()).unwrap();
            assert!(c.is_in(), "p {p}: {:?}", c.reason);
            let c = apminus_constant(&Weight::power(-0.7), p, &cfg()).unwrap();
            assert!(c.is_in());
        }
        let c = applus_constant(&Weight::one(), 2.0, &cfg()).unwrap();
        assert!(c.is_in());
        let c = applus_constant(&Weight::power(0.6), 3.0, &cfg()).unwrap();
        assert!(c.is_in());
    }

    #[test]
    fn classify_examples() {
        let r = classify(&Weight::one(), 2.0, &cfg()).unwrap();
        assert!(r.m_p.is_in() && r.m_up.is_in() && r.a_minus.is_in() && r.a_plus.is_in());
        assert_eq!(r.c_p, Verdict::In);
        let r = classify(&Weight::piecewise_power(-0.5, -1.0), 2.0, &cfg()).unwrap();
        assert!(r.a_minus.is_in());
        assert_eq!(r.c_p, Verdict::Out);
        assert!(r.m_up.diverging);
        let r = classify(&Weight::power(1.0), 2.0, &cfg()).unwrap();
        assert!(r.m_p.diverging);
    }

    #[test]
    fn sweeps_are_monotone() {
        let c = mp_constant(&Weight::piecewise_power(-0.5, -1.0), 2.0, &cfg()).unwrap();
        assert!(c.sweep.windows(2).all(|w| w[1].1 >= w[0].1));
        let c = mp_constant(&Weight::power(2.0), 2.0, &cfg()).unwrap();
        assert!(c.sweep.windows(2).all(|w| w[1].1 >= w[0].1));
        assert!(c.growth_per_decade.iter().all(|g| *g >= 10.0));
    }
}
