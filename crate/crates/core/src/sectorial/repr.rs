use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::{c, calc, contour_for, HolFunction, Quadrature, SectorialOperator};
use crate::couples::{require_nontrivial, trace_construction};
use crate::error::{param, Error, Result};
use crate::numerics::{LogGrid, SampledFunction, VecNorm};
use crate::rearrangement::Tails;
use crate::ri_spaces::{phi_norm_with, PhiSpace};

/// Largest `‖e^{-tA}‖₂` on the grid accepted as a bounded semigroup.
const SEMIGROUP_BOUND: f64 = 1e8;

/// `‖f(A)‖ / ‖f‖_∞` below which `f(A)` counts as zero.
const DEGENERATE: f64 = 1e-9;

/// `|x|_X·[include_base] + ‖t ↦ t^{-1}|ψ(tA)x|_X‖_Φ`.
pub fn psi_rep_norm(
    phi: &PhiSpace,
    op: &SectorialOperator,
    psi: &HolFunction,
    x: &[Complex64],
    include_base: bool,
    grid: &Arc<LogGrid>,
    norm: &VecNorm,
) -> Result<f64> {
    require_nontrivial(phi)?;
    check_vector(op, x)?;
    if x.iter().all(|z| *z == c(0.0)) {
        return Ok(0.0);
    }
    let g = psi_profile(op, psi, x, grid, norm)?;
    let base = if include_base { norm.eval(x) } else { 0.0 };
    Ok(base + phi_norm_with(phi, &g, Tails::Fitted)?.value)
}

/// `t ↦ t^{-1}|ψ(tA)x|_X` on the grid.
fn psi_profile(
    op: &SectorialOperator,
    psi: &HolFunction,
    x: &[Complex64],
    grid: &Arc<LogGrid>,
    norm: &VecNorm,
) -> Result<SampledFunction> {
    let ts = grid.nodes();
    let h0 = match psi {
        HolFunction::H0 { .. } => Some(psi),
        HolFunction::EClass { h0, .. } => h0.as_deref(),
        HolFunction::HInf { .. } => return param("ψ must lie in the E-class, not merely in H∞"),
    };
    let quad = match h0 {
        Some(h) => Some(Quadrature::new(
            op,
            contour_for(h, op, ts[0], ts[ts.len() - 1])?,
        )?),
        None => None,
    };
    let rx = quad.as_ref().map(|q| q.resolvent_times(x));
    let values: Result<Vec<f64>> = ts
        .par_iter()
        .map(|&t| {
            let mut y = vec![c(0.0); x.len()];
            if let (Some(h), Some(q), Some(rx)) = (h0, &quad, &rx) {
                y = q.apply_scaled_vec(h, rx, t)?;
            }
            if let HolFunction::EClass { lambda, mu, .. } = psi {
                if *lambda != c(0.0) {
                    let r = op.a.scale(c(t)).shift(c(1.0)).solve_vec(x)?;
                    y.iter_mut().zip(&r).for_each(|(a, b)| *a += b * lambda);
                }
                y.iter_mut().zip(x).for_each(|(a, b)| *a += b * mu);
            }
            Ok(norm.eval(&y) / t)
        })
        .collect();
    SampledFunction::new(grid.clone(), values?)
}

/// `|x|_X + ‖t ↦ t^{-1}|(e^{-tA} − I)x|_X‖_Φ`.
pub fn semigroup_rep_norm(
    phi: &PhiSpace,
    op: &SectorialOperator,
    x: &[Complex64],
    grid: &Arc<LogGrid>,
    norm: &VecNorm,
) -> Result<f64> {
    require_nontrivial(phi)?;
    check_vector(op, x)?;
    if op.angle_estimate() >= FRAC_PI_2 {
        return Err(Error::Domain(
            "spectral angle at least π/2: e^{-tA} is not a bounded analytic semigroup".into(),
        ));
    }
    if x.iter().all(|z| *z == c(0.0)) {
        return Ok(0.0);
    }
    let g = semigroup_profile(op, x, grid, norm)?;
    Ok(norm.eval(x) + phi_norm_with(phi, &g, Tails::Fitted)?.value)
}

/// `t ↦ t^{-1}|(e^{-tA} − I)x|_X` on the grid.
fn semigroup_profile(
    op: &SectorialOperator,
    x: &[Complex64],
    grid: &Arc<LogGrid>,
    norm: &VecNorm,
) -> Result<SampledFunction> {
    if op.angle_estimate() >= FRAC_PI_2 {
        return Err(Error::Domain(
            "spectral angle at least π/2: e^{-tA} is not a bounded analytic semigroup".into(),
        ));
    }
    let values: Result<Vec<f64>> = grid
        .nodes()
        .par_iter()
        .map(|&t| {
            let s = op.a.mat_exp(t)?;
            if s.norm_2() > SEMIGROUP_BOUND {
                return Err(Error::Domain(format!(
                    "‖e^(-tA)‖ exceeds {SEMIGROUP_BOUND:e} at t = {t}"
                )));
            }
            let y = s.apply(x);
            let d: Vec<Complex64> = y.iter().zip(x).map(|(a, b)| a - b).collect();
            Ok(norm.eval(&d) / t)
        })
        .collect();
    SampledFunction::new(grid.clone(), values?)
}

fn check_vector(op: &SectorialOperator, x: &[Complex64]) -> Result<()> {
    if x.len() != op.dim() {
        return param(format!(
            "vector has length {} but the operator has dimension {}",
            x.len(),
            op.dim()
        ));
    }
    Ok(())
}

/// Norms compared by [`interp_norm_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    KMethod,
    Trace,
    PsiExp,
    PsiRational,
    PsiRegulariser,
    Semigroup,
}

impl Representation {
    pub const ALL: [Representation; 6] = [
        Representation::KMethod,
        Representation::Trace,
        Representation::PsiExp,
        Representation::PsiRational,
        Representation::PsiRegulariser,
        Representation::Semigroup,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Representation::KMethod => "k_method",
            Representation::Trace => "trace",
            Representation::PsiExp => "psi_z_exp",
            Representation::PsiRational => "psi_z_over_1pz",
            Representation::PsiRegulariser => "psi_z_over_1pz_sq",
            Representation::Semigroup => "semigroup",
        }
    }
}

/// Range of `norm_a / norm_b` over the sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairBracket {
    pub a: Representation,
    pub b: Representation,
    pub min_ratio: f64,
    pub max_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterpNormReport {
    pub representations: Vec<Representation>,
    /// `norms[i][j]`: sample `i`, representation `j`.
    pub norms: Vec<Vec<f64>>,
    pub brackets: Vec<PairBracket>,
    /// Smallest `C` with every pairwise ratio in `[1/C, C]`.
    pub constant: f64,
}

/// All six norms of each sample vector on the couple `(X, dom A)`.
pub fn interp_norm_report(
    op: &SectorialOperator,
    phi: &PhiSpace,
    xs: &[Vec<Complex64>],
    grid: &Arc<LogGrid>,
    norm: &VecNorm,
) -> Result<InterpNormReport> {
    let mut reports = interp_norm_reports(op, std::slice::from_ref(phi), xs, grid, norm)?;
    Ok(reports.remove(0))
}

/// [`interp_norm_report`] for several spaces, sampling each vector once.
pub fn interp_norm_reports(
    op: &SectorialOperator,
    phis: &[PhiSpace],
    xs: &[Vec<Complex64>],
    grid: &Arc<LogGrid>,
    norm: &VecNorm,
) -> Result<Vec<InterpNormReport>> {
    if phis.is_empty() {
        return param("at least one space is required");
    }
    for phi in phis {
        require_nontrivial(phi)?;
    }
    if xs.is_empty() {
        return param("the sample must contain at least one vector");
    }
    if xs.iter().any(|x| x.iter().all(|z| *z == c(0.0))) {
        return param("zero vectors are excluded from the comparison");
    }
    for x in xs {
        check_vector(op, x)?;
    }
    let couple = op.domain_couple(norm.clone());
    let phi_w = op.working_angle();
    let psi_exp = HolFunction::psi_exp(phi_w)?;
    let psi_rat = HolFunction::psi_rational();
    let psi_reg = HolFunction::regulariser(phi_w);
    let include_base = !op.is_invertible();
    let mut norms = vec![Vec::with_capacity(xs.len()); phis.len()];
    for x in xs {
        let base = norm.eval(x);
        let psi_base = if include_base { base } else { 0.0 };
        let ks = couple.k_curve(x, grid.nodes())?;
        let k = SampledFunction::new(
            grid.clone(),
            ks.iter()
                .zip(grid.nodes())
                .map(|(d, t)| d.value / t)
                .collect(),
        )?;
        let tr = trace_construction(&couple, &phis[0], x, grid)?;
        // (constant, profiles summed in Φ)
        let parts: [(f64, Vec<SampledFunction>); 6] = [
            (0.0, vec![k]),
            (
                0.0,
                vec![
                    tr.u.map_norm(|v| couple.y_norm(v)),
                    tr.du.map_norm(|v| couple.x_norm(v)),
                ],
            ),
            (psi_base, vec![psi_profile(op, &psi_exp, x, grid, norm)?]),
            (psi_base, vec![psi_profile(op, &psi_rat, x, grid, norm)?]),
            (psi_base, vec![psi_profile(op, &psi_reg, x, grid, norm)?]),
            (base, vec![semigroup_profile(op, x, grid, norm)?]),
        ];
        for (phi, out) in phis.iter().zip(norms.iter_mut()) {
            let mut row = Vec::with_capacity(parts.len());
            for (constant, profiles) in &parts {
                let mut v = *constant;
                for g in profiles {
                    v += phi_norm_with(phi, g, Tails::Fitted)?.value;
                }
                row.push(v);
            }
            out.push(row);
        }
    }
    Ok(norms.into_iter().map(summarise).collect())
}

fn summarise(norms: Vec<Vec<f64>>) -> InterpNormReport {
    let reps = Representation::ALL.to_vec();
    let mut brackets = Vec::new();
    let mut constant: f64 = 1.0;
    for i in 0..reps.len() {
        for j in (i + 1)..reps.len() {
            let ratios: Vec<f64> = norms.iter().map(|r| r[i] / r[j]).collect();
            let min_ratio = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
            let max_ratio = ratios.iter().cloned().fold(0.0, f64::max);
            constant = constant.max(max_ratio).max(1.0 / min_ratio);
            brackets.push(PairBracket {
                a: reps[i],
                b: reps[j],
                min_ratio,
                max_ratio,
            });
        }
    }
    InterpNormReport {
        representations: reps,
        norms,
        brackets,
        constant,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DoreMember {
    pub name: String,
    pub sup_norm: f64,
    /// `‖f(A)‖₂` on `X`.
    pub operator_norm: f64,
    /// `max_x ‖f(A)x‖_Φ / (‖f‖_∞ ‖x‖_Φ)`.
    pub hinf_ratio: f64,
    /// `max_x ‖f(A)x‖_Φ / (‖f(A)‖ ‖x‖_Φ)`; `None` when `f(A)` vanishes to rounding.
    pub relative_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DoreReport {
    pub members: Vec<DoreMember>,
    /// Largest `hinf_ratio` over the family.
    pub ratio: f64,
}

/// Interpolation-space norms of `f(A)x` against `‖f‖_∞`, measured with the
/// `ψ(z) = z/(1+z)` representation.
pub fn dore_ratio(
    op: &SectorialOperator,
    phi: &PhiSpace,
    family: &[HolFunction],
    xs: &[Vec<Complex64>],
    grid: &Arc<LogGrid>,
    norm: &VecNorm,
) -> Result<DoreReport> {
    if !op.is_invertible() {
        return Err(Error::NotInvertible);
    }
    if xs.is_empty() || family.is_empty() {
        return param("family and sample must be nonempty");
    }
    let psi = HolFunction::psi_rational();
    let rep = |v: &[Complex64]| psi_rep_norm(phi, op, &psi, v, false, grid, norm);
    let base: Vec<f64> = xs.iter().map(|x| rep(x)).collect::<Result<_>>()?;
    if base.contains(&0.0) {
        return param("zero vectors are excluded from the comparison");
    }
    let mut members = Vec::with_capacity(family.len());
    for f in family {
        let sup_norm = match f {
            HolFunction::HInf { sup_norm, .. } => *sup_norm,
            HolFunction::EClass {
                h0: None,
                lambda,
                mu,
            } if *lambda == c(0.0) => mu.norm(),
            _ => return param("Dore families consist of bounded functions with known sup-norm"),
        };
        let fa = calc(f, op)?;
        let operator_norm = fa.norm_2();
        let mut worst: f64 = 0.0;
        for (x, bx) in xs.iter().zip(&base) {
            worst = worst.max(rep(&fa.apply(x))? / bx);
        }
        members.push(DoreMember {
            name: f.name(),
            sup_norm,
            operator_norm,
            hinf_ratio: worst / sup_norm,
            relative_ratio: (operator_norm > DEGENERATE * sup_norm).then(|| worst / operator_norm),
        });
    }
    let ratio = members.iter().map(|m| m.hinf_ratio).fold(0.0, f64::max);
    Ok(DoreReport { members, ratio })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(v: &[f64]) -> Vec<Complex64> {
        v.iter().map(|&r| c(r)).collect()
    }

    #[test]
    fn psi_exp_on_diagonal_matches_scalar_integral() {
        // t^{-1}·tμe^{-tμ} in L^2(t^{2(1-θ)-1}) has norm μ^θ Γ(2θ)^{1/2} 2^{-θ}
        let grid = Arc::new(LogGrid::per_decade(1e-8, 1e6, 100).unwrap());
        let theta = 0.5;
        let phi = PhiSpace::classical(theta, 2.0).unwrap();
        let op = SectorialOperator::positive_diagonal(&[3.0, 0.5]).unwrap();
        let psi = HolFunction::psi_exp(op.working_angle()).unwrap();
        let v = psi_rep_norm(
            &phi,
            &op,
            &psi,
            &re(&[1.0, 0.0]),
            false,
            &grid,
            &VecNorm::L2,
        )
        .unwrap();
        let want = 3f64.sqrt() * 0.5f64.sqrt();
        assert!((v / want - 1.0).abs() < 1e-2, "{v} vs {want}");
        assert_eq!(
            psi_rep_norm(&phi, &op, &psi, &re(&[0.0, 0.0]), true, &grid, &VecNorm::L2).unwrap(),
            0.0
        );
    }

    #[test]
    fn psi_exp_agrees_with_matrix_exponential() {
        let op = SectorialOperator::jordan(5.0).unwrap();
        let psi = HolFunction::psi_exp(op.working_angle()).unwrap();
        let grid = Arc::new(LogGrid::per_decade(1e-3, 1e3, 4).unwrap());
        let quad = Quadrature::new(&op, contour_for(&psi, &op, 1e-3, 1e3).unwrap()).unwrap();
        for &t in grid.nodes() {
            let got = quad.apply_scaled(&psi, t).unwrap();
            let want = op
                .matrix()
                .scale(c(t))
                .mul(&op.matrix().mat_exp(t).unwrap());
            assert!(got.sub(&want).max_abs() < 1e-9, "t={t}");
        }
    }

    #[test]
    fn semigroup_scalar_example() {
        // ∫ ((1-e^{-t})/t)^2 t^{2(1-θ)-1} dt at θ = 1/2 equals 2 ln 2
        let grid = Arc::new(LogGrid::per_decade(1e-8, 1e8, 100).unwrap());
        let phi = PhiSpace::classical(0.5, 2.0).unwrap();
        let op = SectorialOperator::positive_diagonal(&[1.0]).unwrap();
        let v = semigroup_rep_norm(&phi, &op, &re(&[1.0]), &grid, &VecNorm::L2).unwrap();
        let want = 1.0 + (2.0 * 2f64.ln()).sqrt();
        assert!((v - want).abs() < 1e-3, "{v} vs {want}");
        assert_eq!(
            semigroup_rep_norm(&phi, &op, &re(&[0.0]), &grid, &VecNorm::L2).unwrap(),
            0.0
        );
    }

    #[test]
    fn dore_identity_ratio_is_one() {
        let grid = Arc::new(LogGrid::per_decade(1e-5, 1e5, 20).unwrap());
        let op = SectorialOperator::positive_diagonal(&[1.0, 4.0]).unwrap();
        let phi = PhiSpace::classical(0.5, 2.0).unwrap();
        let xs = vec![re(&[1.0, 0.3]), re(&[0.0, 1.0])];
        let r = dore_ratio(&op, &phi, &[HolFunction::one()], &xs, &grid, &VecNorm::L2).unwrap();
        assert!((r.ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn report_rejects_zero_vectors() {
        let grid = Arc::new(LogGrid::per_decade(1e-3, 1e3, 5).unwrap());
        let op = SectorialOperator::positive_diagonal(&[1.0]).unwrap();
        let phi = PhiSpace::classical(0.5, 2.0).unwrap();
        assert!(interp_norm_report(&op, &phi, &[re(&[0.0])], &grid, &VecNorm::L2).is_err());
    }
}
