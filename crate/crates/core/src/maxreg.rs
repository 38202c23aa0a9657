//! The Cauchy problem `u̇ + Au = f`, `u(0) = x`, solved exactly for
//! piecewise constant `f`, and maximal-regularity norms of its solution.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::couples::{k_method_norm, require_nontrivial, trace_construction};
use crate::error::{param, Error, Result};
use crate::numerics::quad::gauss_legendre;
use crate::numerics::{DenseMatrix, LogGrid, SampledFunction, VecNorm, VectorFunction};
use crate::rearrangement::Tails;
use crate::ri_spaces::{phi_norm_with, PhiSpace};
use crate::sectorial::SectorialOperator;

const SPLIT_GAUSS_NODES: usize = 12;
const SPLIT_WINDOW: f64 = 50.0;
const MAX_SPLIT_PIECES: f64 = 1e5;

/// `u̇ + Au = f` on `(0, t_max]` with `f` constant on each grid cell; the
/// first cell's value also applies on `(0, t_min)`.
#[derive(Debug, Clone)]
pub struct CauchyProblem {
    pub op: SectorialOperator,
    pub f: VectorFunction,
    pub x0: Vec<Complex64>,
}

impl CauchyProblem {
    pub fn new(op: SectorialOperator, f: VectorFunction, x0: Vec<Complex64>) -> Result<Self> {
        if f.dim() != op.dim() || x0.len() != op.dim() {
            return param(format!(
                "dimensions disagree: operator {}, right-hand side {}, initial value {}",
                op.dim(),
                f.dim(),
                x0.len()
            ));
        }
        if x0.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return param("initial value must be finite");
        }
        Ok(Self { op, f, x0 })
    }

    /// Zero right-hand side on `grid`.
    pub fn homogeneous(
        op: SectorialOperator,
        grid: Arc<LogGrid>,
        x0: Vec<Complex64>,
    ) -> Result<Self> {
        let d = op.dim();
        let f = VectorFunction::new(
            grid.clone(),
            vec![vec![Complex64::new(0.0, 0.0); d]; grid.len()],
        )?;
        Self::new(op, f, x0)
    }

    pub fn grid(&self) -> &Arc<LogGrid> {
        self.f.grid_arc()
    }
}

#[derive(Debug, Clone)]
pub struct CauchySolution {
    pub u: VectorFunction,
    pub du: VectorFunction,
    /// `max_i |u̇_i + Au_i − f_i|` with `u̇` from the exact in-cell derivative.
    pub residual: f64,
}

fn axpy(a: &[Complex64], b: &[Complex64], s: f64) -> Vec<Complex64> {
    a.iter().zip(b).map(|(x, y)| x + y * s).collect()
}

fn sup(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// One exact step of length `h` with constant forcing `f`, returning the new
/// state and the derivative at the end of the step.
fn step(
    a: &DenseMatrix,
    u: &[Complex64],
    f: &[Complex64],
    h: f64,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let (e, phi1) = a.exp_phi1(h)?;
    let next = axpy(&e.apply(u), &phi1.apply(f), h);
    let force = axpy(f, &a.apply(u), -1.0);
    Ok((next, e.apply(&force)))
}

/// Variation of constants, two exact steps per cell.
pub fn solve_cauchy(p: &CauchyProblem) -> Result<CauchySolution> {
    let grid = p.grid();
    let a = p.op.matrix();
    let nodes = grid.nodes();
    let fs = p.f.values();
    let mut u = Vec::with_capacity(nodes.len());
    let mut du = Vec::with_capacity(nodes.len());
    let (u0, d0) = step(a, &p.x0, &fs[0], nodes[0])?;
    u.push(u0);
    du.push(d0);
    for i in 1..nodes.len() {
        let mid = grid.edges()[i];
        let (um, _) = step(a, &u[i - 1], &fs[i - 1], mid - nodes[i - 1])?;
        let (ui, di) = step(a, &um, &fs[i], nodes[i] - mid)?;
        u.push(ui);
        du.push(di);
    }
    let mut residual: f64 = 0.0;
    for i in 0..nodes.len() {
        let r: Vec<Complex64> = du[i]
            .iter()
            .zip(a.apply(&u[i]))
            .zip(&fs[i])
            .map(|((d, au), f)| d + au - f)
            .collect();
        residual = residual.max(sup(&r));
    }
    Ok(CauchySolution {
        u: VectorFunction::new(grid.clone(), u)?,
        du: VectorFunction::new(grid.clone(), du)?,
        residual,
    })
}

/// Solution assembled as `u = v + z`: `v` from the trace construction with
/// `v(0) = x0`, and `z` solving `ż + Az = f − v̇ − Av`, `z(0) = 0`.
#[derive(Debug, Clone)]
pub struct SplitSolution {
    pub u: VectorFunction,
    /// `max_i |u_split − u_direct| / (1 + max_i |u_direct|)`.
    pub deviation: f64,
}

pub fn solve_split(p: &CauchyProblem, phi: &PhiSpace, norm: &VecNorm) -> Result<SplitSolution> {
    let grid = p.grid().clone();
    let a = p.op.matrix();
    let nodes = grid.nodes();
    let fs = p.f.values();
    let couple = p.op.domain_couple(norm.clone());
    let tr = trace_construction(&couple, phi, &p.x0, &grid)?;
    // on cell i the trace is v(s) = (S_i + b_i (s − lo_i)) / s
    let cells: Vec<(Vec<Complex64>, Vec<Complex64>)> = (0..nodes.len())
        .map(|i| {
            let t = nodes[i];
            let lo = grid.cell(i).0;
            let ui = &tr.u.values()[i];
            let b = axpy(ui, &tr.du.values()[i], t);
            let s: Vec<Complex64> = ui
                .iter()
                .zip(&b)
                .map(|(u, b)| u * t - b * (t - lo))
                .collect();
            (s, b)
        })
        .collect();
    let v_at = |i: usize, s: f64| -> (Vec<Complex64>, Vec<Complex64>) {
        let lo = grid.cell(i).0;
        let (sv, b) = &cells[i];
        let v: Vec<Complex64> = sv
            .iter()
            .zip(b)
            .map(|(x, y)| (x + y * (s - lo)) / s)
            .collect();
        let dv: Vec<Complex64> = b.iter().zip(&v).map(|(y, w)| (y - w) / s).collect();
        (v, dv)
    };
    let (gx, gw) = gauss_legendre(SPLIT_GAUSS_NODES);
    let norm_a = a.norm_2().max(f64::MIN_POSITIVE);
    let decay =
        p.op.eigenvalues()
            .iter()
            .map(|z| z.re)
            .fold(f64::INFINITY, f64::min);
    // z(hi) = e^{-(hi−lo)A} z(lo) + ∫ e^{-(hi−s)A} g(s) ds over one half cell,
    // composite Gauss–Legendre on pieces of width ≤ 1/‖A‖ inside the window
    // where the kernel exceeds e^{-50}
    let advance = |z: &[Complex64], i: usize, lo: f64, hi: f64| -> Result<Vec<Complex64>> {
        let mut acc = a.mat_exp(hi - lo)?.apply(z);
        let start = if decay > 0.0 {
            lo.max(hi - SPLIT_WINDOW / decay)
        } else {
            lo
        };
        let pieces = ((hi - start) * norm_a).ceil().max(1.0);
        if pieces > MAX_SPLIT_PIECES {
            return Err(Error::Solver(format!(
                "split quadrature needs {pieces} pieces on [{lo}, {hi}]"
            )));
        }
        let width = (hi - start) / pieces;
        for k in 0..pieces as usize {
            let (pl, half) = (start + width * k as f64, 0.5 * width);
            for (x, w) in gx.iter().zip(&gw) {
                let s = pl + half * (1.0 + x);
                let (v, dv) = v_at(i, s);
                let g: Vec<Complex64> = fs[i]
                    .iter()
                    .zip(&dv)
                    .zip(a.apply(&v))
                    .map(|((f, d), av)| f - d - av)
                    .collect();
                let kernel = a.mat_exp(hi - s)?.apply(&g);
                for (acc, k) in acc.iter_mut().zip(kernel) {
                    *acc += k * (half * w);
                }
            }
        }
        Ok(acc)
    };
    let head_force = axpy(&fs[0], &a.apply(&p.x0), -1.0);
    let (_, phi1) = a.exp_phi1(nodes[0])?;
    let mut z: Vec<Complex64> = phi1
        .apply(&head_force)
        .iter()
        .map(|w| w * nodes[0])
        .collect();
    let mut u = Vec::with_capacity(nodes.len());
    u.push(axpy(&v_at(0, nodes[0]).0, &z, 1.0));
    for i in 1..nodes.len() {
        let mid = grid.edges()[i];
        z = advance(&z, i - 1, nodes[i - 1], mid)?;
        z = advance(&z, i, mid, nodes[i])?;
        u.push(axpy(&v_at(i, nodes[i]).0, &z, 1.0));
    }
    let direct = solve_cauchy(p)?;
    let scale = 1.0 + direct.u.values().iter().map(|v| sup(v)).fold(0.0, f64::max);
    let deviation = u
        .iter()
        .zip(direct.u.values())
        .map(|(s, d)| sup(&axpy(s, d, -1.0)))
        .fold(0.0, f64::max)
        / scale;
    Ok(SplitSolution {
        u: VectorFunction::new(grid, u)?,
        deviation,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MRReport {
    pub du_norm: f64,
    pub au_norm: f64,
    pub f_norm: f64,
    /// K-method norm of `x0` on `(X, dom A)_Φ`.
    pub x0_norm: f64,
    pub residual: f64,
    /// `(‖u̇‖ + ‖Au‖) / (‖f‖ + |x0|)`.
    pub ratio: f64,
}

fn restricted(f: SampledFunction, horizon: Option<f64>) -> Result<SampledFunction> {
    match horizon {
        None => Ok(f),
        Some(t) => {
            let g = f.grid();
            if !(t >= g.t_min() && t <= g.t_max()) {
                return param(format!(
                    "horizon {t} outside the grid [{}, {}]",
                    g.t_min(),
                    g.t_max()
                ));
            }
            let vals = f
                .values()
                .iter()
                .zip(g.nodes())
                .map(|(v, s)| if *s <= t { *v } else { 0.0 })
                .collect();
            SampledFunction::new(f.grid_arc().clone(), vals)
        }
    }
}

/// `Φ`-norms of `|u̇|`, `|Au|` and `|f|` on `(0, T]`, with the fitted
/// short-time behaviour below the grid; `None` continues past `t_max` too.
pub fn mr_seminorms(
    p: &CauchyProblem,
    sol: &CauchySolution,
    phi: &PhiSpace,
    horizon: Option<f64>,
    norm: &VecNorm,
) -> Result<MRReport> {
    require_nontrivial(phi)?;
    let a = p.op.matrix();
    let tails = if horizon.is_some() {
        Tails::Head
    } else {
        Tails::Fitted
    };
    let measure = |f: SampledFunction| -> Result<f64> {
        Ok(phi_norm_with(phi, &restricted(f, horizon)?, tails)?.value)
    };
    let du_norm = measure(sol.du.pointwise_norm(norm))?;
    let au_norm = measure(sol.u.map_norm(|v| norm.eval(&a.apply(v))))?;
    let f_norm = measure(p.f.pointwise_norm(norm))?;
    let x0_norm = if p.x0.iter().all(|z| z.norm() == 0.0) {
        0.0
    } else {
        k_method_norm(&p.op.domain_couple(norm.clone()), phi, &p.x0, p.grid())?.value
    };
    let num = du_norm + au_norm;
    let ratio = if num == 0.0 {
        0.0
    } else {
        num / (f_norm + x0_norm + f64::MIN_POSITIVE)
    };
    Ok(MRReport {
        du_norm,
        au_norm,
        f_norm,
        x0_norm,
        residual: sol.residual,
        ratio,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MRConstant {
    /// Largest ratio over the family.
    pub ratio: f64,
    pub reports: Vec<MRReport>,
}

/// Largest maximal-regularity ratio over a family of problems, solved in
/// parallel.
pub fn mr_constant_estimate(
    problems: &[CauchyProblem],
    phi: &PhiSpace,
    horizon: Option<f64>,
    norm: &VecNorm,
) -> Result<MRConstant> {
    if problems.is_empty() {
        return param("the problem family is empty");
    }
    let reports: Result<Vec<MRReport>> = problems
        .par_iter()
        .map(|p| mr_seminorms(p, &solve_cauchy(p)?, phi, horizon, norm))
        .collect();
    let reports = reports?;
    let ratio = reports.iter().map(|r| r.ratio).fold(0.0, f64::max);
    Ok(MRConstant { ratio, reports })
}
