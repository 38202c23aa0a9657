use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{random_vector, unit, Couple, Decomposition};
use crate::error::{Error, Result};
use crate::numerics::{DenseMatrix, LogGrid, SampledFunction, VecNorm, VectorFunction};
use crate::rearrangement::Tails;
use crate::ri_spaces::{cutoff_membership, phi_norm_with, Membership, PhiSpace};

/// Relative slack allowed by the interpolation-inequality check.
pub const INTERP_SLACK: f64 = 1e-3;

/// Largest accepted `|a(t_min)|_X / |x|_{X+Y}` in the trace construction.
pub const TRACE_TOLERANCE: f64 = 1e-3;

const SNAP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KMethodNorm {
    /// Norm of `t ↦ K(t, x)/t` using the best decompositions found.
    pub value: f64,
    /// Same norm with the certified lower bounds for `K`.
    pub lower: f64,
    pub tail_bound: f64,
}

pub(crate) fn require_nontrivial(phi: &PhiSpace) -> Result<()> {
    if cutoff_membership(phi).min_one == Membership::Out {
        return Err(Error::TrivialSpace(format!(
            "min(1, 1/t) is not in {phi}; the K-space is {{0}}"
        )));
    }
    Ok(())
}

/// `‖t ↦ K(t, x)/t‖_Φ`, with power-law continuation beyond the grid.
pub fn k_method_norm(
    c: &Couple,
    phi: &PhiSpace,
    x: &[Complex64],
    grid: &Arc<LogGrid>,
) -> Result<KMethodNorm> {
    require_nontrivial(phi)?;
    let ks = c.k_curve(x, grid.nodes())?;
    if ks.iter().all(|d| d.value == 0.0) {
        return Ok(KMethodNorm {
            value: 0.0,
            lower: 0.0,
            tail_bound: 0.0,
        });
    }
    let over_t = |pick: fn(&Decomposition) -> f64| {
        let vals = ks
            .iter()
            .zip(grid.nodes())
            .map(|(d, t)| pick(d) / t)
            .collect();
        SampledFunction::new(grid.clone(), vals)
    };
    let upper = phi_norm_with(phi, &over_t(|d| d.value)?, Tails::Fitted)?;
    let lower = phi_norm_with(phi, &over_t(|d| d.lower)?, Tails::Fitted)?;
    Ok(KMethodNorm {
        value: upper.value,
        lower: lower.value,
        tail_bound: upper.tail_bound,
    })
}

/// `u = Pv` with `v = b(1/(n+1))` on `(1/(n+1), 1/n]`, and its derivative.
#[derive(Debug, Clone)]
pub struct TraceFunction {
    pub u: VectorFunction,
    pub du: VectorFunction,
    pub x: Vec<Complex64>,
    /// `|a(τ)|_X / |x|_{X+Y}` at the deepest decomposition used.
    pub initial_residual: f64,
}

pub fn trace_construction(
    c: &Couple,
    phi: &PhiSpace,
    x: &[Complex64],
    grid: &Arc<LogGrid>,
) -> Result<TraceFunction> {
    require_nontrivial(phi)?;
    let nodes = grid.nodes();
    let taus: Vec<Option<f64>> = nodes
        .iter()
        .map(|&t| {
            if t <= 1.0 {
                Some(1.0 / ((1.0 / t).floor() + 1.0))
            } else {
                None
            }
        })
        .collect();
    let mut unique: Vec<f64> = taus.iter().flatten().cloned().collect();
    unique.dedup();
    let decs = c.k_curve(x, &unique)?;
    let sum = c.sum_norm(x)?;
    let residual = match decs.first() {
        Some(d) if sum > 0.0 => c.x_norm(&d.a) / sum,
        _ => 0.0,
    };
    if residual > TRACE_TOLERANCE {
        return Err(Error::Refinement {
            residual,
            tolerance: TRACE_TOLERANCE,
        });
    }
    let zero = vec![Complex64::new(0.0, 0.0); x.len()];
    let mut v = Vec::with_capacity(nodes.len());
    let mut k = 0;
    for tau in &taus {
        match tau {
            Some(tau) => {
                while unique[k] != *tau {
                    k += 1;
                }
                v.push(decs[k].b.clone());
            }
            None => v.push(zero.clone()),
        }
    }
    // deficit ∫_0^{lo_i} (v_i − v) with v = x below t_min, updated in place
    // so that u = v and u̇ = 0 hold exactly while v is constant
    let mut deficit = zero.clone();
    let mut prev = x.to_vec();
    // minimiser output that moves by rounding noise only counts as constant
    let floor = SNAP * x.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut u = Vec::with_capacity(nodes.len());
    let mut du = Vec::with_capacity(nodes.len());
    for (i, &t) in nodes.iter().enumerate() {
        let lo = grid.cell(i).0;
        if v[i].iter().zip(&prev).all(|(a, b)| (a - b).norm() <= floor) {
            v[i].clone_from(&prev);
        }
        for ((e, vi), p) in deficit.iter_mut().zip(&v[i]).zip(&prev) {
            *e += (vi - p) * lo;
        }
        u.push(
            v[i].iter()
                .zip(&deficit)
                .map(|(vi, e)| vi - e / t)
                .collect(),
        );
        du.push(deficit.iter().map(|e| e / (t * t)).collect());
        prev.clone_from(&v[i]);
    }
    Ok(TraceFunction {
        u: VectorFunction::new(grid.clone(), u)?,
        du: VectorFunction::new(grid.clone(), du)?,
        x: x.to_vec(),
        initial_residual: residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceNorm {
    /// `‖u‖_{Φ(Y)} + ‖u̇‖_{Φ(X)}`.
    pub value: f64,
    pub u_norm: f64,
    pub du_norm: f64,
    pub tail_bound: f64,
}

/// Trace-method norm of the constructed `u`; an upper bound for the infimum.
pub fn trace_method_norm(
    c: &Couple,
    phi: &PhiSpace,
    x: &[Complex64],
    grid: &Arc<LogGrid>,
) -> Result<TraceNorm> {
    if x.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
        require_nontrivial(phi)?;
        return Ok(TraceNorm {
            value: 0.0,
            u_norm: 0.0,
            du_norm: 0.0,
            tail_bound: 0.0,
        });
    }
    let tr = trace_construction(c, phi, x, grid)?;
    let u = phi_norm_with(phi, &tr.u.map_norm(|v| c.y_norm(v)), Tails::Fitted)?;
    let du = phi_norm_with(phi, &tr.du.map_norm(|v| c.x_norm(v)), Tails::Fitted)?;
    Ok(TraceNorm {
        value: u.value + du.value,
        u_norm: u.value,
        du_norm: du.value,
        tail_bound: u.tail_bound + du.tail_bound,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterpCheck {
    pub norm_x: f64,
    pub norm_y: f64,
    /// `max(‖T‖_X, ‖T‖_Y)`.
    pub bound: f64,
    /// Whether both operator norms are exact rather than sampled.
    pub exact_norms: bool,
    /// `k(Tx) / (bound · k(x))` per sample.
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
    pub holds: bool,
}

/// Checks `‖Tx‖_K ≤ max(‖T‖_X, ‖T‖_Y)·‖x‖_K` on the sample.
pub fn operator_interp_check(
    c: &Couple,
    phi: &PhiSpace,
    t: &DenseMatrix,
    xs: &[Vec<Complex64>],
    grid: &Arc<LogGrid>,
) -> Result<InterpCheck> {
    if t.dim() != c.dim() {
        return Err(Error::Parameter(format!(
            "operator has dimension {} but the couple has {}",
            t.dim(),
            c.dim()
        )));
    }
    let (norm_x, norm_y, exact_norms) = match c {
        Couple::Trivial { norm, .. } => {
            let n = t.operator_norm(norm);
            (n, n, !matches!(norm, VecNorm::Lp(_)))
        }
        Couple::Diagonal { mu, exponent } => {
            let base = VecNorm::lp(*exponent)?;
            let weighted = VecNorm::weighted(base.clone(), mu.clone())?;
            (
                t.operator_norm(&base),
                t.operator_norm(&weighted),
                exponent.fract() == 0.0 && *exponent <= 2.0 || exponent.is_infinite(),
            )
        }
        Couple::L1LinfFunctions { .. } => {
            return Err(Error::Parameter(
                "operator checks need a finite-dimensional couple".into(),
            ));
        }
        Couple::DomainCouple { norm, .. } => (
            t.operator_norm(norm),
            sampled_norm(c, t, xs, |v| c.y_norm(v)),
            false,
        ),
        Couple::GeneralFiniteDim { .. } => (
            sampled_norm(c, t, xs, |v| c.x_norm(v)),
            sampled_norm(c, t, xs, |v| c.y_norm(v)),
            false,
        ),
    };
    let bound = norm_x.max(norm_y);
    let mut ratios = Vec::with_capacity(xs.len());
    for x in xs {
        let kx = k_method_norm(c, phi, x, grid)?.value;
        let ktx = k_method_norm(c, phi, &t.apply(x), grid)?.value;
        ratios.push(if kx == 0.0 { 0.0 } else { ktx / (bound * kx) });
    }
    let max_ratio = ratios.iter().cloned().fold(0.0, f64::max);
    Ok(InterpCheck {
        norm_x,
        norm_y,
        bound,
        exact_norms,
        ratios,
        max_ratio,
        holds: max_ratio <= 1.0 + INTERP_SLACK,
    })
}

/// `max |Tv| / |v|` over basis vectors, the sample and seeded random vectors.
fn sampled_norm(
    c: &Couple,
    t: &DenseMatrix,
    xs: &[Vec<Complex64>],
    norm: impl Fn(&[Complex64]) -> f64,
) -> f64 {
    let d = c.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(0x7e57);
    let mut probes: Vec<Vec<Complex64>> = (0..d).map(|k| unit(d, k)).collect();
    probes.extend(xs.iter().cloned());
    probes.extend((0..256).map(|_| random_vector(&mut rng, d, c.field())));
    probes
        .iter()
        .filter_map(|v| {
            let n = norm(v);
            (n > 0.0).then(|| norm(&t.apply(v)) / n)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(v: &[f64]) -> Vec<Complex64> {
        v.iter().map(|&r| Complex64::new(r, 0.0)).collect()
    }

    fn classical_closed_form(mu: f64, theta: f64, q: f64) -> f64 {
        mu.powf(theta) * (1.0 / (q * (1.0 - theta)) + 1.0 / (q * theta)).powf(1.0 / q)
    }

    #[test]
    fn classical_reduction_on_basis_vector() {
        let grid = Arc::new(LogGrid::per_decade(1e-6, 1e6, 100).unwrap());
        for (theta, q) in [(0.3, 2.0), (0.5, 3.0)] {
            let phi = PhiSpace::classical(theta, q).unwrap();
            for mu in [0.1, 10.0] {
                let c = Couple::diagonal(vec![mu, 1.0], 1.0).unwrap();
                let k = k_method_norm(&c, &phi, &re(&[1.0, 0.0]), &grid).unwrap();
                let want = classical_closed_form(mu, theta, q);
                assert!((k.value / want - 1.0).abs() < 0.01, "{} vs {want}", k.value);
                assert_eq!(k.value, k.lower);
            }
        }
    }

    #[test]
    fn zero_vector_and_trivial_space() {
        let grid = Arc::new(LogGrid::per_decade(1e-3, 1e3, 10).unwrap());
        let c = Couple::diagonal(vec![1.0, 2.0], 1.0).unwrap();
        let phi = PhiSpace::classical(0.5, 2.0).unwrap();
        assert_eq!(
            k_method_norm(&c, &phi, &re(&[0.0, 0.0]), &grid)
                .unwrap()
                .value,
            0.0
        );
        assert_eq!(
            trace_method_norm(&c, &phi, &re(&[0.0, 0.0]), &grid)
                .unwrap()
                .value,
            0.0
        );
        let lp = "lp:1".parse().unwrap();
        assert!(matches!(
            k_method_norm(&c, &lp, &re(&[1.0, 0.0]), &grid),
            Err(Error::TrivialSpace(_))
        ));
    }

    #[test]
    fn trace_of_trivial_couple_is_constant_near_zero() {
        let grid = Arc::new(LogGrid::per_decade(1e-4, 1e4, 20).unwrap());
        let c = Couple::trivial(2, VecNorm::L1).unwrap();
        let x = re(&[1.0, -2.0]);
        let tr =
            trace_construction(&c, &PhiSpace::classical(0.5, 2.0).unwrap(), &x, &grid).unwrap();
        for (t, u) in grid.nodes().iter().zip(tr.u.values()) {
            if *t < 0.5 {
                assert!(u.iter().zip(&x).all(|(a, b)| (a - b).norm() < 1e-12));
            }
        }
    }

    #[test]
    fn diagonal_trace_switches_at_inverse_weights() {
        let grid = Arc::new(LogGrid::per_decade(1e-4, 1e4, 40).unwrap());
        let c = Couple::diagonal(vec![1.0, 4.0], 1.0).unwrap();
        let x = re(&[1.0, 1.0]);
        let tr =
            trace_construction(&c, &PhiSpace::classical(0.5, 2.0).unwrap(), &x, &grid).unwrap();
        // v is recovered from u on cells where it is constant: v = u + t u̇
        for (i, &t) in grid.nodes().iter().enumerate() {
            let v: Vec<f64> = tr.u.values()[i]
                .iter()
                .zip(&tr.du.values()[i])
                .map(|(a, b)| (a + b * t).re)
                .collect();
            let tau = 1.0 / ((1.0 / t).floor() + 1.0);
            let want = if t > 1.0 {
                [0.0, 0.0]
            } else {
                [1.0, if tau * 4.0 <= 1.0 { 1.0 } else { 0.0 }]
            };
            assert!(
                (v[0] - want[0]).abs() < 1e-9 && (v[1] - want[1]).abs() < 1e-9,
                "t={t} v={v:?}"
            );
        }
    }

    #[test]
    fn trace_and_k_are_equivalent() {
        let grid = Arc::new(LogGrid::per_decade(1e-6, 1e6, 40).unwrap());
        let theta = 0.4;
        let phi = PhiSpace::classical(theta, 2.0).unwrap();
        let p_norm = 1.0 / theta;
        let c = Couple::diagonal(vec![0.3, 5.0, 40.0], 1.0).unwrap();
        let x = re(&[1.0, -0.5, 2.0]);
        let k = k_method_norm(&c, &phi, &x, &grid).unwrap().value;
        let tr = trace_method_norm(&c, &phi, &x, &grid).unwrap();
        assert!(tr.value <= 4.0 * p_norm * k * 1.1);
        assert!(k <= p_norm * tr.du_norm + tr.u_norm);
    }

    #[test]
    fn interpolation_inequality_for_operators() {
        let grid = Arc::new(LogGrid::per_decade(1e-5, 1e5, 20).unwrap());
        let c = Couple::diagonal(vec![0.5, 2.0, 8.0], 1.0).unwrap();
        let phi = PhiSpace::classical(0.5, 2.0).unwrap();
        let xs = vec![re(&[1.0, 0.0, -1.0]), re(&[0.3, 2.0, 1.0])];
        let id = operator_interp_check(&c, &phi, &DenseMatrix::identity(3), &xs, &grid).unwrap();
        assert!(id.holds && id.max_ratio <= 1.0 + 1e-12);
        let s = DenseMatrix::identity(3).scale(Complex64::new(-2.5, 0.0));
        let sc = operator_interp_check(&c, &phi, &s, &xs, &grid).unwrap();
        assert!(sc.ratios.iter().all(|r| (r - 1.0).abs() < 1e-9));
        let d = DenseMatrix::real_diag(&[0.2, -1.3, 0.7]).unwrap();
        assert!(
            operator_interp_check(&c, &phi, &d, &xs, &grid)
                .unwrap()
                .holds
        );
    }
}
