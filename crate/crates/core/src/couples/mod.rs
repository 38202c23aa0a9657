//! Interpolation couples, K-functionals and the K- and trace-method norms.

mod methods;
pub mod optimize;

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{param, Error, Result};
use crate::numerics::fsum::fsum;
use crate::numerics::{DenseMatrix, LogGrid, VecNorm};
use optimize::{minimize, EllipsoidConfig};

pub(crate) use methods::require_nontrivial;
pub use methods::{
    k_method_norm, operator_interp_check, trace_construction, trace_method_norm, InterpCheck,
    KMethodNorm, TraceFunction, TraceNorm,
};

/// Largest relative optimiser gap accepted for a K value.
pub const MAX_RELATIVE_GAP: f64 = 1e-3;

/// Scalar field of a finite-dimensional couple.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Real,
    Complex,
}

pub type NormFn = Arc<dyn Fn(&[Complex64]) -> f64 + Send + Sync>;

/// A norm on `K^d`: either a coordinate norm or an opaque convex functional.
#[derive(Clone)]
pub enum Functional {
    Norm(VecNorm),
    Custom { name: String, eval: NormFn },
}

impl fmt::Debug for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Functional::Norm(n) => write!(f, "Norm({n:?})"),
            Functional::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

impl From<VecNorm> for Functional {
    fn from(n: VecNorm) -> Self {
        Functional::Norm(n)
    }
}

impl Functional {
    pub fn custom(
        name: impl Into<String>,
        eval: impl Fn(&[Complex64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Functional::Custom {
            name: name.into(),
            eval: Arc::new(eval),
        }
    }

    pub fn eval(&self, x: &[Complex64]) -> f64 {
        match self {
            Functional::Norm(n) => n.eval(x),
            Functional::Custom { eval, .. } => eval(x),
        }
    }

    /// Subgradient in the `Re Σ conj(g_i) h_i` pairing; central differences
    /// for opaque functionals.
    pub fn subgradient(&self, x: &[Complex64], field: Field) -> Vec<Complex64> {
        match self {
            Functional::Norm(n) => n.subgradient(x),
            Functional::Custom { eval, .. } => {
                let scale = x.iter().map(|z| z.norm()).fold(1.0, f64::max);
                let h = 1e-7 * scale;
                let mut y = x.to_vec();
                let mut diff = |i: usize, dir: Complex64| {
                    let orig = y[i];
                    y[i] = orig + dir * h;
                    let up = eval(&y);
                    y[i] = orig - dir * h;
                    let down = eval(&y);
                    y[i] = orig;
                    (up - down) / (2.0 * h)
                };
                (0..x.len())
                    .map(|i| {
                        let re = diff(i, Complex64::new(1.0, 0.0));
                        let im = if field == Field::Complex {
                            diff(i, Complex64::new(0.0, 1.0))
                        } else {
                            0.0
                        };
                        Complex64::new(re, im)
                    })
                    .collect()
            }
        }
    }

    /// Lower bound for `|u| / |u|_2`.
    fn euclidean_floor(&self, dim: usize, field: Field) -> f64 {
        match self {
            Functional::Norm(n) => coordinate_floor(n, dim),
            Functional::Custom { eval, .. } => {
                let mut rng = ChaCha8Rng::seed_from_u64(0x6b66);
                let mut best = f64::INFINITY;
                for k in 0..(64 + 16 * dim) {
                    let u = if k < dim {
                        unit(dim, k)
                    } else {
                        random_vector(&mut rng, dim, field)
                    };
                    let l2 = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                    best = best.min(eval(&u) / l2);
                }
                0.5 * best
            }
        }
    }
}

fn coordinate_floor(n: &VecNorm, dim: usize) -> f64 {
    match n {
        VecNorm::Weighted { base, weights } => {
            weights.iter().cloned().fold(f64::INFINITY, f64::min) * coordinate_floor(base, dim)
        }
        _ => {
            let p = n.exponent();
            if p <= 2.0 {
                1.0
            } else {
                (dim as f64).powf(1.0 / p - 0.5)
            }
        }
    }
}

fn unit(dim: usize, k: usize) -> Vec<Complex64> {
    let mut u = vec![Complex64::new(0.0, 0.0); dim];
    u[k] = Complex64::new(1.0, 0.0);
    u
}

fn random_vector(rng: &mut ChaCha8Rng, dim: usize, field: Field) -> Vec<Complex64> {
    (0..dim)
        .map(|_| {
            let re = rng.gen_range(-1.0..1.0);
            let im = if field == Field::Complex {
                rng.gen_range(-1.0..1.0)
            } else {
                0.0
            };
            Complex64::new(re, im)
        })
        .collect()
}

/// An interpolation couple `(X, Y)` on a common vector space.
#[derive(Debug, Clone)]
pub enum Couple {
    /// `X = Y`.
    Trivial { dim: usize, norm: VecNorm },
    /// `X = ℓ^p`, `Y = ℓ^p` with coordinates scaled by `μ_i`.
    Diagonal { mu: Vec<f64>, exponent: f64 },
    GeneralFiniteDim {
        dim: usize,
        x: Functional,
        y: Functional,
        field: Field,
    },
    /// `(L¹, L∞)` on piecewise constant functions of the grid.
    L1LinfFunctions { grid: Arc<LogGrid> },
    /// `X` with a base norm, `|x|_Y = |x|_X + |Ax|_X`.
    DomainCouple { a: DenseMatrix, norm: VecNorm },
}

/// A splitting `x = a + b` with its cost `|a|_X + t|b|_Y` and a certified
/// lower bound for `K(t, x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub a: Vec<Complex64>,
    pub b: Vec<Complex64>,
    pub value: f64,
    pub lower: f64,
}

impl Decomposition {
    pub fn relative_gap(&self) -> f64 {
        if self.value == 0.0 {
            0.0
        } else {
            (self.value - self.lower).max(0.0) / self.value
        }
    }
}

impl Couple {
    pub fn trivial(dim: usize, norm: VecNorm) -> Result<Self> {
        check_dim(dim)?;
        Ok(Couple::Trivial { dim, norm })
    }

    pub fn diagonal(mu: Vec<f64>, exponent: f64) -> Result<Self> {
        check_dim(mu.len())?;
        if mu.iter().any(|&m| !(m > 0.0 && m.is_finite())) {
            return param("diagonal couple weights must be positive and finite");
        }
        VecNorm::lp(exponent)?;
        Ok(Couple::Diagonal { mu, exponent })
    }

    /// Builds a general finite-dimensional couple after random homogeneity,
    /// positivity and triangle probes on both functionals.
    pub fn general(
        dim: usize,
        x: Functional,
        y: Functional,
        field: Field,
        seed: u64,
    ) -> Result<Self> {
        check_dim(dim)?;
        if dim > 8 {
            return param(format!(
                "general finite-dimensional couples are limited to dimension 8 (got {dim})"
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (name, n) in [("X", &x), ("Y", &y)] {
            for _ in 0..64 {
                let u = random_vector(&mut rng, dim, field);
                let v = random_vector(&mut rng, dim, field);
                let c = match field {
                    Field::Real => Complex64::new(rng.gen_range(-3.0..3.0), 0.0),
                    Field::Complex => {
                        Complex64::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0))
                    }
                };
                let (nu, nv) = (n.eval(&u), n.eval(&v));
                let cu: Vec<Complex64> = u.iter().map(|z| z * c).collect();
                let sum: Vec<Complex64> = u.iter().zip(&v).map(|(a, b)| a + b).collect();
                let tol = 1e-9 * (nu + nv);
                if !(nu > 0.0 && nu.is_finite()) {
                    return param(format!(
                        "{name} functional is not positive on a nonzero vector"
                    ));
                }
                if (n.eval(&cu) - c.norm() * nu).abs() > tol * (1.0 + c.norm()) {
                    return param(format!("{name} functional fails absolute homogeneity"));
                }
                if n.eval(&sum) > nu + nv + tol {
                    return param(format!("{name} functional fails the triangle inequality"));
                }
            }
        }
        Ok(Couple::GeneralFiniteDim { dim, x, y, field })
    }

    pub fn l1_linf(grid: Arc<LogGrid>) -> Self {
        Couple::L1LinfFunctions { grid }
    }

    pub fn domain(a: DenseMatrix, norm: VecNorm) -> Self {
        Couple::DomainCouple { a, norm }
    }

    pub fn dim(&self) -> usize {
        match self {
            Couple::Trivial { dim, .. } | Couple::GeneralFiniteDim { dim, .. } => *dim,
            Couple::Diagonal { mu, .. } => mu.len(),
            Couple::L1LinfFunctions { grid } => grid.len(),
            Couple::DomainCouple { a, .. } => a.dim(),
        }
    }

    pub fn field(&self) -> Field {
        match self {
            Couple::GeneralFiniteDim { field, .. } => *field,
            _ => Field::Complex,
        }
    }

    pub fn x_norm(&self, x: &[Complex64]) -> f64 {
        match self {
            Couple::Trivial { norm, .. } | Couple::DomainCouple { norm, .. } => norm.eval(x),
            Couple::Diagonal { exponent, .. } => base_norm(*exponent).eval(x),
            Couple::GeneralFiniteDim { x: nx, .. } => nx.eval(x),
            Couple::L1LinfFunctions { grid } => fsum(
                x.iter()
                    .enumerate()
                    .map(|(i, z)| z.norm() * grid.cell_length(i)),
            ),
        }
    }

    pub fn y_norm(&self, x: &[Complex64]) -> f64 {
        match self {
            Couple::Trivial { norm, .. } => norm.eval(x),
            Couple::Diagonal { mu, exponent } => {
                let y: Vec<Complex64> = x.iter().zip(mu).map(|(z, m)| z * m).collect();
                base_norm(*exponent).eval(&y)
            }
            Couple::GeneralFiniteDim { y, .. } => y.eval(x),
            Couple::L1LinfFunctions { .. } => x.iter().map(|z| z.norm()).fold(0.0, f64::max),
            Couple::DomainCouple { a, norm } => norm.eval(x) + norm.eval(&a.apply(x)),
        }
    }

    /// `|x|_{X+Y} = K(1, x)`.
    pub fn sum_norm(&self, x: &[Complex64]) -> Result<f64> {
        self.k_functional(x, 1.0)
    }

    pub fn k_functional(&self, x: &[Complex64], t: f64) -> Result<f64> {
        Ok(self.optimal_decomposition(x, t)?.value)
    }

    /// `K(t, x)` on every grid node, in parallel.
    pub fn k_curve(&self, x: &[Complex64], ts: &[f64]) -> Result<Vec<Decomposition>> {
        ts.par_iter()
            .map(|&t| self.optimal_decomposition(x, t))
            .collect()
    }

    /// A near-optimal splitting for `K(t, x)`; exact for the trivial, ℓ¹/ℓ∞
    /// diagonal and `(L¹, L∞)` couples.
    pub fn optimal_decomposition(&self, x: &[Complex64], t: f64) -> Result<Decomposition> {
        if !(t > 0.0 && t.is_finite()) {
            return param(format!("K-functional parameter must be positive (got {t})"));
        }
        if x.len() != self.dim() {
            return param(format!(
                "vector has length {} but the couple has dimension {}",
                x.len(),
                self.dim()
            ));
        }
        if x.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return param("vector entries must be finite");
        }
        if self.field() == Field::Real && x.iter().any(|z| z.im != 0.0) {
            return param("real couple given a complex vector");
        }
        let zero = vec![Complex64::new(0.0, 0.0); x.len()];
        let d = match self {
            Couple::Trivial { norm, .. } => {
                let n = norm.eval(x);
                if t >= 1.0 {
                    exact(x.to_vec(), zero, n)
                } else {
                    exact(zero, x.to_vec(), t * n)
                }
            }
            Couple::Diagonal { mu, exponent } if *exponent == 1.0 => {
                let (mut a, mut b) = (zero.clone(), zero);
                let mut terms = Vec::with_capacity(x.len());
                for i in 0..x.len() {
                    if t * mu[i] <= 1.0 {
                        b[i] = x[i];
                        terms.push(t * mu[i] * x[i].norm());
                    } else {
                        a[i] = x[i];
                        terms.push(x[i].norm());
                    }
                }
                exact(a, b, fsum(terms))
            }
            Couple::Diagonal { mu, exponent } if exponent.is_infinite() => {
                let cost = |s: f64| {
                    s + t * x
                        .iter()
                        .zip(mu)
                        .map(|(z, m)| m * (z.norm() - s).max(0.0))
                        .fold(0.0, f64::max)
                };
                // kinks of the convex piecewise linear cost: coordinate moduli and
                // crossings of two active lines
                let mut candidates: Vec<f64> = vec![0.0];
                for (i, zi) in x.iter().enumerate() {
                    candidates.push(zi.norm());
                    for (j, zj) in x.iter().enumerate().skip(i + 1) {
                        if mu[i] != mu[j] {
                            let s = (mu[i] * zi.norm() - mu[j] * zj.norm()) / (mu[i] - mu[j]);
                            if s > 0.0 && s.is_finite() {
                                candidates.push(s);
                            }
                        }
                    }
                }
                let mut best = (0.0, cost(0.0));
                for s in candidates {
                    let c = cost(s);
                    if c < best.1 {
                        best = (s, c);
                    }
                }
                let a = clip(x, best.0);
                let b: Vec<Complex64> = x.iter().zip(&a).map(|(z, w)| z - w).collect();
                let value = self.x_norm(&a) + t * self.y_norm(&b);
                exact(a, b, value)
            }
            Couple::L1LinfFunctions { grid } => {
                let mut order: Vec<usize> = (0..x.len()).collect();
                order.sort_by(|&i, &j| x[j].norm().total_cmp(&x[i].norm()));
                let mut acc = 0.0;
                let mut level = 0.0;
                for &i in &order {
                    if x[i].norm() == 0.0 {
                        break;
                    }
                    acc += grid.cell_length(i);
                    if acc > t {
                        level = x[i].norm();
                        break;
                    }
                }
                let b = clip(x, level);
                let a: Vec<Complex64> = x.iter().zip(&b).map(|(z, w)| z - w).collect();
                let value = self.x_norm(&a) + t * level;
                exact(a, b, value)
            }
            _ => self.optimise(x, t)?,
        };
        if d.relative_gap() > MAX_RELATIVE_GAP {
            return Err(Error::Estimation {
                reason: format!("K({t}) optimiser did not converge"),
                gap: d.relative_gap(),
            });
        }
        Ok(d)
    }

    fn x_functional(&self) -> Functional {
        match self {
            Couple::Trivial { norm, .. } | Couple::DomainCouple { norm, .. } => {
                Functional::Norm(norm.clone())
            }
            Couple::Diagonal { exponent, .. } => Functional::Norm(base_norm(*exponent)),
            Couple::GeneralFiniteDim { x, .. } => x.clone(),
            Couple::L1LinfFunctions { .. } => {
                unreachable!("the (L1, Linf) couple is solved exactly")
            }
        }
    }

    fn y_subgradient(&self, b: &[Complex64]) -> Vec<Complex64> {
        match self {
            Couple::Trivial { norm, .. } => norm.subgradient(b),
            Couple::Diagonal { mu, exponent } => VecNorm::Weighted {
                base: Box::new(base_norm(*exponent)),
                weights: mu.clone(),
            }
            .subgradient(b),
            Couple::GeneralFiniteDim { y, field, .. } => y.subgradient(b, *field),
            Couple::DomainCouple { a, norm } => {
                let g0 = norm.subgradient(b);
                let g1 = norm.subgradient(&a.apply(b));
                let adj = a.as_dmatrix().adjoint();
                let back = &adj * nalgebra::DVector::from_vec(g1);
                g0.iter().zip(back.iter()).map(|(u, v)| u + v).collect()
            }
            Couple::L1LinfFunctions { .. } => {
                unreachable!("the (L1, Linf) couple is solved exactly")
            }
        }
    }

    fn y_floor(&self) -> f64 {
        let d = self.dim();
        match self {
            Couple::Diagonal { mu, exponent } => {
                mu.iter().cloned().fold(f64::INFINITY, f64::min)
                    * coordinate_floor(&base_norm(*exponent), d)
            }
            Couple::GeneralFiniteDim { y, field, .. } => y.euclidean_floor(d, *field),
            _ => self.x_functional().euclidean_floor(d, self.field()),
        }
    }

    /// Ellipsoid method over `b`, with the minimiser confined by
    /// `|b|_X ≤ 2|x|_X` and `|b|_Y ≤ |x|_X / t`.
    fn optimise(&self, x: &[Complex64], t: f64) -> Result<Decomposition> {
        let field = self.field();
        let xf = self.x_functional();
        let nx = xf.eval(x);
        if nx == 0.0 {
            let zero = vec![Complex64::new(0.0, 0.0); x.len()];
            return Ok(exact(zero.clone(), zero, 0.0));
        }
        let radius =
            1.01 * (2.0 * nx / xf.euclidean_floor(x.len(), field)).min(nx / (t * self.y_floor()));
        let pack = |z: &[f64]| -> Vec<Complex64> {
            match field {
                Field::Real => z.iter().map(|&r| Complex64::new(r, 0.0)).collect(),
                Field::Complex => z.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect(),
            }
        };
        let unpack = |g: &[Complex64]| -> Vec<f64> {
            match field {
                Field::Real => g.iter().map(|z| z.re).collect(),
                Field::Complex => g.iter().flat_map(|z| [z.re, z.im]).collect(),
            }
        };
        let n = match field {
            Field::Real => x.len(),
            Field::Complex => 2 * x.len(),
        };
        let oracle = |z: &[f64]| {
            let b = pack(z);
            let a: Vec<Complex64> = x.iter().zip(&b).map(|(u, v)| u - v).collect();
            let value = xf.eval(&a) + t * self.y_norm(&b);
            let ga = xf.subgradient(&a, field);
            let gb = self.y_subgradient(&b);
            let g: Vec<Complex64> = ga.iter().zip(&gb).map(|(u, v)| -u + v * t).collect();
            (value, unpack(&g))
        };
        let m = minimize(oracle, &vec![0.0; n], radius, &EllipsoidConfig::default());
        let lower = m.lower.max(0.0);
        let zero = vec![Complex64::new(0.0, 0.0); x.len()];
        let all_y = t * self.y_norm(x);
        // the endpoints a = x and b = x can beat the iterate by rounding
        if nx.min(all_y) <= m.upper {
            return Ok(if nx <= all_y {
                Decomposition {
                    a: x.to_vec(),
                    b: zero,
                    value: nx,
                    lower: lower.min(nx),
                }
            } else {
                Decomposition {
                    a: zero,
                    b: x.to_vec(),
                    value: all_y,
                    lower: lower.min(all_y),
                }
            });
        }
        let b = pack(&m.argmin);
        let a: Vec<Complex64> = x.iter().zip(&b).map(|(u, v)| u - v).collect();
        Ok(Decomposition {
            a,
            b,
            value: m.upper,
            lower,
        })
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        return param("couple dimension must be positive");
    }
    Ok(())
}

fn base_norm(exponent: f64) -> VecNorm {
    VecNorm::lp(exponent).expect("exponent validated at construction")
}

fn exact(a: Vec<Complex64>, b: Vec<Complex64>, value: f64) -> Decomposition {
    Decomposition {
        a,
        b,
        value,
        lower: value,
    }
}

/// Radial clipping of each coordinate to modulus at most `level`.
fn clip(x: &[Complex64], level: f64) -> Vec<Complex64> {
    x.iter()
        .map(|z| {
            let r = z.norm();
            if r <= level {
                *z
            } else {
                z * (level / r)
            }
        })
        .collect()
}
