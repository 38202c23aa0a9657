use nalgebra::DMatrix;
use num_complex::Complex64;

use super::vecnorm::VecNorm;
use crate::error::{domain, param, Error, Result};

const TAYLOR_DEGREE: usize = 18;
const PIVOT_THRESHOLD: f64 = 1e-13;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Square complex matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    inner: DMatrix<Complex64>,
}

impl DenseMatrix {
    /// Build from row-major entries.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let d = rows.len();
        if d == 0 {
            return param("matrix must have positive dimension");
        }
        if rows.iter().any(|r| r.len() != d) {
            return param("matrix must be square");
        }
        Self::from_dmatrix(DMatrix::from_fn(d, d, |i, j| rows[i][j]))
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| c(x)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn from_dmatrix(inner: DMatrix<Complex64>) -> Result<Self> {
        if !inner.is_square() || inner.nrows() == 0 {
            return param("matrix must be square with positive dimension");
        }
        if inner
            .iter()
            .any(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return param("matrix entries must be finite");
        }
        Ok(Self { inner })
    }

    pub fn diag(values: &[Complex64]) -> Result<Self> {
        if values.is_empty() {
            return param("matrix must have positive dimension");
        }
        let d = values.len();
        Self::from_dmatrix(DMatrix::from_fn(d, d, |i, j| {
            if i == j {
                values[i]
            } else {
                c(0.0)
            }
        }))
    }

    pub fn real_diag(values: &[f64]) -> Result<Self> {
        Self::diag(&values.iter().map(|&x| c(x)).collect::<Vec<_>>())
    }

    pub fn identity(d: usize) -> Self {
        Self {
            inner: DMatrix::identity(d, d),
        }
    }

    pub fn zeros(d: usize) -> Self {
        Self {
            inner: DMatrix::zeros(d, d),
        }
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.inner[(i, j)]
    }

    pub fn as_dmatrix(&self) -> &DMatrix<Complex64> {
        &self.inner
    }

    pub fn rows(&self) -> Vec<Vec<Complex64>> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.inner[(i, j)]).collect())
            .collect()
    }

    pub fn mul(&self, other: &DenseMatrix) -> DenseMatrix {
        DenseMatrix {
            inner: &self.inner * &other.inner,
        }
    }

    pub fn add(&self, other: &DenseMatrix) -> DenseMatrix {
        DenseMatrix {
            inner: &self.inner + &other.inner,
        }
    }

    pub fn sub(&self, other: &DenseMatrix) -> DenseMatrix {
        DenseMatrix {
            inner: &self.inner - &other.inner,
        }
    }

    pub fn scale(&self, s: Complex64) -> DenseMatrix {
        DenseMatrix {
            inner: &self.inner * s,
        }
    }

    /// `self + s·I`.
    pub fn shift(&self, s: Complex64) -> DenseMatrix {
        let mut m = self.inner.clone();
        for i in 0..self.dim() {
            m[(i, i)] += s;
        }
        DenseMatrix { inner: m }
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let d = self.dim();
        (0..d)
            .map(|i| (0..d).map(|j| self.inner[(i, j)] * x[j]).sum())
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.inner
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Maximum absolute column sum.
    pub fn norm_1(&self) -> f64 {
        (0..self.dim())
            .map(|j| self.inner.column(j).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.dim())
            .map(|i| self.inner.row(i).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Spectral norm.
    pub fn norm_2(&self) -> f64 {
        self.inner.clone().singular_values().max()
    }

    pub fn max_abs(&self) -> f64 {
        self.inner.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Induced operator norm for a coordinate norm. Exact for ℓ¹, ℓ², ℓ^∞ and
    /// their weighted versions; a power-iteration lower bound for general ℓ^p.
    pub fn operator_norm(&self, norm: &VecNorm) -> f64 {
        match norm {
            VecNorm::L1 => self.norm_1(),
            VecNorm::L2 => self.norm_2(),
            VecNorm::LInf => self.norm_inf(),
            VecNorm::Lp(_) => self.lp_norm_estimate(norm),
            VecNorm::Weighted { base, weights } => {
                let d = self.dim();
                let m =
                    DMatrix::from_fn(d, d, |i, j| self.inner[(i, j)] * (weights[i] / weights[j]));
                DenseMatrix { inner: m }.operator_norm(base)
            }
        }
    }

    fn lp_norm_estimate(&self, norm: &VecNorm) -> f64 {
        let d = self.dim();
        let dual = norm.dual();
        let adj = DenseMatrix {
            inner: self.inner.adjoint(),
        };
        let mut best = 0.0f64;
        for start in 0..=d {
            let mut x: Vec<Complex64> = (0..d)
                .map(|i| {
                    if start == d || i == start {
                        c(1.0)
                    } else {
                        c(0.0)
                    }
                })
                .collect();
            let n = norm.eval(&x);
            x.iter_mut().for_each(|z| *z /= n);
            for _ in 0..50 {
                let y = self.apply(&x);
                let ny = norm.eval(&y);
                best = best.max(ny);
                if ny == 0.0 {
                    break;
                }
                let z = adj.apply(&norm.subgradient(&y));
                let g = dual.subgradient(&z);
                let ng = norm.eval(&g);
                if ng == 0.0 {
                    break;
                }
                x = g.iter().map(|v| v / ng).collect();
            }
        }
        best
    }

    /// `e^{-tA}`.
    pub fn mat_exp(&self, t: f64) -> Result<DenseMatrix> {
        if !(t >= 0.0 && t.is_finite()) {
            return param(format!(
                "semigroup time must be finite and nonnegative (got {t})"
            ));
        }
        expm(&self.scale(c(-t)))
    }

    /// `(e^{-hA}, φ₁(-hA))` with `φ₁(M) = Σ M^k/(k+1)!`, read off the
    /// exponential of the block matrix `[[M, I], [0, 0]]`.
    pub fn exp_phi1(&self, h: f64) -> Result<(DenseMatrix, DenseMatrix)> {
        if !(h >= 0.0 && h.is_finite()) {
            return param(format!("step must be finite and nonnegative (got {h})"));
        }
        let d = self.dim();
        let mut big = DMatrix::zeros(2 * d, 2 * d);
        for i in 0..d {
            for j in 0..d {
                big[(i, j)] = -self.inner[(i, j)] * h;
            }
            big[(i, d + i)] = c(1.0);
        }
        let e = expm(&DenseMatrix { inner: big })?;
        let top_left = e.inner.view((0, 0), (d, d)).into_owned();
        let top_right = e.inner.view((0, d), (d, d)).into_owned();
        Ok((
            DenseMatrix { inner: top_left },
            DenseMatrix { inner: top_right },
        ))
    }

    /// `R(z, A) = (zI - A)^{-1}`.
    /// Singular when a pivot falls below `1e-13·max(|z|, ‖A‖_∞)`.
    pub fn solve_resolvent(&self, z: Complex64) -> Result<DenseMatrix> {
        let m = self.scale(c(-1.0)).shift(z);
        let lu = Lu::with_scale(&m, z.norm().max(self.norm_inf()))?;
        Ok(lu.solve_matrix(&DenseMatrix::identity(self.dim())))
    }

    pub fn inverse(&self) -> Result<DenseMatrix> {
        let lu = Lu::new(self)?;
        Ok(lu.solve_matrix(&DenseMatrix::identity(self.dim())))
    }

    /// Solve `self · X = rhs`.
    pub fn solve(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        Ok(Lu::new(self)?.solve_matrix(rhs))
    }

    pub fn solve_vec(&self, b: &[Complex64]) -> Result<Vec<Complex64>> {
        Ok(Lu::new(self)?.solve_vec(b))
    }

    /// Eigenvalues from a complex Schur decomposition.
    pub fn eigenvalues(&self) -> Result<Vec<Complex64>> {
        let schur = nalgebra::linalg::Schur::try_new(self.inner.clone(), f64::EPSILON, 10_000)
            .ok_or_else(|| Error::Estimation {
                reason: "Schur iteration did not converge".into(),
                gap: f64::NAN,
            })?;
        let (_, t) = schur.unpack();
        // the complex Schur form is upper triangular up to round-off
        Ok((0..self.dim()).map(|i| t[(i, i)]).collect())
    }
}

/// LU factorisation with partial pivoting; pivots below
/// `1e-13·‖A‖_∞` are reported as singular.
struct Lu {
    lu: DMatrix<Complex64>,
    perm: Vec<usize>,
}

impl Lu {
    fn new(a: &DenseMatrix) -> Result<Self> {
        Self::with_scale(a, a.norm_inf())
    }

    /// Pivots are compared against `PIVOT_THRESHOLD · scale`.
    fn with_scale(a: &DenseMatrix, scale: f64) -> Result<Self> {
        let d = a.dim();
        let threshold = PIVOT_THRESHOLD * scale.max(f64::MIN_POSITIVE);
        let mut lu = a.inner.clone();
        let mut perm: Vec<usize> = (0..d).collect();
        for k in 0..d {
            let (p, pivot) = (k..d)
                .map(|i| (i, lu[(i, k)].norm()))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            if !(pivot > threshold) {
                return Err(Error::Singular { pivot, threshold });
            }
            if p != k {
                lu.swap_rows(p, k);
                perm.swap(p, k);
            }
            let piv = lu[(k, k)];
            for i in k + 1..d {
                let f = lu[(i, k)] / piv;
                lu[(i, k)] = f;
                for j in k + 1..d {
                    let v = lu[(k, j)];
                    lu[(i, j)] -= f * v;
                }
            }
        }
        Ok(Self { lu, perm })
    }

    fn solve_vec(&self, b: &[Complex64]) -> Vec<Complex64> {
        let d = self.perm.len();
        let mut y: Vec<Complex64> = self.perm.iter().map(|&i| b[i]).collect();
        for i in 0..d {
            for j in 0..i {
                let v = y[j];
                y[i] -= self.lu[(i, j)] * v;
            }
        }
        for i in (0..d).rev() {
            for j in i + 1..d {
                let v = y[j];
                y[i] -= self.lu[(i, j)] * v;
            }
            y[i] /= self.lu[(i, i)];
        }
        y
    }

    fn solve_matrix(&self, rhs: &DenseMatrix) -> DenseMatrix {
        let d = self.perm.len();
        let mut out = DMatrix::zeros(d, rhs.dim());
        for j in 0..rhs.dim() {
            let col: Vec<Complex64> = rhs.inner.column(j).iter().copied().collect();
            for (i, v) in self.solve_vec(&col).into_iter().enumerate() {
                out[(i, j)] = v;
            }
        }
        DenseMatrix { inner: out }
    }
}

/// Scaling and squaring on a degree-18 Taylor polynomial.
fn expm(m: &DenseMatrix) -> Result<DenseMatrix> {
    let d = m.dim();
    let norm = m.norm_1();
    if !norm.is_finite() {
        return domain("matrix exponential of a non-finite matrix");
    }
    let mut s = 0i32;
    if norm > 0.5 {
        s = (norm / 0.5).log2().ceil() as i32;
    }
    if s > 1000 {
        return domain(format!("matrix exponential overflow (norm {norm:.3e})"));
    }
    let x = &m.inner * c(0.5f64.powi(s));
    let mut term = DMatrix::<Complex64>::identity(d, d);
    let mut sum = term.clone();
    for k in 1..=TAYLOR_DEGREE {
        term = &term * &x * c(1.0 / k as f64);
        sum += &term;
    }
    for _ in 0..s {
        sum = &sum * &sum;
        if sum.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return domain(format!("matrix exponential overflow (norm {norm:.3e})"));
        }
    }
    Ok(DenseMatrix { inner: sum })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &DenseMatrix, b: &DenseMatrix, tol: f64) -> bool {
        a.sub(b).max_abs() <= tol
    }

    #[test]
    fn exp_at_zero_is_identity() {
        let a = DenseMatrix::from_real_rows(&[vec![1.0, 5.0], vec![-2.0, 3.0]]).unwrap();
        assert_eq!(a.mat_exp(0.0).unwrap(), DenseMatrix::identity(2));
    }

    #[test]
    fn exp_of_diagonal() {
        let a = DenseMatrix::real_diag(&[1.0, 2.0]).unwrap();
        let e = a.mat_exp(1.0).unwrap();
        let want = DenseMatrix::real_diag(&[(-1f64).exp(), (-2f64).exp()]).unwrap();
        assert!(close(&e, &want, 1e-12));
    }

    #[test]
    fn exp_of_nilpotent() {
        let n = DenseMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        for t in [0.5, 3.0, 40.0] {
            let want = DenseMatrix::identity(2).sub(&n.scale(c(t)));
            assert!(close(&n.mat_exp(t).unwrap(), &want, 1e-12 * t));
        }
    }

    #[test]
    fn exp_overflow_is_domain_error() {
        let a = DenseMatrix::real_diag(&[-1.0]).unwrap();
        assert!(matches!(a.mat_exp(1e6), Err(Error::Domain(_))));
    }

    #[test]
    fn phi1_matches_closed_form() {
        let a = DenseMatrix::real_diag(&[2.0, 1e-9]).unwrap();
        let h = 0.3;
        let (e, p) = a.exp_phi1(h).unwrap();
        let phi = |x: f64| {
            if x.abs() < 1e-6 {
                1.0 - x / 2.0
            } else {
                (1.0 - (-x).exp()) / x
            }
        };
        assert!((e.get(0, 0).re - (-0.6f64).exp()).abs() < 1e-14);
        assert!((p.get(0, 0).re - phi(0.6)).abs() < 1e-14);
        assert!((p.get(1, 1).re - phi(0.3e-9)).abs() < 1e-14);
    }

    #[test]
    fn resolvent_examples() {
        let r = DenseMatrix::real_diag(&[1.0])
            .unwrap()
            .solve_resolvent(c(2.0))
            .unwrap();
        assert!((r.get(0, 0) - c(1.0)).norm() < 1e-15);
        let r = DenseMatrix::real_diag(&[1.0, 3.0])
            .unwrap()
            .solve_resolvent(c(0.0))
            .unwrap();
        assert!(close(
            &r,
            &DenseMatrix::real_diag(&[-1.0, -1.0 / 3.0]).unwrap(),
            1e-15
        ));
        let a = DenseMatrix::from_real_rows(&[vec![2.0, 1.0], vec![0.0, 3.0]]).unwrap();
        assert!(matches!(
            a.solve_resolvent(c(3.0)),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn eigenvalues_of_complex_matrix() {
        let th = std::f64::consts::PI / 8.0;
        let a = DenseMatrix::from_rows(&[
            vec![Complex64::from_polar(1.0, th), c(2.0)],
            vec![c(0.0), Complex64::from_polar(1.0, -th)],
        ])
        .unwrap();
        let q = DenseMatrix::from_real_rows(&[vec![1.0, 2.0], vec![-1.0, 1.0]]).unwrap();
        let b = q.mul(&a).mul(&q.inverse().unwrap());
        let mut ev = b.eigenvalues().unwrap();
        ev.sort_by(|x, y| x.im.total_cmp(&y.im));
        assert!((ev[0] - Complex64::from_polar(1.0, -th)).norm() < 1e-10);
        assert!((ev[1] - Complex64::from_polar(1.0, th)).norm() < 1e-10);
    }

    #[test]
    fn operator_norms() {
        let a = DenseMatrix::from_real_rows(&[vec![1.0, -2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(a.operator_norm(&VecNorm::L1), 6.0);
        assert_eq!(a.operator_norm(&VecNorm::LInf), 7.0);
        let lp = a.operator_norm(&VecNorm::Lp(2.0));
        assert!((lp - a.norm_2()).abs() < 1e-6 * a.norm_2());
        let d = DenseMatrix::real_diag(&[0.5, -3.0]).unwrap();
        let w = VecNorm::weighted(VecNorm::L1, vec![1.0, 7.0]).unwrap();
        assert!((d.operator_norm(&w) - 3.0).abs() < 1e-15);
    }
}
