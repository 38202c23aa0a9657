//! Sectorial matrices and their holomorphic functional calculus by contour
//! quadrature.

mod repr;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::couples::Couple;
use crate::error::{param, Error, Result};
use crate::numerics::{DenseMatrix, VecNorm};

pub use repr::{
    dore_ratio, interp_norm_report, interp_norm_reports, psi_rep_norm, semigroup_rep_norm,
    DoreMember, DoreReport, InterpNormReport, PairBracket, Representation,
};

/// Absolute bound accepted for the part of a contour integral cut off at
/// `r_min` and `r_max`.
pub const CONTOUR_TOLERANCE: f64 = 1e-11;

/// Relative size below which a quadrature node is dropped unevaluated.
const NEGLIGIBLE: f64 = 1e-18;

const PROFILE_LIMIT: f64 = 1e10;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// A matrix with spectrum in a closed sector `S̄_φ`, `φ < π`.
#[derive(Debug, Clone)]
pub struct SectorialOperator {
    a: DenseMatrix,
    eigenvalues: Vec<Complex64>,
    invertible: bool,
    angle_estimate: f64,
}

impl SectorialOperator {
    /// Spectral angle from the eigenvalues; the resolvent profile must be
    /// finite just outside it.
    pub fn new(a: DenseMatrix) -> Result<Self> {
        if !a.is_finite() {
            return param("matrix entries must be finite");
        }
        let eigenvalues = a.eigenvalues()?;
        let scale = a.max_abs().max(f64::MIN_POSITIVE);
        let angle_estimate = eigenvalues
            .iter()
            .filter(|z| z.norm() > 1e-12 * scale)
            .map(|z| z.arg().abs())
            .fold(0.0, f64::max);
        if angle_estimate >= PI - 1e-9 {
            return Err(Error::Domain(
                "spectrum meets the negative real axis; the matrix is not sectorial".into(),
            ));
        }
        let invertible = a.inverse().is_ok();
        let op = Self {
            a,
            eigenvalues,
            invertible,
            angle_estimate,
        };
        let probe = (angle_estimate + PI) / 2.0;
        let m = sector_profile(&op.a, probe, 200)?;
        if !(m < PROFILE_LIMIT) {
            return Err(Error::Domain(format!(
                "resolvent profile {m:.3e} outside the sector; not sectorial"
            )));
        }
        Ok(op)
    }

    pub fn positive_diagonal(mu: &[f64]) -> Result<Self> {
        if mu.is_empty() || mu.iter().any(|&m| !(m > 0.0 && m.is_finite())) {
            return param("diagonal entries must be positive");
        }
        Self::new(DenseMatrix::real_diag(mu)?)
    }

    /// `[[1, κ], [0, 1]]`.
    pub fn jordan(kappa: f64) -> Result<Self> {
        Self::new(DenseMatrix::from_real_rows(&[
            vec![1.0, kappa],
            vec![0.0, 1.0],
        ])?)
    }

    /// `diag(e^{iθ}, e^{-iθ})`.
    pub fn rotated(theta: f64) -> Result<Self> {
        Self::new(DenseMatrix::diag(&[
            Complex64::from_polar(1.0, theta),
            Complex64::from_polar(1.0, -theta),
        ])?)
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.a
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    pub fn is_invertible(&self) -> bool {
        self.invertible
    }

    pub fn angle_estimate(&self) -> f64 {
        self.angle_estimate
    }

    /// Geometric mean of the nonzero eigenvalue moduli.
    pub fn spectral_scale(&self) -> f64 {
        let logs: Vec<f64> = self
            .eigenvalues
            .iter()
            .map(|z| z.norm())
            .filter(|&r| r > 0.0)
            .map(f64::ln)
            .collect();
        if logs.is_empty() {
            1.0
        } else {
            (logs.iter().sum::<f64>() / logs.len() as f64).exp()
        }
    }

    /// Working sector angle: `π/4` above the spectral angle, kept below `π/2`
    /// when the spectrum allows.
    pub fn working_angle(&self) -> f64 {
        let a = self.angle_estimate;
        if a < FRAC_PI_2 {
            (a + FRAC_PI_4).min((a + FRAC_PI_2) / 2.0)
        } else {
            (a + PI) / 2.0
        }
    }

    /// Contour angle midway between the spectral and working angles.
    pub fn contour_angle(&self) -> f64 {
        (self.angle_estimate + self.working_angle()) / 2.0
    }

    /// `(X, |·|)` with `|x|_Y = |x| + |Ax|`.
    pub fn domain_couple(&self, norm: VecNorm) -> Couple {
        Couple::domain(self.a.clone(), norm)
    }
}

/// `sup ‖λR(λ, A)‖₂` over `λ ∉ S_φ'`, sampled on the two boundary rays over
/// 24 decades around `‖A‖₂`; the limit 1 at infinity is included.
pub fn sector_profile(a: &DenseMatrix, phi_prime: f64, samples: usize) -> Result<f64> {
    if !(phi_prime > 0.0 && phi_prime < PI) {
        return param(format!(
            "profile angle must lie in (0, π) (got {phi_prime})"
        ));
    }
    if samples < 2 {
        return param("at least two ray samples are needed");
    }
    let rho = {
        let n = a.norm_2();
        if n > 0.0 {
            n
        } else {
            1.0
        }
    };
    let pts: Vec<Complex64> = (0..samples)
        .flat_map(|k| {
            let r = rho * 10f64.powf(-12.0 + 24.0 * k as f64 / (samples - 1) as f64);
            [
                Complex64::from_polar(r, phi_prime),
                Complex64::from_polar(r, -phi_prime),
            ]
        })
        .collect();
    let vals: Result<Vec<f64>> = pts
        .par_iter()
        .map(|&z| Ok(a.solve_resolvent(z)?.scale(z).norm_2()))
        .collect();
    Ok(vals?.into_iter().fold(1.0, f64::max))
}

pub type ScalarFn = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

/// Holomorphic functions on a sector, with the bounds the calculus relies on.
#[derive(Clone)]
pub enum HolFunction {
    /// `|f(z)| ≤ C min(|z|^s, |z|^{-s})`.
    H0 {
        name: String,
        f: ScalarFn,
        decay: f64,
        constant: f64,
    },
    /// `f_0 + λ(1+z)^{-1} + μ`.
    EClass {
        h0: Option<Box<HolFunction>>,
        lambda: Complex64,
        mu: Complex64,
    },
    /// Bounded by `sup_norm` on the working sector.
    HInf {
        name: String,
        f: ScalarFn,
        sup_norm: f64,
    },
}

impl fmt::Debug for HolFunction {
    fn fmt(&self, fmt: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(fmt, "{}", self.name())
    }
}

impl HolFunction {
    pub fn h0(
        name: impl Into<String>,
        f: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static,
        decay: f64,
        constant: f64,
    ) -> Result<Self> {
        if !(decay > 0.0 && constant > 0.0 && constant.is_finite()) {
            return param("H0 functions need positive decay exponent and constant");
        }
        Ok(HolFunction::H0 {
            name: name.into(),
            f: Arc::new(f),
            decay,
            constant,
        })
    }

    pub fn e_class(h0: Option<HolFunction>, lambda: Complex64, mu: Complex64) -> Result<Self> {
        if let Some(h) = &h0 {
            if !matches!(h, HolFunction::H0 { .. }) {
                return param("the decaying part of an E-class function must be H0");
            }
        }
        Ok(HolFunction::EClass {
            h0: h0.map(Box::new),
            lambda,
            mu,
        })
    }

    pub fn hinf(
        name: impl Into<String>,
        f: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static,
        sup_norm: f64,
    ) -> Result<Self> {
        if !(sup_norm > 0.0 && sup_norm.is_finite()) {
            return param("H∞ functions need a positive finite sup-norm bound");
        }
        Ok(HolFunction::HInf {
            name: name.into(),
            f: Arc::new(f),
            sup_norm,
        })
    }

    /// `e(z) = z/(1+z)²`, bounded by `min(|z|, 1/|z|)/cos²(φ/2)` on `S_φ`.
    pub fn regulariser(phi: f64) -> Self {
        let k = (phi / 2.0).cos().powi(-2);
        HolFunction::h0("z/(1+z)^2", |z| z / ((c(1.0) + z) * (c(1.0) + z)), 1.0, k)
            .expect("valid constants")
    }

    /// `z e^{-z}` on `S_φ`, `φ < π/2`.
    pub fn psi_exp(phi: f64) -> Result<Self> {
        if !(phi < FRAC_PI_2) {
            return param("z e^{-z} decays only on sectors of angle below π/2");
        }
        let k = (2.0 / (std::f64::consts::E * phi.cos())).powi(2).max(1.0);
        HolFunction::h0("z*exp(-z)", |z| z * (-z).exp(), 1.0, k)
    }

    /// `z/(1+z) = 1 − (1+z)^{-1}`.
    pub fn psi_rational() -> Self {
        HolFunction::EClass {
            h0: None,
            lambda: c(-1.0),
            mu: c(1.0),
        }
    }

    /// `((z−1)/(z+1))^k`, bounded by 1 on the right half-plane.
    pub fn mobius_power(k: u32) -> Self {
        HolFunction::HInf {
            name: format!("((z-1)/(z+1))^{k}"),
            f: Arc::new(move |z| ((z - 1.0) / (z + 1.0)).powu(k)),
            sup_norm: 1.0,
        }
    }

    /// `z^{iτ}`, bounded by `e^{|τ|φ}` on `S_φ`.
    pub fn imaginary_power(tau: f64, phi: f64) -> Self {
        HolFunction::HInf {
            name: format!("z^(i*{tau})"),
            f: Arc::new(move |z| {
                if z == c(0.0) {
                    c(1.0)
                } else {
                    (Complex64::new(0.0, tau) * z.ln()).exp()
                }
            }),
            sup_norm: (tau.abs() * phi).exp(),
        }
    }

    pub fn one() -> Self {
        HolFunction::EClass {
            h0: None,
            lambda: c(0.0),
            mu: c(1.0),
        }
    }

    pub fn name(&self) -> String {
        match self {
            HolFunction::H0 { name, .. } | HolFunction::HInf { name, .. } => name.clone(),
            HolFunction::EClass { h0, lambda, mu } => {
                let base = h0.as_ref().map(|h| h.name()).unwrap_or_else(|| "0".into());
                format!("{base} + ({lambda})/(1+z) + ({mu})")
            }
        }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        match self {
            HolFunction::H0 { f, .. } | HolFunction::HInf { f, .. } => f(z),
            HolFunction::EClass { h0, lambda, mu } => {
                h0.as_ref().map(|h| h.eval(z)).unwrap_or(c(0.0)) + lambda / (c(1.0) + z) + mu
            }
        }
    }

    /// Product of two H0 functions, or of an H0 function with a bounded one.
    pub fn mul(&self, other: &HolFunction) -> Result<HolFunction> {
        let (f, g) = (self.clone(), other.clone());
        let name = format!("({})*({})", self.name(), other.name());
        let eval = move |z| f.eval(z) * g.eval(z);
        match (self, other) {
            (
                HolFunction::H0 {
                    decay: s1,
                    constant: c1,
                    ..
                },
                HolFunction::H0 {
                    decay: s2,
                    constant: c2,
                    ..
                },
            ) => HolFunction::h0(name, eval, s1 + s2, c1 * c2),
            (
                HolFunction::H0 {
                    decay, constant, ..
                },
                HolFunction::HInf { sup_norm, .. },
            )
            | (
                HolFunction::HInf { sup_norm, .. },
                HolFunction::H0 {
                    decay, constant, ..
                },
            ) => HolFunction::h0(name, eval, *decay, constant * sup_norm),
            _ => param("products are supported for H0·H0 and H0·H∞"),
        }
    }
}

/// Two rays `r e^{±iβ}` with log-uniform nodes in `[r_min, r_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contour {
    pub beta: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub per_decade: usize,
}

impl Contour {
    pub fn new(beta: f64, r_min: f64, r_max: f64, per_decade: usize) -> Result<Self> {
        if !(beta > 0.0 && beta < PI) {
            return param(format!("contour angle must lie in (0, π) (got {beta})"));
        }
        if !(r_min > 0.0 && r_max > r_min && r_max.is_finite()) {
            return param("contour radii must satisfy 0 < r_min < r_max < ∞");
        }
        if per_decade == 0 {
            return param("contour needs at least one node per decade");
        }
        Ok(Self {
            beta,
            r_min,
            r_max,
            per_decade,
        })
    }

    /// Angle midway between spectrum and working sector, 12 decades around
    /// the spectral scale, at least 40 nodes per decade.
    ///
    /// The trapezoid error in `log r` decays like `exp(-2π g/h)` with `g` the
    /// angular distance to the nearest singularity, so narrow sectors get
    /// denser nodes (`exp(-30)` at the chosen step).
    pub fn default_for(op: &SectorialOperator) -> Self {
        let rho = op.spectral_scale();
        let gap = (op.working_angle() - op.angle_estimate) / 2.0;
        let per_decade =
            ((30.0 * std::f64::consts::LN_10 / (2.0 * PI * gap)).ceil() as usize).max(40);
        Self {
            beta: op.contour_angle(),
            r_min: 1e-6 * rho,
            r_max: 1e6 * rho,
            per_decade,
        }
    }

    /// Widened so that `f(tA)` for `t ∈ [t_lo, t_hi]` has truncation error
    /// below [`CONTOUR_TOLERANCE`], given decay `s`, constant `C` and the
    /// resolvent profile `m`.
    fn covering(self, decay: f64, constant: f64, m: f64, t_lo: f64, t_hi: f64) -> Self {
        let k = (0.25 * CONTOUR_TOLERANCE * PI * decay / (m * constant)).powf(1.0 / decay);
        Self {
            r_min: self.r_min.min(k / t_hi),
            r_max: self.r_max.max(1.0 / (k * t_lo)),
            ..self
        }
    }

    /// `(M C/π)·((t r_min)^s + (t r_max)^{-s})/s`.
    fn truncation_bound(&self, decay: f64, constant: f64, m: f64, t: f64) -> f64 {
        m * constant / PI * ((t * self.r_min).powf(decay) + (t * self.r_max).powf(-decay)) / decay
    }

    fn contains_spectrum_side(&self, op: &SectorialOperator) -> Result<()> {
        if !(self.beta > op.angle_estimate) {
            return param(format!(
                "contour angle {:.4} does not separate the spectrum (angle {:.4})",
                self.beta, op.angle_estimate
            ));
        }
        Ok(())
    }
}

/// Contour nodes with quadrature weights (including `1/(2πi)` and the
/// orientation) and precomputed resolvents.
pub struct Quadrature {
    contour: Contour,
    nodes: Vec<Complex64>,
    weights: Vec<Complex64>,
    resolvents: Vec<DenseMatrix>,
    /// `max ‖zR(z, A)‖₂` over the nodes.
    profile: f64,
}

impl Quadrature {
    pub fn new(op: &SectorialOperator, contour: Contour) -> Result<Self> {
        contour.contains_spectrum_side(op)?;
        let (lo, hi) = (contour.r_min.ln(), contour.r_max.ln());
        let n = (((hi - lo) / std::f64::consts::LN_10) * contour.per_decade as f64)
            .ceil()
            .max(1.0) as usize;
        let h = (hi - lo) / n as f64;
        let two_pi_i = Complex64::new(0.0, 2.0 * PI);
        let mut nodes = Vec::with_capacity(2 * (n + 1));
        let mut weights = Vec::with_capacity(2 * (n + 1));
        for k in 0..=n {
            let r = (lo + h * k as f64).exp();
            let trap = if k == 0 || k == n { 0.5 * h } else { h };
            // lower ray outbound, upper ray inbound; dz = z du
            let down = Complex64::from_polar(r, -contour.beta);
            let up = Complex64::from_polar(r, contour.beta);
            nodes.push(down);
            weights.push(down * trap / two_pi_i);
            nodes.push(up);
            weights.push(-up * trap / two_pi_i);
        }
        let resolvents: Result<Vec<DenseMatrix>> =
            nodes.par_iter().map(|&z| op.a.solve_resolvent(z)).collect();
        let resolvents = resolvents?;
        let profile = nodes
            .iter()
            .zip(&resolvents)
            .map(|(z, r)| r.norm_2() * z.norm())
            .fold(0.0, f64::max);
        Ok(Self {
            contour,
            nodes,
            weights,
            resolvents,
            profile,
        })
    }

    pub fn contour(&self) -> &Contour {
        &self.contour
    }

    pub fn profile(&self) -> f64 {
        self.profile
    }

    /// Nonzero quadrature coefficients `f(tz_k) w_k`, checked against the declared decay bound.
    fn coefficients(&self, f: &HolFunction, t: f64) -> Result<Vec<(usize, Complex64)>> {
        let HolFunction::H0 {
            f: g,
            decay,
            constant,
            name,
        } = f
        else {
            return param("contour quadrature needs an H0 function");
        };
        let bound = self
            .contour
            .truncation_bound(*decay, *constant, self.profile, t);
        if bound > CONTOUR_TOLERANCE {
            return Err(Error::ContourRange {
                bound,
                tolerance: CONTOUR_TOLERANCE,
            });
        }
        let mut out = Vec::with_capacity(self.nodes.len());
        for (k, (z, w)) in self.nodes.iter().zip(&self.weights).enumerate() {
            let r = (t * z.norm()).max(f64::MIN_POSITIVE);
            let allowed = constant * (-decay * r.ln().abs()).exp();
            if allowed * self.profile * w.norm() / z.norm() < NEGLIGIBLE * constant {
                continue;
            }
            let v = g(z * t);
            if v.norm() > allowed * (1.0 + 1e-9) + 1e-300 {
                return param(format!(
                    "{name} violates its declared decay bound at z = {}",
                    z * t
                ));
            }
            let coeff = v * w;
            if coeff != c(0.0) {
                out.push((k, coeff));
            }
        }
        Ok(out)
    }

    /// `f(tA)` for an H0 function.
    pub fn apply_scaled(&self, f: &HolFunction, t: f64) -> Result<DenseMatrix> {
        let d = self.resolvents[0].dim();
        let mut acc = DMatrix::<Complex64>::zeros(d, d);
        for (k, coeff) in self.coefficients(f, t)? {
            acc += self.resolvents[k].as_dmatrix() * coeff;
        }
        DenseMatrix::from_dmatrix(acc)
    }

    /// `f(tA)x` for an H0 function, from precomputed `R(z)x`.
    fn apply_scaled_vec(
        &self,
        f: &HolFunction,
        rx: &[Vec<Complex64>],
        t: f64,
    ) -> Result<Vec<Complex64>> {
        let mut acc = vec![c(0.0); rx[0].len()];
        for (k, coeff) in self.coefficients(f, t)? {
            for (a, b) in acc.iter_mut().zip(&rx[k]) {
                *a += b * coeff;
            }
        }
        Ok(acc)
    }

    fn resolvent_times(&self, x: &[Complex64]) -> Vec<Vec<Complex64>> {
        self.resolvents.iter().map(|r| r.apply(x)).collect()
    }
}

/// `f(A)` for `f ∈ H∞₀` by quadrature on the given contour.
pub fn calc_h0(f: &HolFunction, op: &SectorialOperator, contour: &Contour) -> Result<DenseMatrix> {
    Quadrature::new(op, *contour)?.apply_scaled(f, 1.0)
}

/// Default contour widened for the decay of `f`.
pub fn contour_for(
    f: &HolFunction,
    op: &SectorialOperator,
    t_lo: f64,
    t_hi: f64,
) -> Result<Contour> {
    let base = Contour::default_for(op);
    match f {
        HolFunction::H0 {
            decay, constant, ..
        } => {
            let m = sector_profile(op.matrix(), base.beta, 200)?;
            // margin for the profile between samples
            Ok(base.covering(*decay, *constant, 2.0 * m, t_lo, t_hi))
        }
        _ => Ok(base),
    }
}

/// `f_0(A) + λ(I+A)^{-1} + μ`.
pub fn calc_e(f: &HolFunction, op: &SectorialOperator, contour: &Contour) -> Result<DenseMatrix> {
    calc_e_scaled(f, op, contour, 1.0)
}

fn calc_e_scaled(
    f: &HolFunction,
    op: &SectorialOperator,
    contour: &Contour,
    t: f64,
) -> Result<DenseMatrix> {
    let HolFunction::EClass { h0, lambda, mu } = f else {
        return param("calc_e needs an E-class function");
    };
    let d = op.dim();
    let ta = op.a.scale(c(t));
    let mut out = DenseMatrix::identity(d).scale(*mu);
    if *lambda != c(0.0) {
        out = out.add(&ta.shift(c(1.0)).inverse()?.scale(*lambda));
    }
    if let Some(h) = h0 {
        out = out.add(&Quadrature::new(op, *contour)?.apply_scaled(h, t)?);
    }
    Ok(out)
}

/// `A^{-1}(I+A)²(f e)(A)` for bounded `f` and invertible `A`.
pub fn calc_hinf(
    f: &HolFunction,
    op: &SectorialOperator,
    contour: &Contour,
) -> Result<DenseMatrix> {
    if !op.invertible {
        return Err(Error::NotInvertible);
    }
    if !matches!(f, HolFunction::HInf { .. }) {
        return param("calc_hinf needs an H∞ function");
    }
    let fe = HolFunction::regulariser(op.working_angle()).mul(f)?;
    let core = calc_h0(&fe, op, contour)?;
    let ipa = op.a.shift(c(1.0));
    op.a.solve(&ipa.mul(&ipa).mul(&core))
}

/// Contour [`calc`] uses for `f`: the default one, widened for decay.
pub fn default_contour(f: &HolFunction, op: &SectorialOperator) -> Result<Contour> {
    match f {
        HolFunction::H0 { .. } => contour_for(f, op, 1.0, 1.0),
        HolFunction::EClass { h0: Some(h), .. } => contour_for(h, op, 1.0, 1.0),
        HolFunction::EClass { h0: None, .. } => Ok(Contour::default_for(op)),
        HolFunction::HInf { .. } => {
            let fe = HolFunction::regulariser(op.working_angle()).mul(f)?;
            contour_for(&fe, op, 1.0, 1.0)
        }
    }
}

/// Dispatches on the function class.
pub fn calc_on(f: &HolFunction, op: &SectorialOperator, contour: &Contour) -> Result<DenseMatrix> {
    match f {
        HolFunction::H0 { .. } => calc_h0(f, op, contour),
        HolFunction::EClass { .. } => calc_e(f, op, contour),
        HolFunction::HInf { .. } => calc_hinf(f, op, contour),
    }
}

/// [`calc_on`] with [`default_contour`].
pub fn calc(f: &HolFunction, op: &SectorialOperator) -> Result<DenseMatrix> {
    calc_on(f, op, &default_contour(f, op)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
        a.sub(b).max_abs()
    }

    fn e_of(z: Complex64) -> Complex64 {
        z / ((c(1.0) + z) * (c(1.0) + z))
    }

    #[test]
    fn profile_examples() {
        let one = DenseMatrix::real_diag(&[1.0]).unwrap();
        assert!((sector_profile(&one, FRAC_PI_2, 400).unwrap() - 1.0).abs() < 1e-12);
        let d = DenseMatrix::real_diag(&[1.0, 2.0]).unwrap();
        assert!(sector_profile(&d, 0.05, 100).unwrap().is_finite());
        let r = DenseMatrix::diag(&[Complex64::from_polar(1.0, 0.3)]).unwrap();
        assert!(matches!(
            sector_profile(&r, 0.3, 25),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn operator_construction() {
        let op = SectorialOperator::rotated(PI / 8.0).unwrap();
        assert!((op.angle_estimate() - PI / 8.0).abs() < 1e-12);
        assert!(op.is_invertible() && op.working_angle() < FRAC_PI_2);
        let j = SectorialOperator::jordan(5.0).unwrap();
        assert_eq!(j.angle_estimate(), 0.0);
        assert!(SectorialOperator::new(DenseMatrix::real_diag(&[-1.0, 1.0]).unwrap()).is_err());
        let nil = DenseMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert!(SectorialOperator::new(nil).is_err());
        let singular = SectorialOperator::positive_diagonal(&[1.0]).unwrap();
        assert!(singular.is_invertible());
        let zero = SectorialOperator::new(DenseMatrix::real_diag(&[0.0, 1.0]).unwrap()).unwrap();
        assert!(!zero.is_invertible());
        assert!(matches!(
            calc_hinf(
                &HolFunction::mobius_power(1),
                &zero,
                &Contour::default_for(&zero)
            ),
            Err(Error::NotInvertible)
        ));
    }

    #[test]
    fn h0_calculus_matches_eigen_oracle() {
        let mu = [0.3, 1.0, 7.0];
        let op = SectorialOperator::positive_diagonal(&mu).unwrap();
        let e = HolFunction::regulariser(op.working_angle());
        let got = calc(&e, &op).unwrap();
        let want = DenseMatrix::diag(&mu.map(|m| e_of(c(m)))).unwrap();
        assert!(close(&got, &want) < 1e-10, "{}", close(&got, &want));
        let id = SectorialOperator::positive_diagonal(&[1.0]).unwrap();
        let v = calc(&e, &id).unwrap().get(0, 0);
        assert!((v - c(0.25)).norm() < 1e-10);
    }

    #[test]
    fn short_contour_is_rejected() {
        let op = SectorialOperator::positive_diagonal(&[1.0, 2.0]).unwrap();
        let e = HolFunction::regulariser(op.working_angle());
        let short = Contour::new(op.contour_angle(), 1e-2, 1e2, 40).unwrap();
        assert!(matches!(
            calc_h0(&e, &op, &short),
            Err(Error::ContourRange { .. })
        ));
        let wrong = Contour::new(1e-3, 1e-12, 1e12, 40).unwrap();
        let rot = SectorialOperator::rotated(0.3).unwrap();
        assert!(calc_h0(&e, &rot, &wrong).is_err());
    }

    #[test]
    fn e_class_examples() {
        let op = SectorialOperator::jordan(5.0).unwrap();
        let contour = Contour::default_for(&op);
        assert_eq!(
            calc_e(&HolFunction::one(), &op, &contour).unwrap(),
            DenseMatrix::identity(2)
        );
        let res = HolFunction::e_class(None, c(1.0), c(0.0)).unwrap();
        let inv = op.matrix().shift(c(1.0)).inverse().unwrap();
        assert_eq!(calc_e(&res, &op, &contour).unwrap(), inv);
        let psi = calc_e(&HolFunction::psi_rational(), &op, &contour).unwrap();
        assert!(close(&psi, &DenseMatrix::identity(2).sub(&inv)) < 1e-10);
    }

    #[test]
    fn hinf_examples() {
        let mu = [0.5, 2.0, 9.0];
        let op = SectorialOperator::positive_diagonal(&mu).unwrap();
        let one = HolFunction::hinf("1", |_| c(1.0), 1.0).unwrap();
        assert!(close(&calc(&one, &op).unwrap(), &DenseMatrix::identity(3)) < 1e-8);
        for k in [1, 4, 8] {
            let f = HolFunction::mobius_power(k);
            let want = DenseMatrix::diag(&mu.map(|m| f.eval(c(m)))).unwrap();
            assert!(close(&calc(&f, &op).unwrap(), &want) < 1e-7);
        }
        let f = HolFunction::imaginary_power(1.5, op.working_angle());
        let want =
            DenseMatrix::diag(&mu.map(|m| (Complex64::new(0.0, 1.5 * m.ln())).exp())).unwrap();
        assert!(close(&calc(&f, &op).unwrap(), &want) < 1e-7);
    }

    #[test]
    fn contour_angle_independence() {
        let op = SectorialOperator::jordan(3.0).unwrap();
        let e = HolFunction::regulariser(op.working_angle());
        let a = calc_h0(&e, &op, &Contour::new(0.3, 1e-16, 1e16, 40).unwrap()).unwrap();
        let b = calc_h0(&e, &op, &Contour::new(0.6, 1e-16, 1e16, 40).unwrap()).unwrap();
        assert!(close(&a, &b) < 1e-9, "{}", close(&a, &b));
    }

    #[test]
    fn multiplicativity() {
        let op = SectorialOperator::rotated(PI / 8.0).unwrap();
        let e = HolFunction::regulariser(op.working_angle());
        let ee = e.mul(&e).unwrap();
        let lhs = calc(&ee, &op).unwrap();
        let single = calc(&e, &op).unwrap();
        assert!(close(&lhs, &single.mul(&single)) < 1e-9);
    }
}
