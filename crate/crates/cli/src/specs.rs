use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use interplab_core::sectorial::{Contour, HolFunction, SectorialOperator};
use interplab_core::{
    Complex64, Couple, DenseMatrix, Error, LogGrid, PhiSpace, Result, VecNorm, VectorFunction,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn bad<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}

fn num(s: &str, what: &str) -> Result<f64> {
    match s.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => bad(format!("cannot parse {what} `{s}`")),
    }
}

fn nums(s: &str, what: &str) -> Result<Vec<f64>> {
    s.split(',').map(|x| num(x, what)).collect()
}

fn complex(s: &str) -> Result<Complex64> {
    let s = s.trim();
    Complex64::from_str(s).or_else(|_| bad(format!("cannot parse complex number `{s}`")))
}

fn split_row(line: &str) -> impl Iterator<Item = &str> {
    line.split(|ch: char| ch == ',' || ch.is_whitespace())
        .filter(|s| !s.is_empty())
}

fn data_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
}

fn read(path: &str) -> Result<String> {
    std::fs::read_to_string(path).or_else(|e| bad(format!("cannot read {path}: {e}")))
}

/// `TMIN,TMAX,N`.
pub fn grid(s: &str) -> Result<Arc<LogGrid>> {
    let parts: Vec<&str> = s.split(',').collect();
    let [lo, hi, n] = parts[..] else {
        return bad(format!("grid spec `{s}` must be TMIN,TMAX,N"));
    };
    let n: usize = n
        .trim()
        .parse()
        .or_else(|_| bad(format!("cannot parse grid size `{n}`")))?;
    Ok(Arc::new(LogGrid::new(
        num(lo, "t_min")?,
        num(hi, "t_max")?,
        n,
    )?))
}

/// `lp:P`, `lorentz:P,Q`, either with `@WEIGHT`, or `classical:THETA,Q`.
pub fn space(s: &str) -> Result<PhiSpace> {
    match s.trim().strip_prefix("classical:") {
        Some(rest) => match nums(rest, "classical parameter")?[..] {
            [theta, q] => PhiSpace::classical(theta, q),
            _ => bad(format!("classical space needs THETA,Q, got `{rest}`")),
        },
        None => s.parse(),
    }
}

/// `diag:M1,M2,..`, `jordan:KAPPA`, `rotated:THETA`, or a file with one
/// matrix row per line.
pub fn operator(s: &str) -> Result<SectorialOperator> {
    let s = s.trim();
    if let Some(rest) = s.strip_prefix("diag:") {
        return SectorialOperator::positive_diagonal(&nums(rest, "eigenvalue")?);
    }
    if let Some(rest) = s.strip_prefix("jordan:") {
        return SectorialOperator::jordan(num(rest, "Jordan coupling")?);
    }
    if let Some(rest) = s.strip_prefix("rotated:") {
        return SectorialOperator::rotated(num(rest, "rotation angle")?);
    }
    let rows: Vec<Vec<Complex64>> = data_lines(&read(s)?)
        .map(|l| split_row(l).map(complex).collect::<Result<_>>())
        .collect::<Result<_>>()?;
    SectorialOperator::new(DenseMatrix::from_rows(&rows)?)
}

/// `trivial:DIM`, `diagonal:M1,M2,..[@P]` or `domain:OPERATOR`.
pub fn couple(s: &str) -> Result<Couple> {
    let s = s.trim();
    if let Some(rest) = s.strip_prefix("trivial:") {
        let dim = rest
            .trim()
            .parse()
            .or_else(|_| bad(format!("cannot parse dimension `{rest}`")))?;
        return Couple::trivial(dim, VecNorm::L2);
    }
    if let Some(rest) = s.strip_prefix("diagonal:") {
        let (mu, p) = match rest.split_once('@') {
            Some((mu, p)) => (mu, num(p, "exponent")?),
            None => (rest, 2.0),
        };
        return Couple::diagonal(nums(mu, "diagonal weight")?, p);
    }
    if let Some(rest) = s.strip_prefix("domain:") {
        return Ok(operator(rest)?.domain_couple(VecNorm::L2));
    }
    bad(format!(
        "couple spec `{s}` must be trivial:DIM, diagonal:M1,M2,.. or domain:OPERATOR"
    ))
}

/// Comma-separated entries, or a file holding them.
pub fn vector(s: &str) -> Result<Vec<Complex64>> {
    let text = if Path::new(s).is_file() {
        read(s)?
    } else {
        s.to_string()
    };
    let v: Vec<Complex64> = data_lines(&text)
        .flat_map(split_row)
        .map(complex)
        .collect::<Result<_>>()?;
    if v.is_empty() {
        return bad("empty vector");
    }
    Ok(v)
}

/// One vector per line.
pub fn vectors(path: &str) -> Result<Vec<Vec<Complex64>>> {
    let xs: Vec<Vec<Complex64>> = data_lines(&read(path)?)
        .map(|l| split_row(l).map(complex).collect::<Result<_>>())
        .collect::<Result<_>>()?;
    if xs.is_empty() {
        return bad(format!("{path} holds no vectors"));
    }
    Ok(xs)
}

pub fn unit_vectors(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<Vec<Complex64>> {
    (0..n)
        .map(|_| {
            let v: Vec<Complex64> = (0..dim)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let norm = VecNorm::L2.eval(&v);
            v.iter().map(|z| z / norm).collect()
        })
        .collect()
}

/// `one`, `mobius:K`, `ipow:TAU`, `zexp`, `z1pz`, `reg`; `phi` is the working angle.
pub fn function(s: &str, phi: f64) -> Result<HolFunction> {
    let s = s.trim();
    match s.split_once(':') {
        Some(("mobius", k)) => {
            let k = k
                .trim()
                .parse()
                .or_else(|_| bad(format!("cannot parse power `{k}`")))?;
            Ok(HolFunction::mobius_power(k))
        }
        Some(("ipow", tau)) => Ok(HolFunction::imaginary_power(
            num(tau, "imaginary exponent")?,
            phi,
        )),
        None if s == "one" => Ok(HolFunction::one()),
        None if s == "zexp" => HolFunction::psi_exp(phi),
        None if s == "z1pz" => Ok(HolFunction::psi_rational()),
        None if s == "reg" => Ok(HolFunction::regulariser(phi)),
        _ => bad(format!("unknown function spec `{s}`")),
    }
}

/// `BETA,RMIN,RMAX,PER_DECADE`.
pub fn contour(s: &str) -> Result<Contour> {
    let parts: Vec<&str> = s.split(',').collect();
    let [beta, lo, hi, n] = parts[..] else {
        return bad(format!("contour spec `{s}` must be BETA,RMIN,RMAX,NPD"));
    };
    let n = n
        .trim()
        .parse()
        .or_else(|_| bad(format!("cannot parse nodes per decade `{n}`")))?;
    Contour::new(
        num(beta, "contour angle")?,
        num(lo, "r_min")?,
        num(hi, "r_max")?,
        n,
    )
}

/// `zero` or `const:V1,V2,..`, the constant cut off after `horizon`.
pub fn rhs(s: &str, grid: &Arc<LogGrid>, dim: usize, horizon: f64) -> Result<VectorFunction> {
    let s = s.trim();
    let value = if s == "zero" {
        vec![Complex64::new(0.0, 0.0); dim]
    } else if let Some(rest) = s.strip_prefix("const:") {
        vector(rest)?
    } else {
        return bad(format!(
            "right-hand side `{s}` must be zero or const:V1,V2,.."
        ));
    };
    if value.len() != dim {
        return bad(format!(
            "right-hand side has length {} but the operator has dimension {dim}",
            value.len()
        ));
    }
    let zero = vec![Complex64::new(0.0, 0.0); dim];
    let vals = grid
        .nodes()
        .iter()
        .map(|&t| {
            if t <= horizon {
                value.clone()
            } else {
                zero.clone()
            }
        })
        .collect();
    VectorFunction::new(grid.clone(), vals)
}

/// Random right-hand side, constant on each decade of `[t_min, horizon]`.
pub fn random_rhs(
    rng: &mut ChaCha8Rng,
    grid: &Arc<LogGrid>,
    dim: usize,
    horizon: f64,
) -> Result<VectorFunction> {
    let t0 = grid.t_min().log10().floor();
    let decades = (horizon.log10() - t0).ceil().max(1.0) as usize;
    let steps: Vec<Vec<Complex64>> = (0..decades)
        .map(|_| {
            (0..dim)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect()
        })
        .collect();
    let zero = vec![Complex64::new(0.0, 0.0); dim];
    let vals = grid
        .nodes()
        .iter()
        .map(|&t| {
            if t > horizon {
                return zero.clone();
            }
            let k = ((t.log10() - t0).floor().max(0.0) as usize).min(decades - 1);
            steps[k].clone()
        })
        .collect();
    VectorFunction::new(grid.clone(), vals)
}
