use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::law::PiecewiseLaw;
use crate::error::{param, Error, Result};
use crate::numerics::{PowerLaw, SampledFunction};

/// A positive, locally integrable weight on `(0, ∞)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Weight {
    /// `t^α`.
    Power {
        alpha: f64,
    },
    /// `t^α` on `(0, 1)`, `t^β` on `[1, ∞)`.
    PiecewisePower {
        alpha: f64,
        beta: f64,
    },
    /// Tabulated values, step-interpolated, with fitted power-law tails.
    Explicit {
        nodes: Vec<f64>,
        values: Vec<f64>,
        head: PowerLaw,
        tail: PowerLaw,
    },
    Product(Vec<Weight>),
    /// `c · w(t)`.
    Scaled {
        factor: f64,
        inner: Box<Weight>,
    },
    /// `w(λ t)`.
    Dilated {
        factor: f64,
        inner: Box<Weight>,
    },
    /// `w(t)^r`.
    Powered {
        exponent: f64,
        inner: Box<Weight>,
    },
}

impl Default for Weight {
    fn default() -> Self {
        Weight::Power { alpha: 0.0 }
    }
}

impl Weight {
    pub fn one() -> Self {
        Weight::Power { alpha: 0.0 }
    }

    pub fn power(alpha: f64) -> Self {
        Weight::Power { alpha }
    }

    pub fn piecewise_power(alpha: f64, beta: f64) -> Self {
        Weight::PiecewisePower { alpha, beta }
    }

    /// Tabulated weight; nodes strictly increasing and values positive.
    pub fn explicit(nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 || nodes.len() != values.len() {
            return param("explicit weight needs at least two (t, w) pairs of equal length");
        }
        if nodes[0] <= 0.0 || nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return param("explicit weight nodes must be positive and strictly increasing");
        }
        if values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return param("explicit weight values must be positive and finite");
        }
        let window = |from_start: bool| -> (Vec<f64>, Vec<f64>) {
            let idx: Vec<usize> = if from_start {
                let cut = nodes[0] * 10.0;
                (0..nodes.len())
                    .filter(|&i| nodes[i] <= cut * (1.0 + 1e-12))
                    .collect()
            } else {
                let cut = nodes[nodes.len() - 1] / 10.0;
                (0..nodes.len())
                    .filter(|&i| nodes[i] >= cut * (1.0 - 1e-12))
                    .collect()
            };
            let idx = if idx.len() < 2 {
                if from_start {
                    vec![0, 1]
                } else {
                    vec![nodes.len() - 2, nodes.len() - 1]
                }
            } else {
                idx
            };
            (
                idx.iter().map(|&i| nodes[i]).collect(),
                idx.iter().map(|&i| values[i]).collect(),
            )
        };
        let (ht, hv) = window(true);
        let (tt, tv) = window(false);
        let head = PowerLaw::fit(&ht, &hv, nodes[0]);
        let tail = PowerLaw::fit(&tt, &tv, nodes[nodes.len() - 1]);
        Ok(Weight::Explicit {
            nodes,
            values,
            head,
            tail,
        })
    }

    pub fn from_sampled(f: &SampledFunction) -> Result<Self> {
        Self::explicit(f.grid().nodes().to_vec(), f.values().to_vec())
    }

    /// Two-column `t,w` CSV; a non-numeric first line is skipped as a header.
    pub fn from_csv_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Parameter(format!("cannot read weight file {}: {e}", path.display()))
        })?;
        let mut nodes = Vec::new();
        let mut values = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line
                .split([',', ' ', '\t'])
                .filter(|s| !s.is_empty())
                .collect();
            let parsed: Option<(f64, f64)> = match cols.as_slice() {
                [a, b] => a.parse().ok().zip(b.parse().ok()),
                _ => None,
            };
            match parsed {
                Some((t, w)) => {
                    nodes.push(t);
                    values.push(w);
                }
                None if lineno == 0 => continue,
                None => return param(format!("weight file line {}: expected `t,w`", lineno + 1)),
            }
        }
        Self::explicit(nodes, values)
    }

    pub fn times(&self, other: &Weight) -> Weight {
        Weight::Product(vec![self.clone(), other.clone()])
    }

    pub fn powered(&self, r: f64) -> Weight {
        Weight::Powered {
            exponent: r,
            inner: Box::new(self.clone()),
        }
    }

    pub fn dilated(&self, lambda: f64) -> Weight {
        Weight::Dilated {
            factor: lambda,
            inner: Box::new(self.clone()),
        }
    }

    /// Normal form as a piecewise power law.
    pub fn law(&self) -> PiecewiseLaw {
        match self {
            Weight::Power { alpha } => PiecewiseLaw::power(1.0, *alpha),
            Weight::PiecewisePower { alpha, beta } => PiecewiseLaw::new(
                vec![1.0],
                vec![
                    PowerLaw {
                        coeff: 1.0,
                        exponent: *alpha,
                    },
                    PowerLaw {
                        coeff: 1.0,
                        exponent: *beta,
                    },
                ],
            ),
            Weight::Explicit {
                nodes,
                values,
                head,
                tail,
            } => PiecewiseLaw::from_steps(nodes, values, *head, *tail),
            Weight::Product(ws) => ws
                .iter()
                .fold(PiecewiseLaw::power(1.0, 0.0), |acc, w| acc.mul(&w.law())),
            Weight::Scaled { factor, inner } => inner.law().scale(*factor),
            Weight::Dilated { factor, inner } => inner.law().dilate(*factor),
            Weight::Powered { exponent, inner } => inner.law().powf(*exponent),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.law().eval(t)
    }

    /// `∫_a^b w`, possibly `+∞` when `a = 0` or `b = ∞`.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        self.law().integral(a, b)
    }

    /// Whether any factor is tabulated, so that its asymptotics are fitted
    /// rather than exact.
    pub fn is_fitted(&self) -> bool {
        match self {
            Weight::Explicit { .. } => true,
            Weight::Product(ws) => ws.iter().any(Weight::is_fitted),
            Weight::Scaled { inner, .. }
            | Weight::Dilated { inner, .. }
            | Weight::Powered { inner, .. } => inner.is_fitted(),
            _ => false,
        }
    }

    /// Exponents of the power-law behaviour at 0 and at ∞.
    pub fn asymptotic_exponents(&self) -> (f64, f64) {
        let law = self.law();
        (law.exponent_at_zero(), law.exponent_at_infinity())
    }

    /// Whether the weight is nonincreasing (decided on the normal form).
    pub fn is_nonincreasing(&self) -> bool {
        self.monotone(|a, b| b <= a * (1.0 + 1e-12))
    }

    pub fn is_nondecreasing(&self) -> bool {
        self.monotone(|a, b| b >= a * (1.0 - 1e-12))
    }

    fn monotone(&self, ok: impl Fn(f64, f64) -> bool) -> bool {
        let law = self.law();
        let pieces = law.pieces();
        let breaks = law.breaks();
        let sign_ok = |e: f64| ok(1.0, 2f64.powf(e));
        if !pieces.iter().all(|p| sign_ok(p.exponent)) {
            return false;
        }
        breaks
            .iter()
            .enumerate()
            .all(|(k, &b)| ok(pieces[k].eval(b), pieces[k + 1].eval(b)))
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weight::Power { alpha } => write!(f, "pow:{alpha}"),
            Weight::PiecewisePower { alpha, beta } => write!(f, "pp:{alpha},{beta}"),
            Weight::Explicit { nodes, .. } => write!(f, "explicit[{} nodes]", nodes.len()),
            Weight::Product(ws) => {
                let parts: Vec<String> = ws.iter().map(|w| w.to_string()).collect();
                write!(f, "({})", parts.join(" * "))
            }
            Weight::Scaled { factor, inner } => write!(f, "{factor}*{inner}"),
            Weight::Dilated { factor, inner } => write!(f, "{inner}({factor}t)"),
            Weight::Powered { exponent, inner } => write!(f, "({inner})^{exponent}"),
        }
    }
}

fn parse_num(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::Parameter(format!("cannot parse {what} `{s}`")))
}

impl FromStr for Weight {
    type Err = Error;

    /// `pow:ALPHA`, `pp:ALPHA,BETA`, `file:PATH`, or `one`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "one" || s == "1" {
            return Ok(Weight::one());
        }
        let (kind, rest) = s.split_once(':').ok_or_else(|| {
            Error::Parameter(format!(
                "weight spec `{s}` must look like pow:A, pp:A,B or file:PATH"
            ))
        })?;
        match kind {
            "pow" => Ok(Weight::power(parse_num(rest, "weight exponent")?)),
            "pp" => {
                let (a, b) = rest.split_once(',').ok_or_else(|| {
                    Error::Parameter(format!("pp weight needs two exponents, got `{rest}`"))
                })?;
                Ok(Weight::piecewise_power(
                    parse_num(a, "weight exponent")?,
                    parse_num(b, "weight exponent")?,
                ))
            }
            "file" => Weight::from_csv_file(Path::new(rest)),
            _ => param(format!("unknown weight kind `{kind}`")),
        }
    }
}
