use std::path::Path;
use std::sync::Arc;

use interplab_core::couples::{k_method_norm, trace_method_norm};
use interplab_core::hardy::{default_family, opnorm_lower};
use interplab_core::maxreg::{mr_constant_estimate, mr_seminorms, solve_cauchy};
use interplab_core::ri_spaces::{boyd_indices, default_dilation_family};
use interplab_core::sectorial::{
    calc_on, default_contour, dore_ratio, interp_norm_report, Contour, HolFunction,
};
use interplab_core::weights::classify;
use interplab_core::{
    CauchyProblem, Complex64, DenseMatrix, Error, HardyOp, LogGrid, Result, SampledFunction,
    SweepConfig, VecNorm, Weight,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::report::{emit_csv, ReportDocument};
use crate::specs;
use crate::{Command, WeightsCommand};

fn to_value(v: &impl Serialize) -> Value {
    serde_json::to_value(v).expect("report types serialise")
}

fn configure(doc: &mut ReportDocument, entries: Value) {
    if let (Value::Object(cfg), Value::Object(new)) = (&mut doc.config, entries) {
        cfg.extend(new);
    }
}

fn write_csv(curve: &[(f64, f64)], path: &Path) -> Result<()> {
    emit_csv(curve, path)
        .map_err(|e| Error::Parameter(format!("cannot write {}: {e}", path.display())))
}

fn matrix_json(m: &DenseMatrix) -> Value {
    let rows: Vec<Vec<[f64; 2]>> = m
        .rows()
        .iter()
        .map(|r| r.iter().map(|z| [z.re, z.im]).collect())
        .collect();
    json!(rows)
}

fn samples(xs: &Option<String>, n: usize, dim: usize, seed: u64) -> Result<Vec<Vec<Complex64>>> {
    match xs {
        Some(path) => specs::vectors(path),
        None => Ok(specs::unit_vectors(
            &mut ChaCha8Rng::seed_from_u64(seed),
            n,
            dim,
        )),
    }
}

/// Test functions from a CSV whose first column is `t`, held constant to the
/// next row and zero outside the listed range.
fn family_file(path: &str, grid: &Arc<LogGrid>) -> Result<Vec<SampledFunction>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parameter(format!("cannot read {path}: {e}")))?;
    let rows: Vec<Vec<f64>> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#') && !l.starts_with('t'))
        .map(|l| {
            l.split(',')
                .map(|x| {
                    x.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Parameter(format!("cannot parse `{x}` in {path}")))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let width = rows.first().map_or(0, Vec::len);
    if width < 2 || rows.iter().any(|r| r.len() != width) {
        return Err(Error::Parameter(format!(
            "{path} needs a t column and at least one function column"
        )));
    }
    let last = rows[rows.len() - 1][0];
    (1..width)
        .map(|j| {
            let vals = grid
                .nodes()
                .iter()
                .map(|&t| match rows.iter().rposition(|r| r[0] <= t) {
                    Some(i) if t <= last => rows[i][j],
                    _ => 0.0,
                })
                .collect();
            SampledFunction::new(grid.clone(), vals)
        })
        .collect()
}

fn dore_family(phi: f64) -> Vec<HolFunction> {
    let mut family: Vec<HolFunction> = (1..=8).map(HolFunction::mobius_power).collect();
    for tau in [-2.0, -1.5, -1.0, -0.5, -0.25, 0.0, 0.25, 0.5, 1.0, 1.5, 2.0] {
        family.push(HolFunction::imaginary_power(tau, phi));
    }
    family
}

pub fn run(cmd: &Command, grid: &Arc<LogGrid>, seed: u64, doc: &mut ReportDocument) -> Result<()> {
    match cmd {
        Command::Weights {
            action:
                WeightsCommand::Classify {
                    weight,
                    p,
                    decades,
                    csv,
                },
        } => {
            configure(doc, json!({ "weight": weight, "p": p, "decades": decades }));
            let w: Weight = weight.parse()?;
            let mut cfg = SweepConfig::default();
            if let Some(d) = decades {
                cfg.decades = *d;
            }
            let report = classify(&w, *p, &cfg)?;
            if let Some(prefix) = csv {
                for (label, class) in [
                    ("m_p", &report.m_p),
                    ("m_up", &report.m_up),
                    ("a_minus", &report.a_minus),
                    ("a_plus", &report.a_plus),
                ] {
                    write_csv(&class.sweep, &prefix.with_extension(format!("{label}.csv")))?;
                }
            }
            doc.results = to_value(&report);
        }
        Command::Hardy { op, space, family } => {
            configure(doc, json!({ "op": op, "space": space, "family": family }));
            let op: HardyOp = op.parse()?;
            let phi = specs::space(space)?;
            let fam = if family == "default" {
                default_family(op, &phi, grid.clone())?
            } else {
                family_file(family, grid)?
            };
            let report = opnorm_lower(op, &phi, &fam)?;
            doc.results = json!({
                "lower_bound": report.lower_bound,
                "analytic_upper": report.analytic_upper,
                "skipped": report.skipped(),
                "ratios": to_value(&report.ratios),
            });
        }
        Command::Knorm {
            couple,
            space,
            x,
            curve,
        } => {
            configure(doc, json!({ "couple": couple, "space": space, "x": x }));
            let c = specs::couple(couple)?;
            let phi = specs::space(space)?;
            let x = specs::vector(x)?;
            let k = k_method_norm(&c, &phi, &x, grid)?;
            let tr = trace_method_norm(&c, &phi, &x, grid)?;
            if let Some(path) = curve {
                let ks = c.k_curve(&x, grid.nodes())?;
                let pts: Vec<(f64, f64)> = grid
                    .nodes()
                    .iter()
                    .zip(&ks)
                    .map(|(&t, d)| (t, d.value))
                    .collect();
                write_csv(&pts, path)?;
            }
            doc.results = json!({
                "k_method_norm": to_value(&k),
                "trace_method_norm": to_value(&tr),
                "ratio": tr.value / k.value,
            });
        }
        Command::Calculus { a, f, contour } => {
            configure(doc, json!({ "A": a, "f": f, "contour": contour }));
            let op = specs::operator(a)?;
            let func = specs::function(f, op.working_angle())?;
            let c = match contour {
                None => default_contour(&func, &op)?,
                Some(spec) => specs::contour(spec)?,
            };
            let fa = calc_on(&func, &op, &c)?;
            let refined = Contour {
                per_decade: 2 * c.per_decade,
                ..c
            };
            let estimate = fa.sub(&calc_on(&func, &op, &refined)?).max_abs();
            doc.results = json!({
                "function": func.name(),
                "working_angle": op.working_angle(),
                "contour": { "beta": c.beta, "r_min": c.r_min, "r_max": c.r_max, "per_decade": c.per_decade },
                "matrix": matrix_json(&fa),
                "quadrature_estimate": estimate,
                "norm_2": fa.norm_2(),
            });
        }
        Command::InterpReport {
            a,
            space,
            xs,
            samples: n,
        } => {
            configure(
                doc,
                json!({ "A": a, "space": space, "xs": xs, "samples": n }),
            );
            let op = specs::operator(a)?;
            let phi = specs::space(space)?;
            let xs = samples(xs, *n, op.dim(), seed)?;
            doc.results = to_value(&interp_norm_report(&op, &phi, &xs, grid, &VecNorm::L2)?);
        }
        Command::Dore {
            a,
            space,
            family,
            xs,
            samples: n,
        } => {
            configure(
                doc,
                json!({ "A": a, "space": space, "family": family, "xs": xs, "samples": n }),
            );
            let op = specs::operator(a)?;
            let phi = specs::space(space)?;
            let xs = samples(xs, *n, op.dim(), seed)?;
            let fam = dore_family(op.working_angle());
            doc.results = to_value(&dore_ratio(&op, &phi, &fam, &xs, grid, &VecNorm::L2)?);
        }
        Command::Maxreg {
            a,
            space,
            f,
            x0,
            t,
            sweep,
            problems,
        } => {
            configure(
                doc,
                json!({ "A": a, "space": space, "f": f, "x0": x0, "T": t, "sweep": sweep, "problems": problems }),
            );
            let op = specs::operator(a)?;
            let phi = specs::space(space)?;
            let horizon = t.unwrap_or(grid.t_max());
            let x0 = match x0 {
                Some(s) => specs::vector(s)?,
                None => vec![Complex64::new(0.0, 0.0); op.dim()],
            };
            if *sweep {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let family = (0..*problems)
                    .map(|_| {
                        CauchyProblem::new(
                            op.clone(),
                            specs::random_rhs(&mut rng, grid, op.dim(), horizon)?,
                            x0.clone(),
                        )
                    })
                    .collect::<Result<Vec<_>>>()?;
                doc.results = to_value(&mr_constant_estimate(
                    &family,
                    &phi,
                    Some(horizon),
                    &VecNorm::L2,
                )?);
            } else {
                let p =
                    CauchyProblem::new(op.clone(), specs::rhs(f, grid, op.dim(), horizon)?, x0)?;
                let sol = solve_cauchy(&p)?;
                doc.results = to_value(&mr_seminorms(&p, &sol, &phi, Some(horizon), &VecNorm::L2)?);
            }
        }
        Command::Boyd { space, csv } => {
            configure(doc, json!({ "space": space }));
            let phi = specs::space(space)?;
            if phi.weight != Weight::one() {
                return Err(Error::Parameter(
                    "Boyd indices are computed for unweighted spaces".into(),
                ));
            }
            let ts: Vec<f64> = (-16..=16).map(|k| 10f64.powf(k as f64 / 4.0)).collect();
            let fam = default_dilation_family(&phi.base, grid.clone())?;
            let b = boyd_indices(&phi.base, &ts, &fam)?;
            if let Some(path) = csv {
                write_csv(&b.curve, path)?;
            }
            doc.results = to_value(&b);
        }
    }
    Ok(())
}
