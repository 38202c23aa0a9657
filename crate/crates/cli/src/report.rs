use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

/// JSON document written by every subcommand.
#[derive(Debug, Serialize)]
pub struct ReportDocument {
    pub command: Vec<String>,
    pub config: Value,
    pub results: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<Value>,
    pub version: &'static str,
    pub seed: u64,
}

impl ReportDocument {
    pub fn new(command: Vec<String>, config: Value, seed: u64) -> Self {
        Self {
            command,
            config,
            results: json!({}),
            error: None,
            version: env!("CARGO_PKG_VERSION"),
            seed,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report values are serialisable");
        s.push('\n');
        s
    }
}

/// Two-column `t,value` CSV with 17 significant digits.
pub fn csv_text(curve: &[(f64, f64)]) -> String {
    let mut out = String::from("t,value\n");
    for (t, v) in curve {
        writeln!(out, "{t:.16e},{v:.16e}").expect("writing to a String cannot fail");
    }
    out
}

pub fn emit_csv(curve: &[(f64, f64)], path: &Path) -> std::io::Result<()> {
    std::fs::File::create(path)?.write_all(csv_text(curve).as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_curve_is_header_only() {
        assert_eq!(csv_text(&[]), "t,value\n");
    }

    #[test]
    fn values_keep_seventeen_digits() {
        let text = csv_text(&[(0.1, 1.0 / 3.0)]);
        let row = text.lines().nth(1).unwrap();
        let (t, v) = row.split_once(',').unwrap();
        assert_eq!(t.parse::<f64>().unwrap(), 0.1);
        assert_eq!(v.parse::<f64>().unwrap(), 1.0 / 3.0);
    }

    #[test]
    fn document_is_reproducible() {
        let mk = || {
            let mut d =
                ReportDocument::new(vec!["boyd".into()], json!({"b": 1, "a": [1.5, 2.0]}), 42);
            d.results = json!({"z": 0.1, "y": null});
            d.to_json()
        };
        assert_eq!(mk(), mk());
    }
}
