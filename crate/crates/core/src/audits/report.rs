use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::evolution::{csv_err, fmt_f64};

/// A named value with the arguments attaining it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extremal {
    pub label: String,
    pub value: f64,
    pub at: Vec<(String, f64)>,
}

impl Extremal {
    pub fn new(label: impl Into<String>, value: f64, at: &[(&str, f64)]) -> Self {
        Extremal {
            label: label.into(),
            value,
            at: at.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Table {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| fmt_cell(*v)))
                .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Integers print as integers, everything else with 17 significant digits.
pub fn fmt_cell(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 9.0e15 {
        format!("{}", v as i64)
    } else {
        fmt_f64(v)
    }
}

/// One named sub-criterion of an audit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub name: String,
    pub params: Value,
    pub extremals: Vec<Extremal>,
    pub tables: Vec<Table>,
    pub checks: Vec<Check>,
    pub verdict: String,
    pub pass: bool,
    /// Wall time, only when requested; `null` keeps reruns byte-identical.
    pub runtime_seconds: Option<f64>,
}

impl AuditReport {
    pub fn new(name: impl Into<String>, params: impl Serialize) -> Self {
        AuditReport {
            name: name.into(),
            params: serde_json::to_value(params).expect("parameters serialise"),
            extremals: Vec::new(),
            tables: Vec::new(),
            checks: Vec::new(),
            verdict: String::new(),
            pass: true,
            runtime_seconds: None,
        }
    }

    pub fn check(&mut self, name: impl Into<String>, pass: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            pass,
            detail: detail.into(),
        });
        self.pass &= pass;
    }

    pub fn check_named(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn extremal(&self, label: &str) -> Option<&Extremal> {
        self.extremals.iter().find(|e| e.label == label)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    /// Writes `<name>.json` and `<name>_<table>.csv` under `dir`; returns the paths.
    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut paths = Vec::new();
        let json = dir.join(format!("{}.json", self.name));
        fs::write(&json, self.to_json() + "\n")?;
        paths.push(json);
        for t in &self.tables {
            let p = dir.join(format!("{}_{}.csv", self.name, t.name));
            let f = fs::File::create(&p)?;
            t.write_csv(std::io::BufWriter::new(f))?;
            paths.push(p);
        }
        Ok(paths)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Input(e.to_string()))
    }
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// `|b/a − 1|`.
pub fn rel_change(a: f64, b: f64) -> f64 {
    (b / a - 1.0).abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 0.5 * v - 2.0).collect();
        assert!((fit_slope(&x, &y) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn json_round_trip_and_cells() {
        let mut r = AuditReport::new("demo", serde_json::json!({"b": 1, "a": 0.5}));
        let mut t = Table::new("t", &["n", "v"]);
        t.push(vec![3.0, 0.1]);
        r.tables.push(t);
        r.check("ok", true, "");
        let back = AuditReport::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
        // keys come out sorted
        assert!(r.to_json().find("\"a\"").unwrap() < r.to_json().find("\"b\"").unwrap());
        assert_eq!(fmt_cell(3.0), "3");
        assert_eq!(fmt_cell(0.1), "1.0000000000000001e-1");
        assert!(r.to_json().contains("\"runtime_seconds\": null"));
    }
}
