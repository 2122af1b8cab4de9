use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::config::Format;

pub const TABLE_HEADER: &str = "eps_stokes_table v1";

pub const COLUMNS: [&str; 10] = [
    "problem",
    "n",
    "eps",
    "err_u_H1_vs_S",
    "err_u_L2_vs_S",
    "err_p_L2R_vs_S",
    "err_u_H1_vs_PP",
    "err_p_H1_vs_PP",
    "div_u_L2",
    "trace_mismatch_L2Γ",
];

/// One solve measured against the exact Stokes solution of the case (`vs_S`)
/// and against the discrete PP solution on the same mesh (`vs_PP`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub problem: String,
    pub n: usize,
    /// Only set for ES rows.
    pub eps: Option<f64>,
    pub err_u_h1_vs_s: f64,
    pub err_u_l2_vs_s: f64,
    pub err_p_l2r_vs_s: f64,
    pub err_u_h1_vs_pp: f64,
    pub err_p_h1_vs_pp: f64,
    pub div_u_l2: f64,
    pub trace_mismatch: f64,
}

impl ErrorRow {
    fn values(&self) -> [f64; 7] {
        [
            self.err_u_h1_vs_s,
            self.err_u_l2_vs_s,
            self.err_p_l2r_vs_s,
            self.err_u_h1_vs_pp,
            self.err_p_h1_vs_pp,
            self.div_u_l2,
            self.trace_mismatch,
        ]
    }
}

/// Fitted log-log slope of one column against the mesh size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRecord {
    pub problem: String,
    pub eps: Option<f64>,
    pub column: String,
    pub slope: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ErrorTable {
    pub rows: Vec<ErrorRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rates: Vec<RateRecord>,
}

fn opt(v: Option<f64>) -> String {
    v.map(|e| format!("{e:e}")).unwrap_or_default()
}

impl ErrorTable {
    pub fn check_invariants(&self) -> Result<()> {
        for row in &self.rows {
            if let Some(v) = row.values().iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
                return Err(Error::InvalidArgument(format!(
                    "table entry {v} for {} n={} is not a finite nonnegative number",
                    row.problem, row.n
                )));
            }
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!("{TABLE_HEADER}\n{}\n", COLUMNS.join(","));
        for r in &self.rows {
            let _ = write!(s, "{},{},{}", r.problem, r.n, opt(r.eps));
            for v in r.values() {
                let _ = write!(s, ",{v:e}");
            }
            s.push('\n');
        }
        for r in &self.rates {
            let _ = writeln!(s, "#rate,{},{},{},{:e}", r.problem, opt(r.eps), r.column, r.slope);
        }
        s
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Doc<'a> {
            schema: &'a str,
            #[serde(flatten)]
            table: &'a ErrorTable,
        }
        let doc = Doc {
            schema: TABLE_HEADER,
            table: self,
        };
        serde_json::to_string_pretty(&doc).expect("table serialization cannot fail") + "\n"
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    pub fn write(&self, path: &Path, format: Format) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, self.render(format))?;
        Ok(())
    }

    /// Parses the CSV produced by [`to_csv`](Self::to_csv).
    pub fn from_csv(text: &str) -> Result<Self> {
        let bad = |line: usize, message: String| Error::Parse {
            path: "<table>".into(),
            line,
            message,
        };
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, TABLE_HEADER)) => {}
            _ => return Err(bad(1, format!("expected header `{TABLE_HEADER}`"))),
        }
        match lines.next() {
            Some((_, cols)) if cols == COLUMNS.join(",") => {}
            _ => return Err(bad(2, "unexpected column line".into())),
        }
        let num = |line: usize, s: &str| s.parse::<f64>().map_err(|e| bad(line, format!("`{s}`: {e}")));
        let opt_num = |line: usize, s: &str| if s.is_empty() { Ok(None) } else { num(line, s).map(Some) };
        let mut table = ErrorTable::default();
        for (i, line) in lines {
            let f: Vec<&str> = line.split(',').collect();
            if let Some(rest) = line.strip_prefix("#rate,") {
                let f: Vec<&str> = rest.split(',').collect();
                if f.len() != 4 {
                    return Err(bad(i + 1, "rate record needs 4 fields".into()));
                }
                table.rates.push(RateRecord {
                    problem: f[0].into(),
                    eps: opt_num(i + 1, f[1])?,
                    column: f[2].into(),
                    slope: num(i + 1, f[3])?,
                });
                continue;
            }
            if f.len() != COLUMNS.len() {
                return Err(bad(
                    i + 1,
                    format!("expected {} fields, got {}", COLUMNS.len(), f.len()),
                ));
            }
            let v: Vec<f64> = f[3..].iter().map(|s| num(i + 1, s)).collect::<Result<_>>()?;
            table.rows.push(ErrorRow {
                problem: f[0].into(),
                n: f[1].parse().map_err(|e| bad(i + 1, format!("n: {e}")))?,
                eps: opt_num(i + 1, f[2])?,
                err_u_h1_vs_s: v[0],
                err_u_l2_vs_s: v[1],
                err_p_l2r_vs_s: v[2],
                err_u_h1_vs_pp: v[3],
                err_p_h1_vs_pp: v[4],
                div_u_l2: v[5],
                trace_mismatch: v[6],
            });
        }
        Ok(table)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(eps: Option<f64>, x: f64) -> ErrorRow {
        ErrorRow {
            problem: if eps.is_some() { "ES" } else { "S" }.into(),
            n: 8,
            eps,
            err_u_h1_vs_s: x,
            err_u_l2_vs_s: x / 3.0,
            err_p_l2r_vs_s: 0.1,
            err_u_h1_vs_pp: 0.0,
            err_p_h1_vs_pp: 1e-300,
            div_u_l2: 2.5e-7,
            trace_mismatch: 2f64.sqrt(),
        }
    }

    #[test]
    fn csv_layout_and_round_trip() {
        let t = ErrorTable {
            rows: vec![row(None, 1.0 / 7.0), row(Some(1e-3), 0.123456789)],
            rates: vec![RateRecord {
                problem: "S".into(),
                eps: None,
                column: "err_u_H1_vs_S".into(),
                slope: 1.9876,
            }],
        };
        let csv = t.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("eps_stokes_table v1"));
        assert_eq!(
            lines.next(),
            Some("problem,n,eps,err_u_H1_vs_S,err_u_L2_vs_S,err_p_L2R_vs_S,err_u_H1_vs_PP,err_p_H1_vs_PP,div_u_L2,trace_mismatch_L2Γ")
        );
        assert!(lines.next().unwrap().starts_with("S,8,,"));
        assert!(lines.next().unwrap().starts_with("ES,8,1e-3,"));
        assert_eq!(ErrorTable::from_csv(&csv).unwrap(), t);
    }

    #[test]
    fn json_carries_schema() {
        let t = ErrorTable {
            rows: vec![row(Some(2.0), 0.5)],
            rates: vec![],
        };
        let v: serde_json::Value = serde_json::from_str(&t.to_json()).unwrap();
        assert_eq!(v["schema"], TABLE_HEADER);
        assert_eq!(v["rows"][0]["eps"], 2.0);
        assert!(v.get("rates").is_none());
    }

    #[test]
    fn invariants_reject_nan() {
        let mut t = ErrorTable {
            rows: vec![row(None, 1.0)],
            rates: vec![],
        };
        t.check_invariants().unwrap();
        t.rows[0].div_u_l2 = f64::NAN;
        assert!(t.check_invariants().is_err());
    }
}
