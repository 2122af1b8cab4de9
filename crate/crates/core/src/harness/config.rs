use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problems::ProblemKind;
use crate::sparse::{DEFAULT_TOL, MIN_TOL};
use crate::verification::{find_case, ManufacturedCase};

/// Which problems a run solves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProblemSelection {
    S,
    PP,
    ES,
    #[serde(rename = "all", alias = "ALL", alias = "All")]
    All,
}

impl ProblemSelection {
    pub fn includes(self, kind: ProblemKind) -> bool {
        match self {
            ProblemSelection::S => kind == ProblemKind::S,
            ProblemSelection::PP => kind == ProblemKind::PP,
            ProblemSelection::ES => kind == ProblemKind::ES,
            ProblemSelection::All => true,
        }
    }
}

impl FromStr for ProblemSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "S" => Ok(ProblemSelection::S),
            "PP" => Ok(ProblemSelection::PP),
            "ES" => Ok(ProblemSelection::ES),
            "ALL" => Ok(ProblemSelection::All),
            _ => Err(Error::Config(format!(
                "unknown problem `{s}` (expected S, PP, ES or all)"
            ))),
        }
    }
}

impl fmt::Display for ProblemSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProblemSelection::S => "S",
            ProblemSelection::PP => "PP",
            ProblemSelection::ES => "ES",
            ProblemSelection::All => "all",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::Config(format!("unknown format `{s}` (expected csv or json)"))),
        }
    }
}

/// 13 log-spaced values `1e-6, 1e-5, ..., 1e6`.
pub fn default_eps_grid() -> Vec<f64> {
    (-6..=6).map(|k| 10f64.powi(k)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub case: String,
    pub problem: ProblemSelection,
    pub n: Vec<usize>,
    pub eps: Vec<f64>,
    /// Overrides the case's trace perturbation amplitude.
    pub delta: Option<f64>,
    pub out: Option<PathBuf>,
    pub tol: f64,
    pub format: Format,
    /// Directory for MatrixMarket dumps of every assembled system.
    pub dump_matrix: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            case: "MS1".into(),
            problem: ProblemSelection::All,
            n: vec![32],
            eps: default_eps_grid(),
            delta: None,
            out: None,
            tol: DEFAULT_TOL,
            format: Format::Csv,
            dump_matrix: None,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n.is_empty() {
            return Err(Error::Config("n-list is empty".into()));
        }
        if let Some(&n) = self.n.iter().find(|&&n| n < 2) {
            return Err(Error::Config(format!("n must be at least 2, got {n}")));
        }
        if self.eps.is_empty() {
            return Err(Error::Config("epsilon list is empty".into()));
        }
        if let Some(e) = self.eps.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
            return Err(Error::Config(format!("epsilon must be positive and finite, got {e}")));
        }
        if self.eps.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("epsilon list must be strictly ascending".into()));
        }
        if let Some(d) = self.delta {
            if !(d.is_finite() && d >= 0.0) {
                return Err(Error::Config(format!("delta must be nonnegative, got {d}")));
            }
        }
        if !(self.tol.is_finite() && self.tol >= MIN_TOL) {
            return Err(Error::Config(format!(
                "tolerance must be at least {MIN_TOL:e}, got {}",
                self.tol
            )));
        }
        find_case(&self.case)?;
        Ok(())
    }

    /// Registry case with the configured `delta` applied.
    pub fn manufactured_case(&self) -> Result<ManufacturedCase> {
        let case = find_case(&self.case)?;
        Ok(match self.delta {
            Some(d) => case.with_delta(d),
            None => case,
        })
    }
}
