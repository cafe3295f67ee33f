use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use serde::{Deserialize, Serialize};
use stardisc::inverse::InverseStats;
use stardisc::optimizer::GenerationStats;
use stardisc::BoundKind;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] stardisc::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        use stardisc::Error as E;
        let code = match self {
            CliError::Usage(_) | CliError::Core(E::InvalidConfig(_)) => 2,
            CliError::Core(
                E::Parse { .. }
                | E::Vector { .. }
                | E::InvalidPermutation { .. }
                | E::InvalidGenotype(_)
                | E::DimensionMismatch { .. },
            ) => 3,
            CliError::Json(e) if !e.is_io() => 3,
            CliError::Core(E::BudgetExceeded { .. }) => 4,
            _ => 1,
        };
        ExitCode::from(code)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(e.into())
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Source {
    Optimized,
    IdentityHalton,
    Loaded,
}

/// One row of a results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub d: usize,
    pub n: usize,
    pub discrepancy: f64,
    pub kind: BoundKind,
    pub source: Source,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedRecord {
    pub rank: usize,
    pub d: usize,
    pub n: usize,
    pub discrepancy: f64,
    pub kind: BoundKind,
    pub source: Source,
    /// Fitness the optimizer held before the final re-scoring.
    pub recorded: f64,
    pub vector: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoRow {
    pub n: usize,
    pub discrepancy: f64,
    pub kind: BoundKind,
    pub vector: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalCheckRow {
    pub n: usize,
    pub recorded: f64,
    pub rescored: f64,
    pub kind: BoundKind,
    pub meets_epsilon: bool,
    pub previous_fails: Option<bool>,
}

/// Everything needed to repeat a run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Arguments as given, with defaults filled in.
    pub args: serde_json::Value,
    /// Resolved configuration handed to the library.
    pub config: serde_json::Value,
    pub seed: u64,
    pub started: String,
    pub finished: String,
    pub artifacts: Vec<String>,
}

/// A CSV row type with a fixed column list.
pub trait Row: Serialize {
    const HEADER: &'static [&'static str];
}

impl Row for ResultRecord {
    const HEADER: &'static [&'static str] = &["d", "n", "discrepancy", "kind", "source"];
}

impl Row for RankedRecord {
    const HEADER: &'static [&'static str] = &[
        "rank",
        "d",
        "n",
        "discrepancy",
        "kind",
        "source",
        "recorded",
        "vector",
    ];
}

impl Row for ParetoRow {
    const HEADER: &'static [&'static str] = &["n", "discrepancy", "kind", "vector"];
}

impl Row for FinalCheckRow {
    const HEADER: &'static [&'static str] = &[
        "n",
        "recorded",
        "rescored",
        "kind",
        "meets_epsilon",
        "previous_fails",
    ];
}

impl Row for GenerationStats {
    const HEADER: &'static [&'static str] = &["generation", "best", "mean", "evaluations"];
}

impl Row for InverseStats {
    const HEADER: &'static [&'static str] = &[
        "generation",
        "archive_size",
        "min_n",
        "feasible",
        "evaluations",
    ];
}

pub const MANIFEST: &str = "manifest.json";

pub fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

/// Collects the files written into a run directory.
pub struct RunDir {
    root: PathBuf,
    artifacts: Vec<String>,
}

impl RunDir {
    pub fn create(root: &Path) -> CliResult<Self> {
        fs::create_dir_all(root)?;
        Ok(Self {
            root: root.to_path_buf(),
            artifacts: Vec::new(),
        })
    }

    /// Absolute path for `name`, recording it as an artifact.
    pub fn path(&mut self, name: &str) -> CliResult<PathBuf> {
        let p = self.root.join(name);
        if let Some(parent) = p.parent() {
            fs::create_dir_all(parent)?;
        }
        self.artifacts.push(name.to_string());
        Ok(p)
    }

    pub fn write_csv<T: Row>(&mut self, name: &str, rows: &[T]) -> CliResult<()> {
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_path(self.path(name)?)?;
        w.write_record(T::HEADER)?;
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        fs::write(self.path(name)?, text)?;
        Ok(())
    }

    pub fn finish(self, mut manifest: RunManifest) -> CliResult<()> {
        manifest.artifacts = self.artifacts;
        manifest.finished = now();
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        fs::write(self.root.join(MANIFEST), text)?;
        Ok(())
    }
}
