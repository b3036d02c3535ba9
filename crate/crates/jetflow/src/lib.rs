//! Experiment harness around `jetflow-core`: configuration files, CSV and
//! manifest output, and the `jetflow` command line.

pub mod config;
pub mod experiments;
pub mod output;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

pub use config::{Config, ConfigError, Kind, Plan};
pub use experiments::Outcome;

/// Environment variable that overrides the configured output directory.
pub const OUTPUT_DIR_ENV: &str = "JETFLOW_OUTPUT_DIR";

#[derive(Debug)]
pub enum RunError {
    Config { path: Option<PathBuf>, error: ConfigError },
    Io { path: PathBuf, reason: String },
    /// Artifacts were written but some rows failed.
    Partial { output_dir: PathBuf, failed_rows: usize },
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config { error, .. } => write!(f, "invalid configuration: {error}"),
            RunError::Io { path, reason } => write!(f, "{}: {reason}", path.display()),
            RunError::Partial { output_dir, failed_rows } => {
                write!(f, "{failed_rows} row(s) failed; see {}", output_dir.display())
            }
        }
    }
}

impl std::error::Error for RunError {}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config { .. } => 2,
            RunError::Io { .. } => 1,
            RunError::Partial { .. } => 3,
        }
    }

    /// Machine-readable record printed on failure.
    pub fn to_json(&self) -> serde_json::Value {
        let body = match self {
            RunError::Config { path, error } => serde_json::json!({
                "kind": "config",
                "path": path.as_ref().map(|p| p.display().to_string()),
                "field": error.field,
                "reason": error.reason,
            }),
            RunError::Io { path, reason } => serde_json::json!({
                "kind": "io",
                "path": path.display().to_string(),
                "reason": reason,
            }),
            RunError::Partial { output_dir, failed_rows } => serde_json::json!({
                "kind": "pipeline",
                "path": output_dir.display().to_string(),
                "failed_rows": failed_rows,
                "reason": self.to_string(),
            }),
        };
        serde_json::json!({ "error": body })
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub output_dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub outcome: Outcome,
}

pub fn load_plan(path: &Path) -> Result<Plan, RunError> {
    let wrap = |error| RunError::Config { path: Some(path.to_path_buf()), error };
    Config::load(path).map_err(wrap)?.validate().map_err(wrap)
}

/// Output directory: the override if given, else the configured one, else `jetflow-out/<kind>`.
pub fn output_dir(plan: &Plan, override_dir: Option<&Path>) -> PathBuf {
    match (override_dir, &plan.config.output_dir) {
        (Some(dir), _) => dir.to_path_buf(),
        (None, Some(dir)) => dir.clone(),
        (None, None) => Path::new("jetflow-out").join(plan.kind.name()),
    }
}

/// Runs a validated plan and writes its tables, attachments and manifest.
pub fn execute(plan: &Plan, dir: &Path, config_path: Option<&Path>) -> Result<RunReport, RunError> {
    let io_err = |path: &Path, e: std::io::Error| RunError::Io { path: path.to_path_buf(), reason: e.to_string() };
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let outcome = experiments::run(plan);
    let mut files = Vec::new();
    for table in &outcome.tables {
        files.push(table.write_to(dir).map_err(|e| io_err(dir, e))?);
    }
    for (name, text) in &outcome.attachments {
        let path = dir.join(name);
        fs::write(&path, text).map_err(|e| io_err(&path, e))?;
        files.push(path);
    }
    let manifest = output::Manifest {
        tool: "jetflow",
        version: env!("CARGO_PKG_VERSION"),
        core_version: jetflow_core::VERSION,
        kind: plan.kind.name().into(),
        seed: plan.sampling.as_ref().map(|s| s.seed),
        config_path: config_path.map(|p| p.display().to_string()),
        config: serde_json::to_value(&plan.config).expect("configuration serializes"),
        created: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        files: files.iter().filter_map(|f| f.file_name().map(|n| n.to_string_lossy().into_owned())).collect(),
        status: if outcome.failed_rows == 0 { "ok".into() } else { "partial".into() },
        failed_rows: outcome.failed_rows,
    };
    files.push(output::write_manifest(dir, &manifest).map_err(|e| io_err(dir, e))?);
    if outcome.failed_rows > 0 {
        return Err(RunError::Partial { output_dir: dir.to_path_buf(), failed_rows: outcome.failed_rows });
    }
    Ok(RunReport { output_dir: dir.to_path_buf(), files, outcome })
}

/// `jetflow run`: load, validate, execute.
pub fn run_config(path: &Path, override_dir: Option<&Path>) -> Result<RunReport, RunError> {
    let plan = load_plan(path)?;
    let dir = output_dir(&plan, override_dir);
    execute(&plan, &dir, Some(path))
}
