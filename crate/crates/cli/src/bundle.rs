//! Report bundles: a directory holding `manifest.json` and one JSON file per
//! check under `reports/`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use metric_lab::verify::{SharpnessConfig, SharpnessResult};
use metric_lab::{AhlforsCertificate, ConditionStatus, DoublingReport, InequalityReport, KernelAudit};
use serde::{Deserialize, Serialize};

use crate::config::PatternKind;
use crate::error::{config, CliError, CliResult};
use crate::runner::Outcome;

pub const MANIFEST: &str = "manifest.json";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EntryKind {
    Report,
    Sharpness,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    /// Relative to the bundle directory.
    pub file: String,
    pub kind: EntryKind,
    pub inequality_id: String,
    pub label: String,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateSummary {
    pub nu_hat: f64,
    pub c1_hat: f64,
    pub c2_hat: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub sample_count: usize,
    pub centers: usize,
}

impl From<&AhlforsCertificate> for CertificateSummary {
    fn from(c: &AhlforsCertificate) -> Self {
        CertificateSummary {
            nu_hat: c.nu_hat,
            c1_hat: c.c1_hat,
            c2_hat: c.c2_hat,
            r_min: c.r_min,
            r_max: c.r_max,
            sample_count: c.sample_count,
            centers: c.centers.len(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSummary {
    pub nu: f64,
    pub pattern: PatternKind,
    pub project: bool,
    pub audit: KernelAudit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub tool: String,
    /// SHA-256 of the effective config after command-line overrides.
    pub config_hash: String,
    pub seed: Option<u64>,
    pub tolerance_scale: f64,
    pub space: String,
    pub points: usize,
    pub certificate: CertificateSummary,
    /// The default window was too narrow and `[h, diam/2]` was used.
    pub window_fallback: bool,
    pub condition: ConditionStatus,
    pub doubling: DoublingReport,
    pub kernel: Option<KernelSummary>,
    pub entries: Vec<Entry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SharpnessRecord {
    pub target: SharpnessConfig,
    pub iterations: usize,
    pub seed: u64,
    pub result: SharpnessResult,
}

impl SharpnessRecord {
    pub fn summary_line(&self) -> String {
        format!(
            "sharpness [{}]: best ratio {:.6e}, initial {:.6e}, accepted {}/{}",
            self.target.which.id().as_str(),
            self.result.best_ratio,
            self.result.initial_ratio,
            self.result.accepted,
            self.iterations
        )
    }

    pub fn trace_csv(&self) -> String {
        let mut out = String::from("iteration,point,action,ratio,accepted\n");
        for t in &self.result.trace {
            let action = serde_json::to_value(t.action).ok().and_then(|v| v.as_str().map(String::from));
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                t.iteration,
                t.point,
                action.unwrap_or_default(),
                t.ratio,
                t.accepted
            );
        }
        out
    }
}

fn pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("bundle types serialize");
    s.push('\n');
    s
}

fn write(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(CliError::io(path))
}

/// Writes reports first and the manifest last; stale reports of an earlier
/// run in the same directory are removed.
pub fn write_bundle(dir: &Path, manifest: &Manifest, outcomes: &[Outcome]) -> CliResult<()> {
    let reports = dir.join("reports");
    if dir.join(MANIFEST).exists() && reports.is_dir() {
        fs::remove_dir_all(&reports).map_err(CliError::io(&reports))?;
    }
    fs::create_dir_all(&reports).map_err(CliError::io(&reports))?;
    for (entry, outcome) in manifest.entries.iter().zip(outcomes) {
        let text = match outcome {
            Outcome::Report(r) => {
                let mut s = r.to_json();
                s.push('\n');
                s
            }
            Outcome::Sharpness(s) => pretty(s),
        };
        write(&dir.join(&entry.file), &text)?;
    }
    write(&dir.join(MANIFEST), &pretty(manifest))
}

#[derive(Clone, Debug)]
pub enum Item {
    Report(InequalityReport),
    Sharpness(SharpnessRecord),
}

#[derive(Clone, Debug)]
pub struct Bundle {
    pub dir: PathBuf,
    pub manifest: Option<Manifest>,
    pub items: Vec<(Entry, Item)>,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(CliError::io(path))?;
    serde_json::from_str(&text).map_err(|e| config(format!("{}: {e}", path.display())))
}

/// Opens a bundle directory (or its manifest). A directory without a
/// manifest is an empty bundle.
pub fn load_bundle(path: &Path) -> CliResult<Bundle> {
    if !path.exists() {
        return Err(config(format!("{}: bundle not found", path.display())));
    }
    let dir = if path.is_file() {
        path.parent().map(Path::to_path_buf).unwrap_or_default()
    } else {
        path.to_path_buf()
    };
    let manifest_path = dir.join(MANIFEST);
    if !manifest_path.exists() {
        return Ok(Bundle { dir, manifest: None, items: Vec::new() });
    }
    let manifest: Manifest = read_json(&manifest_path)?;
    let mut items = Vec::with_capacity(manifest.entries.len());
    for entry in &manifest.entries {
        let p = dir.join(&entry.file);
        let item = match entry.kind {
            EntryKind::Report => Item::Report(read_json(&p)?),
            EntryKind::Sharpness => Item::Sharpness(read_json(&p)?),
        };
        items.push((entry.clone(), item));
    }
    Ok(Bundle { dir, manifest: Some(manifest), items })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    SummaryText,
}

fn stem(entry: &Entry) -> String {
    Path::new(&entry.file)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| entry.inequality_id.clone())
}

impl Bundle {
    /// One line per item; empty for an empty bundle.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for (_, item) in &self.items {
            let line = match item {
                Item::Report(r) => r.summary_line(),
                Item::Sharpness(s) => s.summary_line(),
            };
            out.push_str(&line);
            out.push('\n');
        }
        out
    }

    /// Writes the chosen format into `out` and returns the files written.
    pub fn emit(&self, format: Format, out: &Path) -> CliResult<Vec<PathBuf>> {
        fs::create_dir_all(out).map_err(CliError::io(out))?;
        let mut written = Vec::new();
        match format {
            Format::Json => {
                let reports: Vec<&InequalityReport> = self
                    .items
                    .iter()
                    .filter_map(|(_, i)| match i {
                        Item::Report(r) => Some(r),
                        Item::Sharpness(_) => None,
                    })
                    .collect();
                let p = out.join("reports.json");
                write(&p, &pretty(&reports))?;
                written.push(p);
            }
            Format::Csv => {
                for (entry, item) in &self.items {
                    let (p, text) = match item {
                        Item::Report(r) => (out.join(format!("{}.csv", stem(entry))), r.to_csv()),
                        Item::Sharpness(s) => (out.join(format!("{}.trace.csv", stem(entry))), s.trace_csv()),
                    };
                    write(&p, &text)?;
                    written.push(p);
                }
            }
            Format::SummaryText => {
                let p = out.join("summary.txt");
                write(&p, &self.summary())?;
                written.push(p);
            }
        }
        Ok(written)
    }
}
