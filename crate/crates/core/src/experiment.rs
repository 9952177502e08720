//! Declarative experiment cells, batch execution, aggregation and CSV/JSON output.
//!
//! A config is TOML: a few top-level options and one `[[cell]]` table per
//! benchmark cell. See the README for the full schema.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::engine::{run_batch, EngineConfig, RunTrace, DEFAULT_MAX_ROUNDS};
use crate::eprocess::{DEFAULT_PRIOR_WEIGHT, DEFAULT_TRUNCATION};
use crate::error::{Error, Result};
use crate::labeling::StoppingKind;
use crate::policy::{PolicyKind, DEFAULT_ALPHA};
use crate::reward::{BanditInstance, RewardKind};

pub const PRESETS: [&str; 4] = [
    "synthetic-k4",
    "synthetic-k10",
    "synthetic-k20",
    "dose-finding",
];

const DEFAULT_THRESHOLD: f64 = 0.5;
const DOSE_FINDING_MEANS: [f64; 5] = [0.36, 0.34, 0.469, 0.465, 0.537];

/// Mean vector and threshold for a named preset. `k4`, `k10`, `k20` and
/// `dose` are accepted as short names.
///
/// Synthetic presets hold one arm at each of `ξ + 0.1` and `ξ + 0.05`, the
/// rest split evenly between `ξ − 0.05` and `ξ − 0.1`.
pub fn preset_means(name: &str, threshold: Option<f64>) -> Result<(Vec<f64>, f64)> {
    let synthetic = |k: usize| {
        let xi = threshold.unwrap_or(DEFAULT_THRESHOLD);
        let bad = (k - 2) / 2;
        let mut means = vec![xi + 0.1, xi + 0.05];
        means.extend(std::iter::repeat_n(xi - 0.05, bad));
        means.extend(std::iter::repeat_n(xi - 0.1, bad));
        (means, xi)
    };
    match name {
        "synthetic-k4" | "k4" => Ok(synthetic(4)),
        "synthetic-k10" | "k10" => Ok(synthetic(10)),
        "synthetic-k20" | "k20" => Ok(synthetic(20)),
        "dose-finding" | "dose" => Ok((
            DOSE_FINDING_MEANS.to_vec(),
            threshold.unwrap_or(DEFAULT_THRESHOLD),
        )),
        other => Err(Error::UnknownPreset(other.to_string())),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    output: Option<PathBuf>,
    jobs: Option<usize>,
    #[serde(default)]
    exclude_mislabeled_from_times: bool,
    #[serde(default)]
    std_ddof: u8,
    #[serde(default)]
    json: bool,
    #[serde(default)]
    cell: Vec<RawCell>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCell {
    name: Option<String>,
    preset: Option<String>,
    means: Option<Vec<f64>>,
    k: Option<usize>,
    xi: Option<f64>,
    dgp: Option<String>,
    policy: Option<String>,
    alpha: Option<f64>,
    stopping: Option<String>,
    delta: Option<f64>,
    b: Option<f64>,
    prior_weight: Option<f64>,
    m: Option<usize>,
    reset_variant: Option<bool>,
    replications: Option<usize>,
    master_seed: Option<u64>,
    max_rounds: Option<u64>,
    log_actions: Option<bool>,
}

/// One validated benchmark cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellConfig {
    pub name: String,
    pub preset: Option<String>,
    pub dgp: RewardKind,
    pub engine: EngineConfig,
    pub replications: usize,
    pub master_seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub cells: Vec<CellConfig>,
    pub output: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub exclude_mislabeled_from_times: bool,
    /// Standard deviation denominator is `n − std_ddof`.
    pub std_ddof: u8,
    pub json: bool,
}

fn cell_err(cell: &str, reason: impl Into<String>) -> Error {
    Error::InvalidCell {
        cell: cell.to_string(),
        reason: reason.into(),
    }
}

fn wrap(cell: &str, e: Error) -> Error {
    match e {
        Error::InvalidParameter { field, reason } => {
            cell_err(cell, format!("invalid `{field}`: {reason}"))
        }
        other => other,
    }
}

impl RawCell {
    fn build(self, position: usize) -> Result<CellConfig> {
        let name = self.name.unwrap_or_else(|| format!("cell-{position}"));
        let n = name.as_str();

        let (means, xi) = match (&self.preset, self.means) {
            (Some(_), Some(_)) => {
                return Err(cell_err(n, "give either `preset` or `means`, not both"))
            }
            (Some(p), None) => preset_means(p, self.xi)?,
            (None, Some(m)) => (m, self.xi.unwrap_or(DEFAULT_THRESHOLD)),
            (None, None) => return Err(cell_err(n, "missing field `means` (or `preset`)")),
        };
        if let Some(k) = self.k {
            if k != means.len() {
                return Err(cell_err(
                    n,
                    format!("`k` = {k} but {} means were given", means.len()),
                ));
            }
        }
        let dgp = match self.dgp.as_deref().unwrap_or("bernoulli") {
            "bernoulli" | "bern" => RewardKind::Bernoulli,
            "mixture" | "mix" => RewardKind::Mixture,
            other => {
                return Err(cell_err(
                    n,
                    format!(
                        "invalid `dgp`: unknown kind `{other}` (expected bernoulli or mixture)"
                    ),
                ))
            }
        };
        let instance = BanditInstance::from_means(dgp, &means, xi).map_err(|e| wrap(n, e))?;

        let alpha = self.alpha.unwrap_or(DEFAULT_ALPHA);
        let policy = PolicyKind::from_name(self.policy.as_deref().unwrap_or("moss"), alpha)
            .map_err(|e| wrap(n, e))?;
        let stopping = StoppingKind::from_name(self.stopping.as_deref().unwrap_or("eprocess"))
            .map_err(|e| wrap(n, e))?;
        let delta = self
            .delta
            .ok_or_else(|| cell_err(n, "missing field `delta`"))?;
        let b = self.b.unwrap_or(DEFAULT_TRUNCATION);
        let replications = self
            .replications
            .ok_or_else(|| cell_err(n, "missing field `replications`"))?;
        if replications == 0 {
            return Err(cell_err(n, "invalid `replications`: must be at least 1"));
        }

        let k = instance.num_arms();
        let engine = EngineConfig::new(instance, policy, stopping, delta, b)
            .and_then(|e| e.with_target_good(self.m.unwrap_or(k)))
            .and_then(|e| e.with_max_rounds(self.max_rounds.unwrap_or(DEFAULT_MAX_ROUNDS)))
            .and_then(|e| e.with_prior_weight(self.prior_weight.unwrap_or(DEFAULT_PRIOR_WEIGHT)))
            .map_err(|e| wrap(n, e))?
            .with_reset_variant(self.reset_variant.unwrap_or(false))
            .with_action_log(self.log_actions.unwrap_or(false));

        Ok(CellConfig {
            name,
            preset: self.preset,
            dgp,
            engine,
            replications,
            master_seed: self.master_seed.unwrap_or(0),
        })
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if raw.cell.is_empty() {
            return Err(Error::Parse("config defines no `[[cell]]` tables".into()));
        }
        if raw.std_ddof > 1 {
            return Err(Error::Parse(format!(
                "`std_ddof` must be 0 or 1, got {}",
                raw.std_ddof
            )));
        }
        if raw.jobs == Some(0) {
            return Err(Error::Parse("`jobs` must be at least 1".into()));
        }
        let cells = raw
            .cell
            .into_iter()
            .enumerate()
            .map(|(i, c)| c.build(i))
            .collect::<Result<Vec<_>>>()?;
        let mut seen = HashSet::new();
        for c in &cells {
            if !seen.insert(c.name.as_str()) {
                return Err(Error::DuplicateCell(c.name.clone()));
            }
        }
        Ok(Self {
            cells,
            output: raw.output,
            jobs: raw.jobs,
            exclude_mislabeled_from_times: raw.exclude_mislabeled_from_times,
            std_ddof: raw.std_ddof,
            json: raw.json,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path.as_ref())?;
        Self::from_toml_str(&text)
    }

    /// Replaces every cell's master seed.
    pub fn override_seed(&mut self, seed: u64) {
        for c in &mut self.cells {
            c.master_seed = seed;
        }
    }
}

/// One row of the per-run CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub cell: String,
    pub run_id: usize,
    pub seed: u64,
    pub tau_g1: Option<u64>,
    pub tau_g2: Option<u64>,
    pub tau_stop: Option<u64>,
    pub regret_g1: Option<f64>,
    pub mislabeled: bool,
    pub truncated: bool,
    pub labels: String,
}

impl RunRecord {
    pub fn from_trace(cell: &str, run_id: usize, trace: &RunTrace) -> Self {
        Self {
            cell: cell.to_string(),
            run_id,
            seed: trace.seed,
            tau_g1: trace.tau_g(1),
            tau_g2: trace.tau_g(2),
            tau_stop: trace.tau_stop,
            regret_g1: trace.regret_at_tau_g1,
            mislabeled: trace.mislabeled,
            truncated: trace.truncated,
            labels: trace.label_string(),
        }
    }

    fn metric(&self, metric: Metric) -> Option<f64> {
        match metric {
            Metric::TauG1 => self.tau_g1.map(|v| v as f64),
            Metric::TauG2 => self.tau_g2.map(|v| v as f64),
            Metric::TauStop => self.tau_stop.map(|v| v as f64),
            Metric::RegretG1 => self.regret_g1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    TauG1,
    TauG2,
    TauStop,
    RegretG1,
}

impl Metric {
    pub const ALL: [Metric; 4] = [
        Metric::TauG1,
        Metric::TauG2,
        Metric::TauStop,
        Metric::RegretG1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::TauG1 => "tau_g1",
            Metric::TauG2 => "tau_g2",
            Metric::TauStop => "tau_stop",
            Metric::RegretG1 => "regret_g1",
        }
    }

    fn is_time(self) -> bool {
        self != Metric::RegretG1
    }
}

/// Mean and standard deviation of one metric over the runs of a cell.
/// Runs where the metric is undefined are left out; `mean` and `std` are
/// `None` when nothing is left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub cell: String,
    pub metric: Metric,
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub n_runs: usize,
    pub n_mislabeled: usize,
    pub n_truncated: usize,
}

/// Aggregates per-run records. The output is sorted by cell then metric and
/// does not depend on the order of `records`.
pub fn summarize(
    records: &[RunRecord],
    std_ddof: u8,
    exclude_mislabeled_from_times: bool,
) -> Vec<SummaryRow> {
    let mut cells: Vec<&str> = records.iter().map(|r| r.cell.as_str()).collect();
    cells.sort_unstable();
    cells.dedup();

    let mut rows = Vec::new();
    for cell in cells {
        let runs: Vec<&RunRecord> = records.iter().filter(|r| r.cell == cell).collect();
        let n_mislabeled = runs.iter().filter(|r| r.mislabeled).count();
        let n_truncated = runs.iter().filter(|r| r.truncated).count();
        for metric in Metric::ALL {
            let mut values: Vec<f64> = runs
                .iter()
                .filter(|r| !(exclude_mislabeled_from_times && metric.is_time() && r.mislabeled))
                .filter_map(|r| r.metric(metric))
                .collect();
            values.sort_by(f64::total_cmp);
            let (mean, std) = mean_std(&values, std_ddof);
            rows.push(SummaryRow {
                cell: cell.to_string(),
                metric,
                mean,
                std,
                n_runs: runs.len(),
                n_mislabeled,
                n_truncated,
            });
        }
    }
    rows
}

fn mean_std(values: &[f64], ddof: u8) -> (Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let denom = n - ddof as f64;
    let std = (denom > 0.0)
        .then(|| (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / denom).sqrt());
    (Some(mean), std)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub name: String,
    pub traces: Vec<RunTrace>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentOutput {
    pub records: Vec<RunRecord>,
    pub summaries: Vec<SummaryRow>,
    #[serde(skip)]
    pub cells: Vec<CellResult>,
}

/// Runs every cell on a pool of `jobs` workers (the rayon default when `None`).
pub fn execute(config: &ExperimentConfig, jobs: Option<usize>) -> Result<ExperimentOutput> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs.or(config.jobs) {
        builder = builder.num_threads(j);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Parse(format!("cannot start worker pool: {e}")))?;

    let cells: Vec<CellResult> = config
        .cells
        .iter()
        .map(|c| CellResult {
            name: c.name.clone(),
            traces: pool.install(|| run_batch(&c.engine, c.master_seed, c.replications)),
        })
        .collect();

    let records: Vec<RunRecord> = cells
        .iter()
        .flat_map(|c| {
            c.traces
                .iter()
                .enumerate()
                .map(|(i, t)| RunRecord::from_trace(&c.name, i, t))
        })
        .collect();
    let summaries = summarize(
        &records,
        config.std_ddof,
        config.exclude_mislabeled_from_times,
    );
    Ok(ExperimentOutput {
        records,
        summaries,
        cells,
    })
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn runs_csv(records: &[RunRecord]) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record([
        "cell",
        "run_id",
        "seed",
        "tau_g1",
        "tau_g2",
        "tau_stop",
        "regret_g1",
        "mislabeled",
        "truncated",
        "labels",
    ])?;
    for r in records {
        w.write_record([
            r.cell.clone(),
            r.run_id.to_string(),
            r.seed.to_string(),
            opt(r.tau_g1),
            opt(r.tau_g2),
            opt(r.tau_stop),
            opt(r.regret_g1),
            r.mislabeled.to_string(),
            r.truncated.to_string(),
            r.labels.clone(),
        ])?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

pub fn summary_csv(rows: &[SummaryRow]) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record([
        "cell",
        "metric",
        "mean",
        "std",
        "n_runs",
        "n_mislabeled",
        "n_truncated",
    ])?;
    for r in rows {
        w.write_record([
            r.cell.clone(),
            r.metric.name().to_string(),
            opt(r.mean),
            opt(r.std),
            r.n_runs.to_string(),
            r.n_mislabeled.to_string(),
            r.n_truncated.to_string(),
        ])?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

/// Paths written by [`write_outputs`].
#[derive(Debug, Clone, PartialEq)]
pub struct OutputPaths {
    pub runs: PathBuf,
    pub summary: PathBuf,
    pub json: Option<PathBuf>,
}

/// Writes `runs.csv`, `summary.csv` and optionally `results.json` into `dir`.
pub fn write_outputs(output: &ExperimentOutput, dir: &Path, json: bool) -> Result<OutputPaths> {
    let write = |path: PathBuf, bytes: &[u8]| -> Result<PathBuf> {
        fs::write(&path, bytes).map_err(|source| Error::Output {
            path: path.clone(),
            source,
        })?;
        Ok(path)
    };
    fs::create_dir_all(dir).map_err(|source| Error::Output {
        path: dir.to_path_buf(),
        source,
    })?;
    let runs = write(dir.join("runs.csv"), &runs_csv(&output.records)?)?;
    let summary = write(dir.join("summary.csv"), &summary_csv(&output.summaries)?)?;
    let json = if json {
        let mut bytes = serde_json::to_vec_pretty(output)?;
        bytes.push(b'\n');
        Some(write(dir.join("results.json"), &bytes)?)
    } else {
        None
    };
    Ok(OutputPaths {
        runs,
        summary,
        json,
    })
}
