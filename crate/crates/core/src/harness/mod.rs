//! Configuration, orchestration, seeding and persistence of experiments.

pub mod config;
pub mod experiments;
pub mod seed;

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use config::{Experiment, ExperimentConfig, OutputFormat};
pub use experiments::{Artifact, GUE_TAG, POISSON_TAG};
pub use seed::seed_substream;

use crate::error::{Error, Result};
use crate::stats::StatReport;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const MANIFEST_FILE: &str = "manifest.json";

/// Everything one run produced.
#[derive(Debug, Clone)]
pub struct ResultRecord {
    pub config: ExperimentConfig,
    pub report: StatReport,
    pub wall_time: f64,
    pub version: String,
    pub threads: usize,
    /// `seed_substream(seed, t)` for every trial `t`.
    pub substream_keys: Vec<u64>,
    pub artifacts: Vec<Artifact>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config: ExperimentConfig,
    pub version: String,
    pub seed: u64,
    pub wall_time_s: f64,
    pub threads: usize,
    pub metrics_file: String,
    pub artifacts: Vec<String>,
    pub substream_keys: Vec<u64>,
}

/// Validates and runs an experiment on a pool of `threads` workers (0 picks
/// the rayon default). Nothing is written to disk.
pub fn run(config: &ExperimentConfig, threads: usize) -> Result<ResultRecord> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Parameter(format!("cannot start worker pool: {e}")))?;
    let start = Instant::now();
    log::info!("running {} with {} workers", config.experiment, pool.current_num_threads());
    let outcome = pool.install(|| experiments::dispatch(config))?;
    Ok(ResultRecord {
        config: config.clone(),
        report: outcome.report,
        wall_time: start.elapsed().as_secs_f64(),
        version: VERSION.to_string(),
        threads: pool.current_num_threads(),
        substream_keys: (0..config.trials as u64).map(|t| seed_substream(config.seed, t)).collect(),
        artifacts: outcome.artifacts,
    })
}

/// Writes `contents` to `dir/name` through a temporary file in the same
/// directory, so `name` is either absent or complete.
pub fn write_atomic(dir: &Path, name: &str, contents: &[u8]) -> Result<()> {
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(dir.join(name)).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn metrics_bytes(report: &StatReport, format: OutputFormat) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    match format {
        OutputFormat::Csv => report.write_csv(&mut buf)?,
        OutputFormat::Json => report.write_json(&mut buf)?,
    }
    Ok(buf)
}

impl ResultRecord {
    pub fn manifest(&self) -> Manifest {
        Manifest {
            config: self.config.clone(),
            version: self.version.clone(),
            seed: self.config.seed,
            wall_time_s: self.wall_time,
            threads: self.threads,
            metrics_file: self.config.format.metrics_file().to_string(),
            artifacts: self.artifacts.iter().map(|a| a.name.clone()).collect(),
            substream_keys: self.substream_keys.clone(),
        }
    }

    /// Writes artifacts, the metrics file and finally the manifest into `dir`.
    pub fn persist(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        for a in &self.artifacts {
            write_atomic(dir, &a.name, &a.contents)?;
        }
        let metrics = metrics_bytes(&self.report, self.config.format)?;
        write_atomic(dir, self.config.format.metrics_file(), &metrics)?;
        let manifest = serde_json::to_vec_pretty(&self.manifest())?;
        write_atomic(dir, MANIFEST_FILE, &manifest)?;
        Ok(())
    }
}

/// Runs `config` and persists the record under `config.out`.
pub fn execute(config: &ExperimentConfig, threads: usize) -> Result<ResultRecord> {
    let record = run(config, threads)?;
    record.persist(&config.out)?;
    Ok(record)
}

/// Metric values keyed by name, read back from a metrics file.
pub fn read_metrics(path: &Path, format: OutputFormat) -> Result<BTreeMap<String, f64>> {
    let text = fs::read_to_string(path)?;
    let mut out = BTreeMap::new();
    match format {
        OutputFormat::Json => {
            let v: serde_json::Value = serde_json::from_str(&text)?;
            let metrics = v
                .get("metrics")
                .and_then(|m| m.as_object())
                .ok_or_else(|| Error::Format(format!("{}: no metrics object", path.display())))?;
            for (name, m) in metrics {
                // JSON has no NaN; it is written as null
                let value = m.get("value").and_then(|x| x.as_f64()).unwrap_or(f64::NAN);
                out.insert(name.clone(), value);
            }
        }
        OutputFormat::Csv => {
            for (i, line) in text.lines().enumerate().skip(1) {
                let mut fields = line.splitn(3, ',');
                let (Some(name), Some(value)) = (fields.next(), fields.next()) else {
                    return Err(Error::Format(format!("{}:{}: malformed row", path.display(), i + 1)));
                };
                let value = value
                    .parse()
                    .map_err(|_| Error::Format(format!("{}:{}: bad value {value:?}", path.display(), i + 1)))?;
                out.insert(name.to_string(), value);
            }
        }
    }
    Ok(out)
}

fn same_bits(a: f64, b: f64) -> bool {
    a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan())
}

/// Names of metrics whose recomputed value differs from the stored one.
pub fn compare_metrics(stored: &BTreeMap<String, f64>, fresh: &StatReport) -> Vec<String> {
    let mut diffs = Vec::new();
    for m in &fresh.metrics {
        match stored.get(&m.name) {
            Some(&v) if same_bits(v, m.value) => {}
            Some(&v) => diffs.push(format!("{}: stored {v:?}, recomputed {:?}", m.name, m.value)),
            None => diffs.push(format!("{}: missing from stored metrics", m.name)),
        }
    }
    for name in stored.keys() {
        if fresh.get(name).is_none() {
            diffs.push(format!("{name}: not produced by the rerun"));
        }
    }
    diffs
}

#[derive(Debug, Clone)]
pub struct Replay {
    pub record: ResultRecord,
    pub mismatches: Vec<String>,
}

/// Reruns the experiment described by a manifest and compares every metric
/// bit for bit with the stored metrics file. With `out`, the rerun is also
/// persisted there. Mismatches are a numeric error.
pub fn replay(manifest_path: &Path, out: Option<&Path>, threads: usize) -> Result<Replay> {
    let manifest: Manifest = serde_json::from_slice(&fs::read(manifest_path)?)?;
    let dir = manifest_path.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
    let stored = read_metrics(&dir.join(&manifest.metrics_file), manifest.config.format)?;
    let mut config = manifest.config.clone();
    if let Some(o) = out {
        config.out = o.to_path_buf();
    }
    let record = run(&config, threads)?;
    let mismatches = compare_metrics(&stored, &record.report);
    if let Some(o) = out {
        record.persist(o)?;
    }
    if !mismatches.is_empty() {
        return Err(Error::Numeric(format!(
            "replay of {} differs in {} metric(s): {}",
            manifest_path.display(),
            mismatches.len(),
            mismatches.join("; ")
        )));
    }
    Ok(Replay { record, mismatches })
}
