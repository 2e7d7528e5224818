//! Configuration-driven sweeps: every `(λ, seed)` pair runs the full
//! generate → repair → embed → predict → evaluate chain in isolation.
//!
//! Output layout under `<out>/<name>/`:
//!
//! ```text
//! <seed>/config.json                 replayable single-seed config
//! <seed>/lambda_<λ>/report.json      FairnessReport
//! <seed>/lambda_<λ>/repair.json      repair metadata (when repaired)
//! <seed>/lambda_<λ>/predictions.csv  held-out pairs with scores
//! <seed>/lambda_<λ>/embedding.csv
//! aggregate.csv                      mean and std of every measure per λ
//! lambda_sweep.csv                   λ, DI, Cons, AUC, RB, assortativity
//! failures.log                       one line per failed run
//! ```

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::embedding::EmbeddingConfig;
use crate::error::{Error, Result};
use crate::graph::io::{read_graph, write_text};
use crate::graph::{builtin, generate_sbm, AttributedGraph, SbmSpec};
use crate::metrics::{evaluate, FairnessReport, MetricConfig};
use crate::parallel::Execution;
use crate::predict::{link_prediction_pipeline, LogRegOptions, SplitConfig};
use crate::repair::{Method, RepairConfig, RepairMetadata};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Dataset {
    /// One of G1..G5, regenerated with every run seed.
    Builtin { name: String },
    /// A custom SBM; its own `seed` field is replaced by the run seed.
    Sbm { spec: SbmSpec },
    /// A fixed graph shared by all seeds.
    Files { edges: PathBuf, attrs: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub name: String,
    pub dataset: Dataset,
    /// `None` evaluates the unrepaired graph.
    pub method: Option<Method>,
    /// Swept for the laplacian method. Other methods run once with `λ = 0`.
    pub lambdas: Vec<f64>,
    /// Template for every repair; `method`, `lambda` and `seed` are set per run.
    pub repair: RepairConfig,
    pub embedding: EmbeddingConfig,
    pub split: SplitConfig,
    pub logreg: LogRegOptions,
    pub metrics: MetricConfig,
    pub seeds: Vec<u64>,
    pub out: PathBuf,
    /// Concurrent runs; `None` uses every core.
    pub jobs: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            name: "experiment".into(),
            dataset: Dataset::Builtin { name: "G1".into() },
            method: Some(Method::Laplacian),
            lambdas: vec![0.0, 0.005, 1.0, 5.0],
            repair: RepairConfig::default(),
            embedding: EmbeddingConfig::default(),
            split: SplitConfig::default(),
            logreg: LogRegOptions::default(),
            metrics: MetricConfig::default(),
            seeds: vec![0],
            out: PathBuf::from("runs"),
            jobs: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) || self.name == "." || self.name == ".." {
            return Err(Error::Config(format!("experiment name {:?} is not a plain directory name", self.name)));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("seed list is empty".into()));
        }
        if self.method == Some(Method::Laplacian) && self.lambdas.is_empty() {
            return Err(Error::Config("lambda grid is empty".into()));
        }
        if let Some(&bad) = self.lambdas.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
            return Err(Error::Config(format!("lambda {bad} is not a finite non-negative number")));
        }
        if self.jobs == Some(0) {
            return Err(Error::Config("jobs must be positive".into()));
        }
        if let Dataset::Builtin { name } = &self.dataset {
            builtin(name, 0)?;
        }
        Ok(())
    }

    /// The λ values actually run.
    pub fn lambda_grid(&self) -> Vec<f64> {
        if self.method == Some(Method::Laplacian) {
            self.lambdas.clone()
        } else {
            vec![0.0]
        }
    }

    pub fn run_dir(&self) -> PathBuf {
        self.out.join(&self.name)
    }

    fn graph_for_seed(&self, seed: u64, fixed: Option<&AttributedGraph>) -> Result<AttributedGraph> {
        match (&self.dataset, fixed) {
            (_, Some(g)) => Ok(g.clone()),
            (Dataset::Builtin { name }, None) => generate_sbm(&builtin(name, seed)?),
            (Dataset::Sbm { spec }, None) => generate_sbm(&SbmSpec { seed, ..spec.clone() }),
            (Dataset::Files { edges, attrs }, None) => Ok(read_graph(edges, attrs)?.graph),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub lambda: f64,
    pub seed: u64,
    pub report: FairnessReport,
    pub repair: Option<RepairMetadata>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunFailure {
    pub lambda: f64,
    pub seed: u64,
    pub message: String,
    pub kind: crate::ErrorKind,
}

/// Mean and sample standard deviation of each report field over the
/// successful runs at one λ. Fields undefined in every run are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub lambda: f64,
    pub runs: usize,
    pub mean: [Option<f64>; 9],
    pub std: [Option<f64>; 9],
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub dir: PathBuf,
    pub records: Vec<RunRecord>,
    pub failures: Vec<RunFailure>,
    pub aggregate: Vec<AggregateRow>,
}

fn run_one(cfg: &ExperimentConfig, g: &AttributedGraph, lambda: f64, seed: u64, inner: Execution) -> Result<RunRecord> {
    let repair_cfg = cfg.method.map(|method| RepairConfig {
        method,
        lambda,
        seed,
        execution: inner,
        ..cfg.repair
    });
    let embed_cfg = EmbeddingConfig { seed, execution: inner, ..cfg.embedding };
    let split_cfg = SplitConfig { seed, ..cfg.split };
    let mut metric_cfg = cfg.metrics;
    metric_cfg.rb.seed = seed;
    metric_cfg.rb.execution = inner;

    let run = link_prediction_pipeline(g, repair_cfg.as_ref(), &embed_cfg, &split_cfg, &cfg.logreg)?;
    let report = evaluate(g, &run, &metric_cfg)?;
    let repair = run.repair.as_ref().map(|r| r.metadata(&run.split.train));

    let dir = cfg.run_dir().join(seed.to_string()).join(format!("lambda_{lambda}"));
    write_text(dir.join("report.json"), &report.to_json()?)?;
    if let Some(meta) = &repair {
        write_text(dir.join("repair.json"), &serde_json::to_string_pretty(meta)?)?;
    }
    write_text(dir.join("predictions.csv"), &run.test.to_csv(&run.scores))?;
    write_text(dir.join("embedding.csv"), &run.embedding.to_csv())?;
    Ok(RunRecord { lambda, seed, report, repair })
}

fn mean_std(values: &[f64]) -> (Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (Some(mean), Some(std))
}

pub fn aggregate(lambdas: &[f64], records: &[RunRecord]) -> Vec<AggregateRow> {
    lambdas
        .iter()
        .map(|&lambda| {
            let runs: Vec<&RunRecord> = records.iter().filter(|r| r.lambda == lambda).collect();
            let mut mean = [None; 9];
            let mut std = [None; 9];
            for f in 0..9 {
                let values: Vec<f64> = runs.iter().filter_map(|r| r.report.fields()[f]).collect();
                (mean[f], std[f]) = mean_std(&values);
            }
            AggregateRow { lambda, runs: runs.len(), mean, std }
        })
        .collect()
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

pub fn aggregate_csv(rows: &[AggregateRow]) -> String {
    let mut out = String::from("lambda,runs");
    for name in FairnessReport::CSV_HEADER.split(',') {
        let _ = write!(out, ",{name}_mean,{name}_std");
    }
    out.push('\n');
    for row in rows {
        let _ = write!(out, "{},{}", row.lambda, row.runs);
        for f in 0..9 {
            let _ = write!(out, ",{},{}", cell(row.mean[f]), cell(row.std[f]));
        }
        out.push('\n');
    }
    out
}

/// Tidy plot data for the λ sweep: one row per λ with mean measures.
pub fn lambda_sweep_csv(rows: &[AggregateRow]) -> String {
    // Indices into `FairnessReport::fields`.
    const COLUMNS: [usize; 5] = [0, 4, 6, 3, 5];
    let mut out = String::from("lambda,di,consistency,auc,rb,assortativity\n");
    for row in rows {
        let _ = write!(out, "{}", row.lambda);
        for f in COLUMNS {
            let _ = write!(out, ",{}", cell(row.mean[f]));
        }
        out.push('\n');
    }
    out
}

fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    #[cfg(feature = "parallel")]
    if let Some(jobs) = jobs {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::Config(format!("cannot start {jobs} worker threads: {e}")))?;
        return Ok(pool.install(f));
    }
    let _ = jobs;
    Ok(f())
}

/// Runs the whole sweep. Failed runs are logged and skipped; the error is
/// only returned for an invalid config or an unwritable output directory.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let dir = cfg.run_dir();
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;

    let fixed = match &cfg.dataset {
        Dataset::Files { .. } => Some(cfg.graph_for_seed(0, None)?),
        _ => None,
    };
    for &seed in &cfg.seeds {
        let snapshot = ExperimentConfig { seeds: vec![seed], ..cfg.clone() };
        write_text(dir.join(seed.to_string()).join("config.json"), &snapshot.to_json()?)?;
    }

    let lambdas = cfg.lambda_grid();
    let tasks: Vec<(f64, u64)> = cfg
        .seeds
        .iter()
        .flat_map(|&seed| lambdas.iter().map(move |&l| (l, seed)))
        .collect();
    let outer = if cfg.jobs == Some(1) { Execution::Sequential } else { Execution::default() };
    let results = with_pool(cfg.jobs, || {
        outer.map(tasks.len(), |i| {
            let (lambda, seed) = tasks[i];
            cfg.graph_for_seed(seed, fixed.as_ref())
                .and_then(|g| run_one(cfg, &g, lambda, seed, outer))
                .map_err(|e| RunFailure {
                    lambda,
                    seed,
                    message: e.to_string(),
                    kind: e.kind(),
                })
        })
    })?;

    let mut records = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(rec) => records.push(rec),
            Err(f) => {
                log::warn!("run lambda={} seed={} failed: {}", f.lambda, f.seed, f.message);
                failures.push(f);
            }
        }
    }
    let log: String = failures
        .iter()
        .map(|f| format!("lambda={} seed={}: {}\n", f.lambda, f.seed, f.message))
        .collect();
    write_text(dir.join("failures.log"), &log)?;

    let rows = aggregate(&lambdas, &records);
    write_text(dir.join("aggregate.csv"), &aggregate_csv(&rows))?;
    write_text(dir.join("lambda_sweep.csv"), &lambda_sweep_csv(&rows))?;
    Ok(ExperimentOutcome {
        dir,
        records,
        failures,
        aggregate: rows,
    })
}
