//! Experiment orchestration, result persistence and summaries.

pub mod plot;
pub mod qasm;

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{box_stats, BoxStats};
use crate::compile::{compile_with, equivalence_error, CostWeights, Strategy};
use crate::device::DeviceModel;
use crate::error::{Error, Result};
use crate::gen::CircuitClass;
use crate::metrics::{score, MetricRecord};
use crate::rng::{derive_seed, BenchRng};
use crate::sim::{output_probabilities, sample_ideal, sample_noisy, NoiseModel};

pub use plot::{emit_plot_data, PlotData};
pub use qasm::{export_qasm, parse_qasm};

pub const RESULTS_FILE: &str = "results.jsonl";
const SAMPLE_STREAM: u64 = 0x5A4D_504C;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    #[default]
    Ideal,
    /// Device calibration drives gate and readout errors.
    Noisy,
}

fn default_circuits() -> usize {
    200
}

fn default_shots() -> u64 {
    8192
}

fn default_out() -> PathBuf {
    PathBuf::from("results")
}

/// One experiment, read from a JSON file.
///
/// Without a `device` circuits are sampled uncompiled and only the ideal
/// backend is available. With one, each circuit is compiled by `strategy`
/// and the compiled circuit is sampled.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub circuit_class: CircuitClass,
    pub qubit_range: Vec<usize>,
    #[serde(default = "default_circuits")]
    pub circuits_per_width: usize,
    #[serde(default = "default_shots")]
    pub shots: u64,
    #[serde(default)]
    pub backend: Backend,
    /// Bundled device name or path to a device file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub device: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<Strategy>,
    #[serde(default)]
    pub weights: CostWeights,
    /// Layer count for square and deep circuits; defaults per class.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layers: Option<usize>,
    #[serde(default)]
    pub experiment_seed: u64,
    #[serde(default = "default_out")]
    pub output_dir: PathBuf,
    /// Check each compiled circuit against the original (widths ≤ 6).
    #[serde(default)]
    pub verify: bool,
}

impl ExperimentConfig {
    pub fn new(class: CircuitClass, qubit_range: Vec<usize>) -> Self {
        Self {
            circuit_class: class,
            qubit_range,
            circuits_per_width: default_circuits(),
            shots: default_shots(),
            backend: Backend::Ideal,
            device: None,
            strategy: None,
            weights: CostWeights::default(),
            layers: None,
            experiment_seed: 0,
            output_dir: default_out(),
            verify: false,
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let c: Self = serde_json::from_str(&fs::read_to_string(path)?)?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.circuits_per_width == 0 {
            return Err(Error::Config("circuits_per_width must be at least 1".into()));
        }
        if self.shots == 0 {
            return Err(Error::Config("shots must be at least 1".into()));
        }
        if self.qubit_range.is_empty() {
            return Err(Error::Config("qubit_range is empty".into()));
        }
        if let Some(n) = self.qubit_range.iter().find(|&&n| n < 2) {
            return Err(Error::Config(format!("qubit width {n} is below 2")));
        }
        if self.backend == Backend::Noisy && self.device.is_none() {
            return Err(Error::Config("the noisy backend needs a device".into()));
        }
        Ok(())
    }

    pub fn strategy_tag(&self) -> String {
        match (&self.device, self.strategy) {
            (None, _) => "none".into(),
            (Some(_), s) => s.unwrap_or(Strategy::NoiseAware).name().into(),
        }
    }

    pub fn backend_tag(&self, device_name: Option<&str>) -> String {
        match (self.backend, device_name) {
            (Backend::Ideal, _) => "ideal".into(),
            (Backend::Noisy, Some(d)) => format!("noisy:{d}"),
            (Backend::Noisy, None) => "noisy".into(),
        }
    }

    pub fn results_path(&self) -> PathBuf {
        self.output_dir.join(RESULTS_FILE)
    }
}

/// One line of the results file. Exactly one of `metrics` and `error` is set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub class: CircuitClass,
    pub width: usize,
    pub index: usize,
    pub strategy: String,
    pub backend: String,
    pub experiment_seed: u64,
    pub circuit_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub device: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub swaps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cx_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<MetricRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Identity of a row for resuming: class, width, index, strategy, backend.
pub type RowKey = (CircuitClass, usize, usize, String, String);

impl ResultRow {
    pub fn key(&self) -> RowKey {
        (
            self.class,
            self.width,
            self.index,
            self.strategy.clone(),
            self.backend.clone(),
        )
    }
}

/// Seed of circuit `index` at `width`; independent of every other
/// coordinate, so adding widths or circuits never changes existing ones.
pub fn circuit_seed(experiment_seed: u64, class: CircuitClass, width: usize, index: usize) -> u64 {
    derive_seed(experiment_seed, &[class.seed_tag(), width as u64, index as u64])
}

fn run_one(cfg: &ExperimentConfig, device: Option<&DeviceModel>, width: usize, index: usize) -> ResultRow {
    let class = cfg.circuit_class;
    let seed = circuit_seed(cfg.experiment_seed, class, width, index);
    let mut row = ResultRow {
        class,
        width,
        index,
        strategy: cfg.strategy_tag(),
        backend: cfg.backend_tag(device.map(|d| d.name.as_str())),
        experiment_seed: cfg.experiment_seed,
        circuit_seed: seed,
        device: device.map(|d| d.name.clone()),
        swaps: None,
        cx_count: None,
        metrics: None,
        error: None,
    };
    let outcome = (|| -> Result<MetricRecord> {
        let circuit = class.generate(width, cfg.layers, &mut BenchRng::from_seed(seed))?;
        let table = output_probabilities(&circuit)?;
        let mut rng = BenchRng::from_seed(derive_seed(seed, &[SAMPLE_STREAM]));
        let samples = match device {
            None => sample_ideal(&table, cfg.shots, &mut rng),
            Some(d) => {
                let strategy = cfg.strategy.unwrap_or(Strategy::NoiseAware);
                let compiled = compile_with(&circuit, d, strategy, cfg.weights)?;
                if cfg.verify && width <= 6 {
                    let e = equivalence_error(&circuit, &compiled)?;
                    if e > 1e-7 {
                        return Err(Error::MalformedGate(format!("compiled circuit deviates by {e:e}")));
                    }
                }
                row.swaps = Some(compiled.swaps);
                row.cx_count = Some(compiled.circuit.two_qubit_count());
                let noise = match cfg.backend {
                    Backend::Ideal => NoiseModel::ideal(compiled.circuit.n_qubits()),
                    Backend::Noisy => compiled.noise_model(d),
                };
                compiled.unpermute(&sample_noisy(&compiled.circuit, &noise, cfg.shots, &mut rng)?)
            }
        };
        let (hog, ideal_hog, ced, l1) = score(&samples, &table)?;
        Ok(MetricRecord {
            circuit_id: format!("{class}-{width}-{index}"),
            class: class.name().into(),
            n_qubits: width,
            strategy: row.strategy.clone(),
            backend: row.backend.clone(),
            hog,
            ideal_hog,
            ced,
            l1,
            shots: cfg.shots,
        })
    })();
    match outcome {
        Ok(m) => row.metrics = Some(m),
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// Reads a results file, dropping a trailing partial line left by an
/// interrupted writer.
pub fn read_rows(path: impl AsRef<Path>) -> Result<Vec<ResultRow>> {
    let text = fs::read_to_string(path)?;
    let complete = match text.rfind('\n') {
        Some(i) => &text[..=i],
        None => "",
    };
    complete
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Parse {
                line: i + 1,
                msg: e.to_string(),
            })
        })
        .collect()
}

fn trim_partial_line(path: &Path) -> Result<()> {
    let text = fs::read(path)?;
    let keep = text.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
    if keep != text.len() {
        OpenOptions::new().write(true).open(path)?.set_len(keep as u64)?;
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    /// Every row in the results file, previously completed ones included.
    pub rows: Vec<ResultRow>,
    pub new_rows: usize,
    pub failures: usize,
}

/// Runs the experiment, appending rows to `output_dir/results.jsonl` as
/// each batch finishes. Rows whose key is already in the file are skipped.
/// `jobs` bounds the worker pool (`None`: one worker per core). Rows are
/// written in (width, index) order whatever the pool size.
pub fn run_experiment(cfg: &ExperimentConfig, jobs: Option<usize>) -> Result<RunOutcome> {
    cfg.validate()?;
    let device = cfg.device.as_deref().map(DeviceModel::resolve).transpose()?;
    fs::create_dir_all(&cfg.output_dir)?;
    let path = cfg.results_path();
    let mut done = BTreeSet::new();
    if path.exists() {
        trim_partial_line(&path)?;
        for r in read_rows(&path)? {
            done.insert(r.key());
        }
    }
    let mut file = OpenOptions::new().create(true).append(true).open(&path)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let strategy = cfg.strategy_tag();
    let backend = cfg.backend_tag(device.as_ref().map(|d| d.name.as_str()));
    let batch = pool.current_num_threads().max(1) * 4;
    let mut new_rows = 0;
    let mut failures = 0;
    for &width in &cfg.qubit_range {
        let todo: Vec<usize> = (0..cfg.circuits_per_width)
            .filter(|&i| !done.contains(&(cfg.circuit_class, width, i, strategy.clone(), backend.clone())))
            .collect();
        for chunk in todo.chunks(batch) {
            let rows: Vec<ResultRow> = pool.install(|| {
                chunk
                    .par_iter()
                    .map(|&i| run_one(cfg, device.as_ref(), width, i))
                    .collect()
            });
            let mut buf = Vec::new();
            for r in &rows {
                serde_json::to_writer(&mut buf, r)?;
                buf.push(b'\n');
                failures += r.error.is_some() as usize;
            }
            file.write_all(&buf)?;
            file.flush()?;
            new_rows += rows.len();
        }
    }
    drop(file);
    Ok(RunOutcome {
        rows: read_rows(&path)?,
        new_rows,
        failures,
    })
}

/// Box statistics of one (class, width, strategy, backend) group.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub class: String,
    pub width: usize,
    pub strategy: String,
    pub backend: String,
    pub count: usize,
    pub hog: BoxStats,
    pub ideal_hog: BoxStats,
    pub ced: BoxStats,
    pub l1: BoxStats,
    /// Absent when no row in the group has a non-empty heavy set.
    pub normalized_hog: Option<BoxStats>,
}

impl GroupSummary {
    pub fn metrics(&self) -> Vec<(&'static str, &BoxStats)> {
        let mut v = vec![
            ("hog", &self.hog),
            ("ideal_hog", &self.ideal_hog),
            ("ced", &self.ced),
            ("l1", &self.l1),
        ];
        if let Some(n) = &self.normalized_hog {
            v.push(("normalized_hog", n));
        }
        v
    }
}

/// Groups successful rows by (class, width, strategy, backend). Error rows
/// are skipped.
pub fn summarize(rows: &[ResultRow]) -> Result<Vec<GroupSummary>> {
    let mut groups: BTreeMap<(String, usize, String, String), Vec<&MetricRecord>> = BTreeMap::new();
    for r in rows {
        if let Some(m) = &r.metrics {
            groups
                .entry((
                    r.class.name().to_string(),
                    r.width,
                    r.strategy.clone(),
                    r.backend.clone(),
                ))
                .or_default()
                .push(m);
        }
    }
    if groups.is_empty() {
        return Err(Error::EmptyInput("successful rows"));
    }
    groups
        .into_iter()
        .map(|((class, width, strategy, backend), ms)| {
            let col = |f: fn(&MetricRecord) -> f64| -> Vec<f64> { ms.iter().map(|m| f(m)).collect() };
            let norm: Vec<f64> = ms.iter().filter_map(|m| m.normalized_hog()).collect();
            Ok(GroupSummary {
                class,
                width,
                strategy,
                backend,
                count: ms.len(),
                hog: box_stats(&col(|m| m.hog))?,
                ideal_hog: box_stats(&col(|m| m.ideal_hog))?,
                ced: box_stats(&col(|m| m.ced))?,
                l1: box_stats(&col(|m| m.l1))?,
                normalized_hog: if norm.is_empty() { None } else { Some(box_stats(&norm)?) },
            })
        })
        .collect()
}

const METRICS: [&str; 5] = ["hog", "ideal_hog", "ced", "l1", "normalized_hog"];
const STATS: [&str; 6] = ["mean", "q1", "median", "q3", "whisker_lo", "whisker_hi"];

/// One line per group: the group key, the row count, then mean, q1, median,
/// q3, whisker_lo and whisker_hi for each metric. Missing statistics are
/// left empty.
pub fn summary_csv(summary: &[GroupSummary]) -> String {
    let mut header = vec![
        "class".to_string(),
        "width".into(),
        "strategy".into(),
        "backend".into(),
        "count".into(),
    ];
    for m in METRICS {
        header.extend(STATS.iter().map(|s| format!("{m}_{s}")));
    }
    let mut out = header.join(",") + "\n";
    for g in summary {
        let mut cells = vec![
            g.class.clone(),
            g.width.to_string(),
            g.strategy.clone(),
            g.backend.clone(),
            g.count.to_string(),
        ];
        for m in METRICS {
            match g.metrics().into_iter().find(|(n, _)| *n == m) {
                Some((_, b)) => {
                    cells.extend([b.mean, b.q1, b.median, b.q3, b.whisker_lo, b.whisker_hi].map(|x| x.to_string()))
                }
                None => cells.extend(std::iter::repeat_n(String::new(), STATS.len())),
            }
        }
        out += &(cells.join(",") + "\n");
    }
    out
}

/// Writes `rows` to a JSONL file, one row per line.
pub fn write_rows(path: impl AsRef<Path>, rows: &[ResultRow]) -> Result<()> {
    let mut f = File::create(path)?;
    for r in rows {
        serde_json::to_writer(&mut f, r)?;
        f.write_all(b"\n")?;
    }
    Ok(())
}

/// Rows of a results file as a buffered iterator; useful for large runs.
pub fn stream_rows(path: impl AsRef<Path>) -> Result<impl Iterator<Item = Result<ResultRow>>> {
    let reader = BufReader::new(File::open(path)?);
    Ok(reader.lines().enumerate().filter_map(|(i, line)| match line {
        Ok(l) if l.trim().is_empty() => None,
        Ok(l) => Some(serde_json::from_str(&l).map_err(|e| Error::Parse {
            line: i + 1,
            msg: e.to_string(),
        })),
        Err(e) => Some(Err(e.into())),
    }))
}
