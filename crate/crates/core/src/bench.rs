//! Benchmark grid runner and CSV summarizer.
//!
//! Each (dataset, fanout, batch, variant) configuration is trained for
//! `warmup` untimed steps then `steps` timed steps, once per base seed. One
//! CSV row is written per repeat; [`report_speedups`] reduces the rows to
//! medians across repeats and compares the two variants.

use std::collections::{BTreeMap, HashSet};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::time::Instant;

use chrono::{SecondsFormat, Utc};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{synth_features, synth_labels, DatasetSpec, FeatureMatrix, SeedBatch};
use crate::error::{Error, Result};
use crate::graph::CsrGraph;
use crate::meter::MemoryMeter;
use crate::rng::step_seed;
use crate::scalar::Scalar;
use crate::train::{train_step, AdamWConfig, Fanout, StepOptions, TrainState, Variant, DEFAULT_HIDDEN};

pub const CSV_HEADER: &str = "dataset,variant,k1,k2,batch,repeat,base_seed,steps,warmup,elem_bits,dedup,d_feat,hidden,classes,step_ms_median,step_ms_p10,step_ms_p90,sampled_pairs_per_s,peak_transient_bytes,timestamp_iso8601";

pub const SUMMARY_HEADER: &str = "dataset,k1,k2,batch,elem_bits,dedup,d_feat,hidden,classes,repeats,baseline_step_ms,fused_step_ms,step_speedup,baseline_pairs_per_s,fused_pairs_per_s,pairs_speedup,baseline_peak_bytes,fused_peak_bytes,memory_ratio";

pub const DEFAULT_STEPS: usize = 30;
pub const DEFAULT_WARMUP: usize = 5;
pub const DEFAULT_SEEDS: [u64; 3] = [42, 43, 44];
pub const DEFAULT_D_FEAT: usize = 256;
pub const DEFAULT_CLASSES: usize = 16;

/// Seeds for the synthetic features and labels attached to every dataset.
pub const FEATURE_SEED: u64 = 0x005E_EDF0;
pub const LABEL_SEED: u64 = 0x005E_ED1A;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub dataset: String,
    pub variant: Variant,
    pub k1: usize,
    /// 0 for a one-hop run.
    pub k2: usize,
    pub batch: usize,
    pub base_seeds: Vec<u64>,
    pub steps: usize,
    pub warmup: usize,
    pub elem_bits: u32,
    pub dedup: bool,
    pub d_feat: usize,
    pub hidden: usize,
    pub classes: usize,
}

impl BenchConfig {
    pub fn new(dataset: impl Into<String>, variant: Variant, k1: usize, k2: usize, batch: usize) -> Self {
        BenchConfig {
            dataset: dataset.into(),
            variant,
            k1,
            k2,
            batch,
            base_seeds: DEFAULT_SEEDS.to_vec(),
            steps: DEFAULT_STEPS,
            warmup: DEFAULT_WARMUP,
            elem_bits: 32,
            dedup: false,
            d_feat: DEFAULT_D_FEAT,
            hidden: DEFAULT_HIDDEN,
            classes: DEFAULT_CLASSES,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::invalid("steps must be >= 1"));
        }
        if self.batch == 0 {
            return Err(Error::invalid("batch must be >= 1"));
        }
        if self.k1 == 0 {
            return Err(Error::invalid("k1 must be >= 1"));
        }
        if self.base_seeds.is_empty() {
            return Err(Error::invalid("at least one base seed is required"));
        }
        if !matches!(self.elem_bits, 32 | 64) {
            return Err(Error::invalid(format!("elem_bits must be 32 or 64, got {}", self.elem_bits)));
        }
        if self.d_feat == 0 || self.hidden == 0 || self.classes < 2 {
            return Err(Error::invalid("d_feat and hidden must be >= 1, classes >= 2"));
        }
        Ok(())
    }

    pub fn fanout(&self) -> Fanout {
        Fanout::from_pair(self.k1, self.k2)
    }
}

/// One CSV row: a single repeat of a configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub dataset: String,
    pub variant: Variant,
    pub k1: usize,
    pub k2: usize,
    pub batch: usize,
    pub repeat: usize,
    pub base_seed: u64,
    pub steps: usize,
    pub warmup: usize,
    pub elem_bits: u32,
    pub dedup: bool,
    pub d_feat: usize,
    pub hidden: usize,
    pub classes: usize,
    pub step_ms_median: f64,
    pub step_ms_p10: f64,
    pub step_ms_p90: f64,
    pub sampled_pairs_per_s: f64,
    pub peak_transient_bytes: u64,
    pub timestamp_iso8601: String,
}

/// Identity of a row for idempotent re-runs: everything but the measurements.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RecordKey {
    pub dataset: String,
    pub variant: Variant,
    pub k1: usize,
    pub k2: usize,
    pub batch: usize,
    pub repeat: usize,
    pub base_seed: u64,
    pub steps: usize,
    pub warmup: usize,
    pub elem_bits: u32,
    pub dedup: bool,
    pub d_feat: usize,
    pub hidden: usize,
    pub classes: usize,
}

impl BenchRecord {
    pub fn key(&self) -> RecordKey {
        RecordKey {
            dataset: self.dataset.clone(),
            variant: self.variant,
            k1: self.k1,
            k2: self.k2,
            batch: self.batch,
            repeat: self.repeat,
            base_seed: self.base_seed,
            steps: self.steps,
            warmup: self.warmup,
            elem_bits: self.elem_bits,
            dedup: self.dedup,
            d_feat: self.d_feat,
            hidden: self.hidden,
            classes: self.classes,
        }
    }

    fn config_key(&self) -> ConfigKey {
        ConfigKey {
            dataset: self.dataset.clone(),
            k1: self.k1,
            k2: self.k2,
            batch: self.batch,
            elem_bits: self.elem_bits,
            dedup: self.dedup,
            d_feat: self.d_feat,
            hidden: self.hidden,
            classes: self.classes,
        }
    }
}

impl RecordKey {
    fn of(cfg: &BenchConfig, repeat: usize) -> Self {
        RecordKey {
            dataset: cfg.dataset.clone(),
            variant: cfg.variant,
            k1: cfg.k1,
            k2: cfg.k2,
            batch: cfg.batch,
            repeat,
            base_seed: cfg.base_seeds[repeat],
            steps: cfg.steps,
            warmup: cfg.warmup,
            elem_bits: cfg.elem_bits,
            dedup: cfg.dedup,
            d_feat: cfg.d_feat,
            hidden: cfg.hidden,
            classes: cfg.classes,
        }
    }
}

/// Parse a fanout written as `"k1 k2"` or `"k1"` (one hop).
pub fn parse_fanout(s: &str) -> Result<(usize, usize)> {
    let parts: Vec<&str> = s.split(|c: char| c.is_whitespace() || c == ',').filter(|p| !p.is_empty()).collect();
    let num = |p: &str| {
        p.parse::<usize>()
            .ok()
            .filter(|&k| k >= 1)
            .ok_or_else(|| Error::invalid(format!("bad fanout `{s}`: expected positive integers")))
    };
    match parts.as_slice() {
        [k] => Ok((num(k)?, 0)),
        [k1, k2] => Ok((num(k1)?, num(k2)?)),
        _ => Err(Error::invalid(format!("bad fanout `{s}`: expected \"k1 k2\" or \"k\""))),
    }
}

/// Percentile by linear interpolation between closest ranks. `sorted` must
/// be ascending and non-empty; `q` is in `[0, 1]`.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "percentile of empty sample");
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    percentile(&v, 0.5)
}

/// Deterministic batch schedule: a shuffled permutation of all nodes, cut
/// into consecutive windows that wrap around.
#[derive(Debug, Clone)]
pub struct BatchSchedule {
    order: Vec<u32>,
    batch: usize,
    cursor: usize,
}

impl BatchSchedule {
    pub fn new(num_nodes: usize, batch: usize, base_seed: u64) -> Self {
        let mut order: Vec<u32> = (0..num_nodes as u32).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(base_seed));
        BatchSchedule { order, batch, cursor: 0 }
    }

    pub fn next_seeds(&mut self) -> Vec<u32> {
        let n = self.order.len();
        let seeds = (0..self.batch).map(|i| self.order[(self.cursor + i) % n]).collect();
        self.cursor = (self.cursor + self.batch) % n;
        seeds
    }
}

/// Run every repeat of one configuration.
pub fn run_config<T: Scalar>(
    cfg: &BenchConfig,
    graph: &CsrGraph,
    x: &FeatureMatrix<T>,
    labels: &[u32],
) -> Result<Vec<BenchRecord>> {
    (0..cfg.base_seeds.len())
        .map(|r| run_repeat(cfg, r, graph, x, labels))
        .collect()
}

/// Run a single repeat (`cfg.base_seeds[repeat]`).
pub fn run_repeat<T: Scalar>(
    cfg: &BenchConfig,
    repeat: usize,
    graph: &CsrGraph,
    x: &FeatureMatrix<T>,
    labels: &[u32],
) -> Result<BenchRecord> {
    cfg.validate()?;
    if cfg.elem_bits != T::BITS {
        return Err(Error::DimensionMismatch {
            what: "element width",
            expected: cfg.elem_bits as usize,
            got: T::BITS as usize,
        });
    }
    if x.dim() != cfg.d_feat {
        return Err(Error::DimensionMismatch {
            what: "feature dimension",
            expected: cfg.d_feat,
            got: x.dim(),
        });
    }
    x.check_nodes(graph.num_nodes())?;
    if labels.len() != graph.num_nodes() {
        return Err(Error::DimensionMismatch {
            what: "labels",
            expected: graph.num_nodes(),
            got: labels.len(),
        });
    }
    let base_seed = *cfg
        .base_seeds
        .get(repeat)
        .ok_or_else(|| Error::invalid(format!("repeat {repeat} has no base seed")))?;

    let mut state = TrainState::<T>::new(cfg.d_feat, cfg.hidden, cfg.classes, base_seed, AdamWConfig::default());
    let mut schedule = BatchSchedule::new(graph.num_nodes(), cfg.batch, base_seed);
    let meter = MemoryMeter::new();
    let mut step_ms = Vec::with_capacity(cfg.steps);
    let mut pairs = 0u64;

    for step in 0..cfg.warmup + cfg.steps {
        let seeds = schedule.next_seeds();
        let batch_labels = seeds.iter().map(|&s| labels[s as usize]).collect();
        let batch = SeedBatch::new(seeds, graph.num_nodes())?.with_labels(batch_labels)?;
        let opts = StepOptions {
            variant: cfg.variant,
            fanout: cfg.fanout(),
            base_seed: step_seed(base_seed, step as u64),
            dedup: cfg.dedup,
            feature_grad: false,
        };
        let timed = step >= cfg.warmup;
        if step == cfg.warmup {
            meter.reset_peak();
        }
        // train_step returns only after all of its parallel work has joined,
        // so the clock brackets the complete step.
        let start = Instant::now();
        let result = train_step(graph, x, &batch, &opts, &mut state, &meter)?;
        let elapsed = start.elapsed();
        if timed {
            step_ms.push(elapsed.as_secs_f64() * 1e3);
            pairs += result.sampled_pairs;
        }
    }

    let total_s: f64 = step_ms.iter().sum::<f64>() / 1e3;
    step_ms.sort_by(f64::total_cmp);
    Ok(BenchRecord {
        dataset: cfg.dataset.clone(),
        variant: cfg.variant,
        k1: cfg.k1,
        k2: cfg.k2,
        batch: cfg.batch,
        repeat,
        base_seed,
        steps: cfg.steps,
        warmup: cfg.warmup,
        elem_bits: cfg.elem_bits,
        dedup: cfg.dedup,
        d_feat: cfg.d_feat,
        hidden: cfg.hidden,
        classes: cfg.classes,
        step_ms_median: percentile(&step_ms, 0.5),
        step_ms_p10: percentile(&step_ms, 0.1),
        step_ms_p90: percentile(&step_ms, 0.9),
        sampled_pairs_per_s: if total_s > 0.0 { pairs as f64 / total_s } else { f64::INFINITY },
        peak_transient_bytes: meter.peak(),
        timestamp_iso8601: Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true),
    })
}

/// The cross product a `bench` invocation runs.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub datasets: Vec<DatasetSpec>,
    pub fanouts: Vec<(usize, usize)>,
    pub batches: Vec<usize>,
    pub variants: Vec<Variant>,
    pub base_seeds: Vec<u64>,
    pub steps: usize,
    pub warmup: usize,
    pub elem_bits: u32,
    pub dedup: bool,
    pub d_feat: usize,
    pub hidden: usize,
    pub classes: usize,
}

impl GridSpec {
    pub fn new(datasets: Vec<DatasetSpec>, fanouts: Vec<(usize, usize)>, batches: Vec<usize>) -> Self {
        GridSpec {
            datasets,
            fanouts,
            batches,
            variants: vec![Variant::Baseline, Variant::Fused],
            base_seeds: DEFAULT_SEEDS.to_vec(),
            steps: DEFAULT_STEPS,
            warmup: DEFAULT_WARMUP,
            elem_bits: 32,
            dedup: false,
            d_feat: DEFAULT_D_FEAT,
            hidden: DEFAULT_HIDDEN,
            classes: DEFAULT_CLASSES,
        }
    }

    /// Configurations for one dataset, in run order.
    pub fn configs(&self, dataset: &DatasetSpec) -> Vec<BenchConfig> {
        let mut out = Vec::new();
        for &(k1, k2) in &self.fanouts {
            for &batch in &self.batches {
                for &variant in &self.variants {
                    out.push(BenchConfig {
                        dataset: dataset.to_string(),
                        variant,
                        k1,
                        k2,
                        batch,
                        base_seeds: self.base_seeds.clone(),
                        steps: self.steps,
                        warmup: self.warmup,
                        elem_bits: self.elem_bits,
                        dedup: self.dedup,
                        d_feat: self.d_feat,
                        hidden: self.hidden,
                        classes: self.classes,
                    });
                }
            }
        }
        out
    }

    pub fn num_rows(&self) -> usize {
        self.datasets.len() * self.fanouts.len() * self.batches.len() * self.variants.len() * self.base_seeds.len()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GridOutcome {
    pub written: Vec<BenchRecord>,
    /// Rows already present in the output file.
    pub skipped: usize,
}

enum Features {
    F32(FeatureMatrix<f32>),
    F64(FeatureMatrix<f64>),
}

/// Run the grid, appending one row per (config, repeat) to `out_path`.
///
/// Rows whose key is already in the file are skipped, so an interrupted
/// grid can be resumed by running the same command again. `progress` sees
/// each record as it is written.
pub fn run_grid(
    grid: &GridSpec,
    out_path: impl AsRef<Path>,
    mut progress: impl FnMut(&BenchRecord),
) -> Result<GridOutcome> {
    let out_path = out_path.as_ref();
    let existing: HashSet<RecordKey> = if out_path.exists() && std::fs::metadata(out_path)?.len() > 0 {
        check_header(out_path)?;
        read_records(out_path)?.iter().map(BenchRecord::key).collect()
    } else {
        File::create(out_path)?.write_all(format!("{CSV_HEADER}\n").as_bytes())?;
        HashSet::new()
    };
    let file = OpenOptions::new().append(true).open(out_path)?;
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(file);

    let mut outcome = GridOutcome::default();
    for dataset in &grid.datasets {
        let configs = grid.configs(dataset);
        let pending: Vec<(&BenchConfig, usize)> = configs
            .iter()
            .flat_map(|c| (0..c.base_seeds.len()).map(move |r| (c, r)))
            .filter(|(c, r)| !existing.contains(&RecordKey::of(c, *r)))
            .collect();
        outcome.skipped += configs.len() * grid.base_seeds.len() - pending.len();
        if pending.is_empty() {
            continue;
        }
        for c in &configs {
            c.validate()?;
        }
        let graph = dataset.load()?;
        let n = graph.num_nodes();
        let (features, labels) = match grid.elem_bits {
            32 => {
                let x = synth_features::<f32>(n, grid.d_feat, FEATURE_SEED);
                let l = synth_labels(&x, grid.classes, LABEL_SEED);
                (Features::F32(x), l)
            }
            _ => {
                let x = synth_features::<f64>(n, grid.d_feat, FEATURE_SEED);
                let l = synth_labels(&x, grid.classes, LABEL_SEED);
                (Features::F64(x), l)
            }
        };
        for (cfg, repeat) in pending {
            let record = match &features {
                Features::F32(x) => run_repeat(cfg, repeat, &graph, x, &labels)?,
                Features::F64(x) => run_repeat(cfg, repeat, &graph, x, &labels)?,
            };
            writer.serialize(&record)?;
            writer.flush()?;
            progress(&record);
            outcome.written.push(record);
        }
    }
    Ok(outcome)
}

fn check_header(path: &Path) -> Result<()> {
    let mut first = String::new();
    BufReader::new(File::open(path)?).read_line(&mut first)?;
    if first.trim_end() != CSV_HEADER {
        return Err(Error::CsvRow {
            row: 1,
            msg: format!("header does not match the bench schema in {}", path.display()),
        });
    }
    Ok(())
}

/// Parse a bench CSV. Errors name the 1-based line of the offending row.
pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<BenchRecord>> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path)?;
    let header: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    if header.join(",") != CSV_HEADER {
        return Err(Error::CsvRow {
            row: 1,
            msg: "header does not match the bench schema".into(),
        });
    }
    let mut out = Vec::new();
    for (i, row) in reader.deserialize::<BenchRecord>().enumerate() {
        let line = i + 2;
        let record = row.map_err(|e| Error::CsvRow { row: line, msg: e.to_string() })?;
        if !(record.step_ms_p10 <= record.step_ms_median && record.step_ms_median <= record.step_ms_p90) {
            return Err(Error::CsvRow {
                row: line,
                msg: "percentiles out of order".into(),
            });
        }
        out.push(record);
    }
    Ok(out)
}

/// A configuration with both variants, as compared by the report.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConfigKey {
    pub dataset: String,
    pub k1: usize,
    pub k2: usize,
    pub batch: usize,
    pub elem_bits: u32,
    pub dedup: bool,
    pub d_feat: usize,
    pub hidden: usize,
    pub classes: usize,
}

/// Medians across repeats for each variant, and their ratios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub dataset: String,
    pub k1: usize,
    pub k2: usize,
    pub batch: usize,
    pub elem_bits: u32,
    pub dedup: bool,
    pub d_feat: usize,
    pub hidden: usize,
    pub classes: usize,
    pub repeats: usize,
    pub baseline_step_ms: f64,
    pub fused_step_ms: f64,
    /// baseline / fused step time
    pub step_speedup: f64,
    pub baseline_pairs_per_s: f64,
    pub fused_pairs_per_s: f64,
    /// fused / baseline throughput
    pub pairs_speedup: f64,
    pub baseline_peak_bytes: f64,
    pub fused_peak_bytes: f64,
    /// baseline / fused peak
    pub memory_ratio: f64,
}

/// Reduce rows to one summary per configuration.
///
/// Each repeat contributes its per-step median; the summary takes the
/// median of those across repeats. Duplicate (config, repeat) keys keep
/// their first occurrence, so a file concatenated with itself summarizes
/// the same.
pub fn summarize(records: &[BenchRecord]) -> Result<Vec<SummaryRow>> {
    let mut seen = HashSet::new();
    let mut groups: BTreeMap<ConfigKey, [Vec<&BenchRecord>; 2]> = BTreeMap::new();
    for r in records {
        if !seen.insert(r.key()) {
            continue;
        }
        let slot = match r.variant {
            Variant::Baseline => 0,
            Variant::Fused => 1,
        };
        groups.entry(r.config_key()).or_default()[slot].push(r);
    }
    groups
        .into_iter()
        .map(|(key, [base, fused])| {
            if base.is_empty() || fused.is_empty() {
                let missing = if base.is_empty() { "baseline" } else { "fused" };
                return Err(Error::IncompleteConfig(format!(
                    "{} k1={} k2={} batch={}: no {missing} rows",
                    key.dataset, key.k1, key.k2, key.batch
                )));
            }
            let med = |rows: &[&BenchRecord], f: fn(&BenchRecord) -> f64| {
                median(&rows.iter().map(|r| f(r)).collect::<Vec<_>>())
            };
            let baseline_step_ms = med(&base, |r| r.step_ms_median);
            let fused_step_ms = med(&fused, |r| r.step_ms_median);
            let baseline_pairs_per_s = med(&base, |r| r.sampled_pairs_per_s);
            let fused_pairs_per_s = med(&fused, |r| r.sampled_pairs_per_s);
            let baseline_peak_bytes = med(&base, |r| r.peak_transient_bytes as f64);
            let fused_peak_bytes = med(&fused, |r| r.peak_transient_bytes as f64);
            Ok(SummaryRow {
                repeats: base.len().min(fused.len()),
                step_speedup: baseline_step_ms / fused_step_ms,
                pairs_speedup: fused_pairs_per_s / baseline_pairs_per_s,
                memory_ratio: baseline_peak_bytes / fused_peak_bytes,
                dataset: key.dataset,
                k1: key.k1,
                k2: key.k2,
                batch: key.batch,
                elem_bits: key.elem_bits,
                dedup: key.dedup,
                d_feat: key.d_feat,
                hidden: key.hidden,
                classes: key.classes,
                baseline_step_ms,
                fused_step_ms,
                baseline_pairs_per_s,
                fused_pairs_per_s,
                baseline_peak_bytes,
                fused_peak_bytes,
            })
        })
        .collect()
}

/// Read a bench CSV and summarize it.
pub fn report_speedups(csv_path: impl AsRef<Path>) -> Result<Vec<SummaryRow>> {
    summarize(&read_records(csv_path)?)
}

pub fn write_summary(rows: &[SummaryRow], path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn human_bytes(b: f64) -> String {
    const UNITS: [&str; 4] = ["B", "KiB", "MiB", "GiB"];
    let mut v = b;
    let mut u = 0;
    while v >= 1024.0 && u + 1 < UNITS.len() {
        v /= 1024.0;
        u += 1;
    }
    format!("{v:.1} {}", UNITS[u])
}

fn fmt_rate(r: f64) -> String {
    if r >= 1e6 {
        format!("{:.2}M", r / 1e6)
    } else if r >= 1e3 {
        format!("{:.1}k", r / 1e3)
    } else {
        format!("{r:.0}")
    }
}

/// Console table; each cell reads `baseline → fused`.
pub fn render_table(rows: &[SummaryRow]) -> String {
    let mut out = String::new();
    let header = [
        "dataset", "fanout", "batch", "step ms", "speedup", "pairs/s", "speedup", "peak", "ratio",
    ];
    let mut lines: Vec<[String; 9]> = vec![header.map(str::to_owned)];
    for r in rows {
        let fanout = if r.k2 == 0 {
            format!("({})", r.k1)
        } else {
            format!("({},{})", r.k1, r.k2)
        };
        let dataset = if r.dedup {
            format!("{} [dedup]", r.dataset)
        } else {
            r.dataset.clone()
        };
        lines.push([
            dataset,
            fanout,
            r.batch.to_string(),
            format!("{:.2} → {:.2}", r.baseline_step_ms, r.fused_step_ms),
            format!("{:.2}x", r.step_speedup),
            format!("{} → {}", fmt_rate(r.baseline_pairs_per_s), fmt_rate(r.fused_pairs_per_s)),
            format!("{:.2}x", r.pairs_speedup),
            format!("{} → {}", human_bytes(r.baseline_peak_bytes), human_bytes(r.fused_peak_bytes)),
            format!("{:.2}x", r.memory_ratio),
        ]);
    }
    let widths: Vec<usize> = (0..9)
        .map(|c| lines.iter().map(|l| l[c].chars().count()).max().unwrap_or(0))
        .collect();
    for (i, line) in lines.iter().enumerate() {
        let cells: Vec<String> = line
            .iter()
            .zip(&widths)
            .map(|(cell, &w)| format!("{cell:<w$}"))
            .collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
        if i == 0 {
            out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1)));
            out.push('\n');
        }
    }
    out
}
