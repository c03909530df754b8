//! Monte-Carlo sweeps over `(d, p, method)`, aggregates, consistency checks
//! and the decoder-switching rate check.

mod emit;
mod plot;

pub use emit::{read_records_csv, write_aggregates_csv, write_records, write_records_csv, OutputFormat};
pub use plot::{render_svg, PlotMetric};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decoder::{decode, max_growth_radius, nodes_in_clusters};
use crate::graph::{build_phenomenological, DecodingGraph, GraphError, Weight};
use crate::sampler::{sample_errors, syndrome_of, SampleError, SeedSpec};
use crate::softout::{
    bounded_cluster_gap, cluster_gap, extra_gap_cg_from_growth, extra_gap_from_growth, extra_growth, ContractedView,
    GapKind, GapResult, DEFAULT_EPSILON_MAX_DB,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid sweep configuration: {0}")]
    InvalidConfig(String),
    #[error("no records to evaluate")]
    NoRecords,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("thread pool: {0}")]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub distances: Vec<usize>,
    pub probs: Vec<f64>,
    /// Measurement rounds; `None` means `rounds = d`.
    pub rounds: Option<usize>,
    pub samples: u64,
    pub epsilon_max_db: f64,
    pub methods: Vec<GapKind>,
    pub master_seed: u64,
    /// Leave samples without detection events out of every aggregate.
    pub skip_empty_syndromes: bool,
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            distances: vec![3, 5, 7],
            probs: vec![0.001],
            rounds: None,
            samples: 1000,
            epsilon_max_db: DEFAULT_EPSILON_MAX_DB,
            methods: GapKind::ALL.to_vec(),
            master_seed: 0,
            skip_empty_syndromes: true,
            threads: None,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: String| Err(HarnessError::InvalidConfig(msg));
        if self.samples == 0 {
            return bad("samples must be at least 1".into());
        }
        if !(self.epsilon_max_db > 0.0 && self.epsilon_max_db.is_finite()) {
            return bad(format!("epsilon_max_db must be positive, got {}", self.epsilon_max_db));
        }
        if self.distances.is_empty() || self.probs.is_empty() || self.methods.is_empty() {
            return bad("distances, probs and methods must be non-empty".into());
        }
        if let Some(&d) = self.distances.iter().find(|&&d| d < 3 || d % 2 == 0) {
            return bad(format!("distance {d} is not an odd integer >= 3"));
        }
        if let Some(&p) = self.probs.iter().find(|&&p| !(p > 0.0 && p <= 0.5)) {
            return bad(format!("probability {p} outside (0, 0.5]"));
        }
        if self.rounds == Some(0) {
            return bad("rounds must be at least 1".into());
        }
        if self.threads == Some(0) {
            return bad("threads must be at least 1".into());
        }
        Ok(())
    }

    pub fn epsilon_max(&self) -> Weight {
        Weight::from_db(self.epsilon_max_db)
    }

    pub fn rounds_for(&self, d: usize) -> usize {
        self.rounds.unwrap_or(d)
    }

    fn install<R: Send>(&self, job: impl FnOnce() -> R + Send) -> Result<R, HarnessError> {
        match self.threads {
            Some(n) => Ok(rayon::ThreadPoolBuilder::new().num_threads(n).build()?.install(job)),
            None => Ok(job()),
        }
    }
}

/// Seed for one `(d, p)` cell; samples within the cell use it with their
/// index as the stream id.
pub fn cell_seed(master: u64, d: usize, p: f64) -> u64 {
    master ^ (d as u64).rotate_left(40) ^ p.to_bits().rotate_left(13)
}

/// Everything computed for one sample, sharing a single decode.
#[derive(Clone, Debug)]
pub struct SampleOutcome {
    pub sample: u64,
    pub num_events: usize,
    pub nodes_in_clusters: usize,
    pub max_growth: Weight,
    /// One entry per requested method, in request order.
    pub gaps: Vec<GapResult>,
}

impl SampleOutcome {
    pub fn is_empty(&self) -> bool {
        self.num_events == 0
    }

    pub fn gap(&self, kind: GapKind) -> Option<&GapResult> {
        self.gaps.iter().find(|r| r.kind == kind)
    }
}

pub fn evaluate_sample(
    g: &DecodingGraph,
    seed: SeedSpec,
    methods: &[GapKind],
    epsilon_max: Weight,
) -> Result<SampleOutcome, HarnessError> {
    let errors = sample_errors(g, seed)?;
    let syndrome = syndrome_of(g, &errors);
    let cs = decode(g, &syndrome);
    let view = ContractedView::new(g, &cs);
    let growth = methods
        .iter()
        .any(|m| matches!(m, GapKind::Extra | GapKind::ExtraCg))
        .then(|| extra_growth(&view, epsilon_max));
    let gaps = methods
        .iter()
        .map(|&m| match m {
            GapKind::Cluster => cluster_gap(&view),
            GapKind::Bounded => bounded_cluster_gap(&view, epsilon_max),
            GapKind::Extra => extra_gap_from_growth(&view, growth.as_ref().unwrap()),
            GapKind::ExtraCg => extra_gap_cg_from_growth(&view, growth.as_ref().unwrap()),
        })
        .collect();
    Ok(SampleOutcome {
        sample: seed.sample_index,
        num_events: syndrome.len(),
        nodes_in_clusters: nodes_in_clusters(g, &cs),
        max_growth: max_growth_radius(&cs),
        gaps,
    })
}

/// Evaluates every sample of one `(d, p)` cell, in sample order.
pub fn run_cell(cfg: &SweepConfig, d: usize, p: f64) -> Result<Vec<SampleOutcome>, HarnessError> {
    cfg.validate()?;
    let g = build_phenomenological(d, cfg.rounds_for(d), p)?;
    let seed = cell_seed(cfg.master_seed, d, p);
    let eps = cfg.epsilon_max();
    cfg.install(|| {
        (0..cfg.samples)
            .into_par_iter()
            .map(|i| evaluate_sample(&g, SeedSpec::new(seed, i), &cfg.methods, eps))
            .collect()
    })?
}

/// One CSV row: one method evaluated on one sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub d: usize,
    pub p: f64,
    pub sample: u64,
    pub method: GapKind,
    pub defined: bool,
    pub gap_db: Option<f64>,
    pub visited_nodes: usize,
    pub extra_nodes: usize,
    pub max_growth_db: f64,
    pub nodes_in_clusters: usize,
}

impl SweepRecord {
    pub fn is_empty_sample(&self) -> bool {
        self.nodes_in_clusters == 0
    }

    pub fn below(&self, epsilon_max_db: f64) -> bool {
        matches!(self.gap_db, Some(g) if g <= epsilon_max_db)
    }
}

pub fn records_of(d: usize, p: f64, outcomes: &[SampleOutcome]) -> Vec<SweepRecord> {
    outcomes
        .iter()
        .flat_map(|o| {
            o.gaps.iter().map(move |r| SweepRecord {
                d,
                p,
                sample: o.sample,
                method: r.kind,
                defined: r.is_defined(),
                gap_db: r.value.map(Weight::db),
                visited_nodes: r.visited_nodes,
                extra_nodes: r.extra_nodes,
                max_growth_db: o.max_growth.db(),
                nodes_in_clusters: o.nodes_in_clusters,
            })
        })
        .collect()
}

/// Per-sample records for the whole grid, ordered by `d`, `p`, sample, method.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRecord>, HarnessError> {
    cfg.validate()?;
    let mut out = Vec::new();
    for &d in &cfg.distances {
        for &p in &cfg.probs {
            out.extend(records_of(d, p, &run_cell(cfg, d, p)?));
        }
    }
    Ok(out)
}

/// Single-pass mean and variance.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RunningStats {
    n: u64,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Sample standard deviation; zero below two samples.
    pub fn std(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.m2 / (self.n - 1) as f64).sqrt()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub d: usize,
    pub p: f64,
    pub method: GapKind,
    /// Samples entering the statistics below.
    pub n: u64,
    /// Samples without detection events left out of `n`.
    pub skipped_empty: u64,
    pub mean_visited_nodes: f64,
    pub std_visited_nodes: f64,
    pub mean_extra_nodes: f64,
    pub std_extra_nodes: f64,
    pub mean_nodes_in_clusters: f64,
    pub mean_max_growth_db: f64,
    pub defined_fraction: f64,
    pub fraction_below: f64,
    pub fraction_below_se: f64,
}

#[derive(Default)]
struct Accumulator {
    n: u64,
    skipped: u64,
    visited: RunningStats,
    extra: RunningStats,
    clusters: RunningStats,
    growth: RunningStats,
    defined: u64,
    below: u64,
}

/// Aggregates records per `(d, p, method)` in first-appearance order.
pub fn aggregate(records: &[SweepRecord], epsilon_max_db: f64, skip_empty: bool) -> Vec<Aggregate> {
    let mut keys: Vec<(usize, u64, GapKind)> = Vec::new();
    let mut accs: Vec<Accumulator> = Vec::new();
    for r in records {
        let key = (r.d, r.p.to_bits(), r.method);
        let idx = match keys.iter().position(|k| *k == key) {
            Some(i) => i,
            None => {
                keys.push(key);
                accs.push(Accumulator::default());
                keys.len() - 1
            }
        };
        let acc = &mut accs[idx];
        if skip_empty && r.is_empty_sample() {
            acc.skipped += 1;
            continue;
        }
        acc.n += 1;
        acc.visited.push(r.visited_nodes as f64);
        acc.extra.push(r.extra_nodes as f64);
        acc.clusters.push(r.nodes_in_clusters as f64);
        acc.growth.push(r.max_growth_db);
        acc.defined += u64::from(r.defined);
        acc.below += u64::from(r.below(epsilon_max_db));
    }
    keys.into_iter()
        .zip(accs)
        .map(|((d, p, method), a)| {
            let n = a.n.max(1) as f64;
            let f = a.below as f64 / n;
            Aggregate {
                d,
                p: f64::from_bits(p),
                method,
                n: a.n,
                skipped_empty: a.skipped,
                mean_visited_nodes: a.visited.mean(),
                std_visited_nodes: a.visited.std(),
                mean_extra_nodes: a.extra.mean(),
                std_extra_nodes: a.extra.std(),
                mean_nodes_in_clusters: a.clusters.mean(),
                mean_max_growth_db: a.growth.mean(),
                defined_fraction: a.defined as f64 / n,
                fraction_below: f,
                fraction_below_se: (f * (1.0 - f) / n).sqrt(),
            }
        })
        .collect()
}

/// Checked relations between gap kinds on one sample.
pub const INVARIANT_NAMES: [&str; 5] = [
    "bounded agrees with cluster up to the threshold",
    "extra <= cluster when defined",
    "extra defined and <= cluster when cluster <= threshold",
    "cluster <= extra-cg when defined",
    "extra-cg == cluster when cluster <= threshold",
];

/// Violated invariants (0-based indices into [`INVARIANT_NAMES`]) for one
/// sample; relations involving a kind that was not evaluated are skipped.
pub fn violations(outcome: &SampleOutcome, epsilon_max: Weight) -> Vec<usize> {
    let Some(c) = outcome.gap(GapKind::Cluster).and_then(|r| r.value) else {
        return Vec::new();
    };
    let within = c <= epsilon_max;
    let mut bad = Vec::new();
    if let Some(b) = outcome.gap(GapKind::Bounded) {
        let ok = if within { b.value == Some(c) } else { b.value.is_none() };
        if !ok {
            bad.push(0);
        }
    }
    if let Some(e) = outcome.gap(GapKind::Extra) {
        if matches!(e.value, Some(v) if v > c) {
            bad.push(1);
        }
        if within && !matches!(e.value, Some(v) if v <= c) {
            bad.push(2);
        }
    }
    if let Some(cg) = outcome.gap(GapKind::ExtraCg) {
        if matches!(cg.value, Some(v) if v < c) {
            bad.push(3);
        }
        if within && cg.value != Some(c) {
            bad.push(4);
        }
    }
    bad
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScatterPoint {
    pub d: usize,
    pub p: f64,
    pub sample: u64,
    pub cluster_db: f64,
    pub method: GapKind,
    pub other_db: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub samples: u64,
    /// Violation counts, indexed like [`INVARIANT_NAMES`].
    pub violations: [u64; 5],
    pub points: Vec<ScatterPoint>,
}

impl ConsistencyReport {
    pub fn total_violations(&self) -> u64 {
        self.violations.iter().sum()
    }
}

/// Runs the sweep and checks the gap relations on every sample.
pub fn run_consistency(cfg: &SweepConfig) -> Result<ConsistencyReport, HarnessError> {
    cfg.validate()?;
    if !cfg.methods.contains(&GapKind::Cluster) || cfg.methods.len() < 2 {
        return Err(HarnessError::InvalidConfig(
            "consistency needs cluster and at least one other method".into(),
        ));
    }
    let eps = cfg.epsilon_max();
    let mut report = ConsistencyReport {
        samples: 0,
        violations: [0; 5],
        points: Vec::new(),
    };
    for &d in &cfg.distances {
        for &p in &cfg.probs {
            for o in run_cell(cfg, d, p)? {
                if cfg.skip_empty_syndromes && o.is_empty() {
                    continue;
                }
                report.samples += 1;
                for i in violations(&o, eps) {
                    report.violations[i] += 1;
                }
                let c = o
                    .gap(GapKind::Cluster)
                    .and_then(|r| r.value)
                    .expect("cluster gap is always defined");
                for r in o.gaps.iter().filter(|r| r.kind != GapKind::Cluster) {
                    report.points.push(ScatterPoint {
                        d,
                        p,
                        sample: o.sample,
                        cluster_db: c.db(),
                        method: r.kind,
                        other_db: r.value.map(Weight::db),
                    });
                }
            }
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwitchCheck {
    pub samples: u64,
    pub measured_rate: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
    pub user_threshold: f64,
    pub pass: bool,
}

/// 95% Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: u64, n: u64) -> (f64, f64) {
    const Z: f64 = 1.96;
    let n_f = n as f64;
    let phat = k as f64 / n_f;
    let denom = 1.0 + Z * Z / n_f;
    let centre = (phat + Z * Z / (2.0 * n_f)) / denom;
    let half = Z * (phat * (1.0 - phat) / n_f + Z * Z / (4.0 * n_f * n_f)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Rate at which the soft output falls at or below `epsilon_max_db`, i.e.
/// how often a weak decoder would hand over to a strong one.
pub fn switch_check(records: &[SweepRecord], threshold: f64, epsilon_max_db: f64) -> Result<SwitchCheck, HarnessError> {
    if records.is_empty() {
        return Err(HarnessError::NoRecords);
    }
    let n = records.len() as u64;
    let k = records.iter().filter(|r| r.below(epsilon_max_db)).count() as u64;
    let measured_rate = k as f64 / n as f64;
    let (wilson_low, wilson_high) = wilson_interval(k, n);
    Ok(SwitchCheck {
        samples: n,
        measured_rate,
        wilson_low,
        wilson_high,
        user_threshold: threshold,
        pass: measured_rate <= threshold,
    })
}
