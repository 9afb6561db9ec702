//! Parameter sweeps over seeded trials, written as CSV.

use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use sbm_core::clustering::{Algorithm, DeltaMode};
use sbm_core::model::{BlockParams, Partition, PlantedModel};
use sbm_core::rng::derive_seed;

use crate::run::{run_algorithm, AlgoOptions};

pub const CSV_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub n: Option<usize>,
    /// Uniform cluster assignment over `k` clusters.
    pub k: Option<usize>,
    /// Fixed contiguous cluster sizes; overrides `n` and `k`.
    pub sizes: Option<Vec<usize>>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub algorithms: Vec<Algorithm>,
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "yes")]
    pub self_loops: bool,
    pub r: Option<u32>,
    /// `theory`, `estimate` or a positive number.
    #[serde(default = "theory")]
    pub delta: String,
}

fn yes() -> bool {
    true
}

fn theory() -> String {
    "theory".into()
}

/// One `(p, q)` grid point.
#[derive(Debug, Clone, Copy)]
struct Point {
    index: usize,
    p: f64,
    q: f64,
}

impl SweepSpec {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let spec: SweepSpec =
            serde_json::from_str(&text).with_context(|| format!("invalid sweep spec {}", path.display()))?;
        spec.validate()?;
        Ok(spec)
    }

    /// Collects every problem with the spec into one error.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.trials == 0 {
            problems.push("trials: must be at least 1".to_string());
        }
        if self.algorithms.is_empty() {
            problems.push("algorithms: at least one is required".to_string());
        }
        if self.p.is_empty() {
            problems.push("p: at least one value is required".to_string());
        }
        if self.q.is_empty() {
            problems.push("q: at least one value is required".to_string());
        }
        if let Err(e) = self.delta.parse::<DeltaMode>() {
            problems.push(format!("delta: {e}"));
        }
        if self.r == Some(0) {
            problems.push("r: must be at least 1".to_string());
        }
        match (&self.sizes, self.n, self.k) {
            (Some(_), _, _) => {}
            (None, Some(_), Some(_)) => {}
            _ => problems.push("n, k: both are required unless sizes is given".to_string()),
        }
        for &p in &self.p {
            for &q in &self.q {
                if let Err(e) = self.params(p, q) {
                    problems.push(format!("p = {p}, q = {q}: {e}"));
                }
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            bail!("invalid sweep spec:\n  {}", problems.join("\n  "))
        }
    }

    fn params(&self, p: f64, q: f64) -> Result<BlockParams> {
        let params = match (&self.sizes, self.n, self.k) {
            (Some(sizes), _, _) => BlockParams::with_sizes(sizes.clone(), p, q)?,
            (None, Some(n), Some(k)) => BlockParams::uniform(n, k, p, q)?,
            _ => bail!("n and k are required unless sizes is given"),
        };
        Ok(params.self_loops(self.self_loops))
    }

    fn points(&self) -> Vec<Point> {
        let mut out = Vec::new();
        for &p in &self.p {
            for &q in &self.q {
                out.push(Point { index: out.len(), p, q });
            }
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub version: u32,
    pub point: usize,
    pub trial: usize,
    pub n: usize,
    pub k: usize,
    pub p: f64,
    pub q: f64,
    pub seed: u64,
    pub algorithm: String,
    pub accuracy: f64,
    pub exact_all: bool,
    pub exact_largest: bool,
    pub groups: usize,
    pub gap_within: Option<f64>,
    pub gap_cross: Option<f64>,
    pub gap_ratio: Option<f64>,
    pub wall_ms: Option<u64>,
}

/// Seed of trial `trial` at grid point `point`.
pub fn trial_seed(base: u64, point: usize, trial: usize) -> u64 {
    derive_seed(derive_seed(base, point as u64), trial as u64)
}

pub fn run_sweep(spec: &SweepSpec, timing: bool) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let delta: DeltaMode = spec.delta.parse()?;
    let jobs: Vec<(Point, usize)> = spec
        .points()
        .into_iter()
        .flat_map(|pt| (0..spec.trials).map(move |t| (pt, t)))
        .collect();
    let mut rows: Vec<SweepRow> = jobs
        .par_iter()
        .map(|&(pt, trial)| -> Result<Vec<SweepRow>> {
            let seed = trial_seed(spec.seed, pt.index, trial);
            let params = spec.params(pt.p, pt.q)?;
            let model = PlantedModel::new(params, seed)?;
            let a = model.sample();
            let k = match &model.params.partition {
                Partition::Sizes(s) => s.len(),
                Partition::Uniform { k } => *k,
            };
            let mut out = Vec::new();
            for &algorithm in &spec.algorithms {
                let opts = AlgoOptions {
                    algorithm,
                    k: Some(k),
                    p: pt.p,
                    q: pt.q,
                    r: spec.r,
                    delta,
                    s_star: Some(model.s_star()),
                    seed,
                    peel: 0,
                };
                let start = Instant::now();
                let outcome = run_algorithm(&a, &opts, Some(&model.labels))?;
                let elapsed = start.elapsed().as_millis() as u64;
                let report = outcome.report.expect("labels were supplied");
                out.push(SweepRow {
                    version: CSV_VERSION,
                    point: pt.index,
                    trial,
                    n: model.n(),
                    k,
                    p: pt.p,
                    q: pt.q,
                    seed,
                    algorithm: algorithm.to_string(),
                    accuracy: report.accuracy,
                    exact_all: report.exact_all,
                    exact_largest: report.exact_largest,
                    groups: outcome.clustering.groups.len(),
                    gap_within: outcome.gap.map(|g| g.within_over_delta),
                    gap_cross: outcome.gap.map(|g| g.cross_over_delta),
                    gap_ratio: outcome.gap.map(|g| g.ratio),
                    wall_ms: timing.then_some(elapsed),
                });
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    rows.sort_by_key(|r| (r.point, r.trial));
    Ok(rows)
}

pub fn write_csv(rows: &[SweepRow], out: &mut impl std::io::Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record([
            "version", "point", "trial", "n", "k", "p", "q", "seed", "algorithm", "accuracy",
            "exact_all", "exact_largest", "groups", "gap_within", "gap_cross", "gap_ratio", "wall_ms",
        ])?;
    }
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
