//! One algorithm on one adjacency matrix, with optional scoring.

use anyhow::{bail, Result};
use serde::Serialize;

use sbm_core::clustering::{
    run_centered_svd, run_power, run_svd1, svd2_cluster, Algorithm, Clustering, DeltaMode,
    PowerConfig, SvdConfig,
};
use sbm_core::evaluation::{compare, separation_gap, RecoveryReport};
use sbm_core::linalg::SymMatrix;
use sbm_core::model::{center, cluster_sizes};

#[derive(Debug, Clone)]
pub struct AlgoOptions {
    pub algorithm: Algorithm,
    pub k: Option<usize>,
    pub p: f64,
    pub q: f64,
    pub r: Option<u32>,
    pub delta: DeltaMode,
    pub s_star: Option<usize>,
    /// Halving seed for SVD-II.
    pub seed: u64,
    pub peel: u32,
}

/// Pairwise distance extremes over the threshold.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GapStats {
    pub within_over_delta: f64,
    pub cross_over_delta: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub clustering: Clustering,
    pub delta_mode: DeltaMode,
    pub report: Option<RecoveryReport>,
    pub gap: Option<GapStats>,
}

fn largest_label(labels: &[usize]) -> usize {
    let sizes = cluster_sizes(labels, 0);
    let max = sizes.iter().copied().max().unwrap_or(0);
    sizes.iter().position(|&s| s == max).unwrap_or(0)
}

fn distinct_labels(labels: &[usize]) -> usize {
    cluster_sizes(labels, 0).iter().filter(|&&s| s > 0).count()
}

/// Runs the selected algorithm on adjacency matrix `a`. With `labels`, the
/// outcome carries a recovery report and separation statistics.
pub fn run_algorithm(a: &SymMatrix, opts: &AlgoOptions, labels: Option<&[usize]>) -> Result<Outcome> {
    if let Some(l) = labels {
        if l.len() != a.n() {
            bail!("labels cover {} vertices, graph has {}", l.len(), a.n());
        }
    }
    let mut delta_mode = opts.delta;
    let svd_k = || -> Result<usize> {
        match (opts.k, labels) {
            (Some(k), _) => Ok(k),
            (None, Some(l)) => Ok(distinct_labels(l)),
            (None, None) => bail!("--k is required for {} without a labels file", opts.algorithm),
        }
    };
    let (clustering, gap) = match opts.algorithm {
        Algorithm::Power => {
            let b = center(a, opts.q);
            let s_star = opts.s_star.or_else(|| labels.map(|l| {
                cluster_sizes(l, 0).into_iter().max().unwrap_or(1)
            }));
            if delta_mode == DeltaMode::Theoretical && s_star.is_none() {
                // No model knowledge to build the formula threshold from.
                delta_mode = DeltaMode::Estimated;
            }
            let mut cfg = PowerConfig::new(opts.p, opts.q).with_delta(delta_mode).with_peeling(opts.peel);
            cfg.r = opts.r;
            cfg.s_star_hint = s_star;
            let run = run_power(&b, &cfg)?;
            let gap = match labels {
                Some(l) => {
                    let g = separation_gap(run.power.base().as_matrix(), l, Some(largest_label(l)))?;
                    let unit = run.unit_threshold();
                    Some(GapStats {
                        within_over_delta: g.max_within / unit,
                        cross_over_delta: g.min_cross / unit,
                        ratio: g.ratio(),
                    })
                }
                None => None,
            };
            let clustering = if opts.peel > 0 {
                sbm_core::clustering::power_iteration_cluster(&b, &cfg)?
            } else {
                run.clustering
            };
            (clustering, gap)
        }
        Algorithm::Csvd | Algorithm::Svd1 => {
            let cfg = SvdConfig::new(svd_k()?, opts.p, opts.q).with_delta(delta_mode);
            let run = if opts.algorithm == Algorithm::Csvd {
                run_centered_svd(&center(a, opts.q), &cfg)?
            } else {
                run_svd1(a, &cfg)?
            };
            let gap = match labels {
                Some(l) => {
                    let g = separation_gap(&run.coordinates, l, None)?;
                    Some(GapStats {
                        within_over_delta: g.max_within / run.delta,
                        cross_over_delta: g.min_cross / run.delta,
                        ratio: g.ratio(),
                    })
                }
                None => None,
            };
            (run.clustering, gap)
        }
        Algorithm::Svd2 => {
            let cfg = SvdConfig::new(svd_k()?, opts.p, opts.q).with_delta(delta_mode);
            (svd2_cluster(a, &cfg, opts.seed)?, None)
        }
    };
    let report = match labels {
        Some(l) => Some(compare(&clustering, l)?),
        None => None,
    };
    Ok(Outcome {
        clustering,
        delta_mode,
        report,
        gap,
    })
}
