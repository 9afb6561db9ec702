//! Comparison of recovered groups against planted labels.

use serde::{Deserialize, Serialize};

use crate::clustering::Clustering;
use crate::error::{invalid, Result};
use crate::linalg::{distance, Matrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryReport {
    /// Every planted cluster appears exactly as a found group.
    pub exact_all: bool,
    /// The largest planted cluster appears exactly as a found group.
    pub exact_largest: bool,
    /// Fraction of vertices whose group is matched to their planted cluster.
    pub accuracy: f64,
    /// Jaccard index of each planted cluster with its matched group (0 if unmatched).
    pub per_cluster_jaccard: Vec<f64>,
}

fn planted_groups(truth: &[usize]) -> Vec<Vec<usize>> {
    let k = truth.iter().max().map_or(0, |m| m + 1);
    let mut groups = vec![Vec::new(); k];
    for (v, &l) in truth.iter().enumerate() {
        groups[l].push(v);
    }
    groups
}

/// Greedy maximum-overlap matching of found groups to planted clusters.
pub fn compare(found: &Clustering, truth: &[usize]) -> Result<RecoveryReport> {
    compare_groups(&found.groups, truth)
}

pub fn compare_groups(found: &[Vec<usize>], truth: &[usize]) -> Result<RecoveryReport> {
    let n = truth.len();
    let mut seen = vec![false; n];
    for &v in found.iter().flatten() {
        if v >= n {
            return Err(invalid(format!("found vertex {v} outside 0..{n}")));
        }
        if seen[v] {
            return Err(invalid(format!("vertex {v} appears in more than one group")));
        }
        seen[v] = true;
    }
    let planted = planted_groups(truth);
    let k = planted.len();

    // overlap[g][c] = |found g ∩ planted c|
    let mut overlaps = Vec::new();
    for (g, members) in found.iter().enumerate() {
        let mut counts = vec![0usize; k];
        for &v in members {
            counts[truth[v]] += 1;
        }
        for (c, &o) in counts.iter().enumerate() {
            if o > 0 {
                overlaps.push((o, g, c));
            }
        }
    }
    overlaps.sort_by(|x, y| y.0.cmp(&x.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let mut match_of_cluster = vec![None; k];
    let mut group_used = vec![false; found.len()];
    let mut correct = 0usize;
    for (o, g, c) in overlaps {
        if group_used[g] || match_of_cluster[c].is_some() {
            continue;
        }
        group_used[g] = true;
        match_of_cluster[c] = Some((g, o));
        correct += o;
    }

    let mut per_cluster_jaccard = Vec::with_capacity(k);
    let mut exact = vec![false; k];
    for c in 0..k {
        let j = match match_of_cluster[c] {
            Some((g, o)) => {
                let union = found[g].len() + planted[c].len() - o;
                exact[c] = o == planted[c].len() && o == found[g].len();
                if union == 0 { 0.0 } else { o as f64 / union as f64 }
            }
            None => {
                exact[c] = planted[c].is_empty();
                0.0
            }
        };
        per_cluster_jaccard.push(j);
    }
    let largest = (0..k).max_by_key(|&c| (planted[c].len(), std::cmp::Reverse(c)));
    Ok(RecoveryReport {
        exact_all: exact.iter().all(|&e| e),
        exact_largest: largest.is_some_and(|c| exact[c]),
        accuracy: if n == 0 { 1.0 } else { correct as f64 / n as f64 },
        per_cluster_jaccard,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoverySummary {
    pub trials: usize,
    pub mean_accuracy: f64,
    pub min_accuracy: f64,
    pub exact_all_rate: f64,
    pub exact_largest_rate: f64,
}

pub fn aggregate(reports: &[RecoveryReport]) -> Result<RecoverySummary> {
    if reports.is_empty() {
        return Err(invalid("cannot aggregate an empty list of reports"));
    }
    let t = reports.len() as f64;
    let rate = |f: fn(&RecoveryReport) -> bool| reports.iter().filter(|r| f(r)).count() as f64 / t;
    Ok(RecoverySummary {
        trials: reports.len(),
        mean_accuracy: reports.iter().map(|r| r.accuracy).sum::<f64>() / t,
        min_accuracy: reports.iter().map(|r| r.accuracy).fold(f64::INFINITY, f64::min),
        exact_all_rate: rate(|r| r.exact_all),
        exact_largest_rate: rate(|r| r.exact_largest),
    })
}

/// Extremes of pairwise row distances split by planted membership.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparationGap {
    /// Largest distance between two vertices of the same (focus) cluster.
    pub max_within: f64,
    /// Smallest distance between a (focus) vertex and a vertex of another cluster.
    pub min_cross: f64,
}

impl SeparationGap {
    /// `min_cross / max_within`; infinite when all within-distances vanish.
    pub fn ratio(&self) -> f64 {
        if self.max_within == 0.0 {
            f64::INFINITY
        } else {
            self.min_cross / self.max_within
        }
    }
}

/// Separation of `points` rows by `labels`. With `focus`, only pairs touching
/// that cluster count.
pub fn separation_gap(points: &Matrix, labels: &[usize], focus: Option<usize>) -> Result<SeparationGap> {
    let n = points.rows();
    if labels.len() != n {
        return Err(crate::Error::DimensionMismatch {
            expected: n,
            found: labels.len(),
        });
    }
    let mut max_within = 0.0_f64;
    let mut min_cross = f64::INFINITY;
    for i in 0..n {
        for j in i + 1..n {
            let same = labels[i] == labels[j];
            let relevant = match focus {
                None => true,
                Some(f) => {
                    if same {
                        labels[i] == f
                    } else {
                        labels[i] == f || labels[j] == f
                    }
                }
            };
            if !relevant {
                continue;
            }
            let d = distance(points.row(i), points.row(j));
            if same {
                max_within = max_within.max(d);
            } else {
                min_cross = min_cross.min(d);
            }
        }
    }
    Ok(SeparationGap { max_within, min_cross })
}
