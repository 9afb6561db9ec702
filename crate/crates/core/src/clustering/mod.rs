//! Threshold clustering on powered rows and on eigenspace projections.

mod power;
mod svd;
mod threshold;
mod union_find;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{squared_distance, Matrix, ScaledValue};

pub use power::{power_iteration_cluster, run_power, PowerConfig, PowerRun};
pub use svd::{
    centered_svd_cluster, power_svd_residual, power_svd_residual_with, run_centered_svd,
    run_svd1, svd1_cluster, svd2_cluster, SvdConfig, SvdRun,
};
pub use threshold::{default_power, delta_power, delta_svd, estimate_s_star, s_star_from_eigenvalue};
pub use union_find::DisjointSets;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    /// Row distances of `B^r`.
    Power,
    /// Projection of the centered matrix onto its top-`k` eigenspace.
    Csvd,
    /// Projection of the raw adjacency matrix onto its top-`k` eigenspace.
    Svd1,
    /// Random halving, projection of one half onto the other's eigenspace.
    Svd2,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Power,
        Algorithm::Csvd,
        Algorithm::Svd1,
        Algorithm::Svd2,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::Power => "power",
            Algorithm::Csvd => "csvd",
            Algorithm::Svd1 => "svd1",
            Algorithm::Svd2 => "svd2",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| invalid(format!("unknown algorithm '{s}' (expected power|csvd|svd1|svd2)")))
    }
}

/// How the distance threshold is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaMode {
    /// Formula value from known model parameters.
    #[default]
    Theoretical,
    /// Formula value with the largest cluster size estimated from `lambda_1(B)`.
    Estimated,
    /// A fixed threshold in the units of the compared vectors.
    Explicit(f64),
}

impl FromStr for DeltaMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "theory" | "theoretical" => Ok(DeltaMode::Theoretical),
            "estimate" | "estimated" => Ok(DeltaMode::Estimated),
            other => match other.parse::<f64>() {
                Ok(v) if v > 0.0 && v.is_finite() => Ok(DeltaMode::Explicit(v)),
                _ => Err(invalid(format!(
                    "delta must be 'theory', 'estimate' or a positive number, got '{other}'"
                ))),
            },
        }
    }
}

/// Groups produced by one of the algorithms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    pub n: usize,
    /// Disjoint, each sorted ascending, ordered by smallest member.
    pub groups: Vec<Vec<usize>>,
    pub algorithm: Algorithm,
    /// Threshold applied to pair distances.
    pub threshold: ScaledValue,
    /// Power exponent, for the power method.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub r: Option<u32>,
    /// Index into `groups` of the largest group.
    pub largest: usize,
}

impl Clustering {
    pub fn new(
        n: usize,
        mut groups: Vec<Vec<usize>>,
        algorithm: Algorithm,
        threshold: ScaledValue,
        r: Option<u32>,
    ) -> Self {
        for g in &mut groups {
            g.sort_unstable();
        }
        groups.retain(|g| !g.is_empty());
        groups.sort_by_key(|g| g[0]);
        let largest = largest_index(&groups);
        Self {
            n,
            groups,
            algorithm,
            threshold,
            r,
            largest,
        }
    }

    pub fn largest_group(&self) -> &[usize] {
        self.groups.get(self.largest).map_or(&[], Vec::as_slice)
    }

    /// Group index per vertex; `None` for vertices outside every group.
    pub fn assignment(&self) -> Vec<Option<usize>> {
        let mut out = vec![None; self.n];
        for (g, members) in self.groups.iter().enumerate() {
            for &v in members {
                out[v] = Some(g);
            }
        }
        out
    }

    pub fn covers_all(&self) -> bool {
        self.groups.iter().map(Vec::len).sum::<usize>() == self.n
    }
}

fn largest_index(groups: &[Vec<usize>]) -> usize {
    let mut best = 0;
    for (i, g) in groups.iter().enumerate() {
        if g.len() > groups[best].len() {
            best = i;
        }
    }
    best
}

/// Connected components of the graph joining rows of `points` at distance
/// `<= threshold`.
pub fn threshold_groups(points: &Matrix, threshold: f64) -> Vec<Vec<usize>> {
    let n = points.rows();
    let limit = threshold * threshold;
    let close: Vec<Vec<usize>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let row = points.row(i);
            (i + 1..n)
                .filter(|&j| squared_distance(row, points.row(j)) <= limit)
                .collect()
        })
        .collect();
    let mut sets = DisjointSets::new(n);
    for (i, js) in close.iter().enumerate() {
        for &j in js {
            sets.union(i, j);
        }
    }
    sets.groups()
}
