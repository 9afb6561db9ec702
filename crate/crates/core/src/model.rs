//! Symmetric stochastic block models: parameters, seeded samplers and the
//! split of the centered adjacency matrix into structure and noise.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::SymMatrix;
use crate::rng::{derive_seed, rng_from_seed, stream};

/// How vertices are assigned to planted clusters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Partition {
    /// Contiguous blocks of the given sizes: vertices `0..sizes[0]` form
    /// cluster 0 and so on.
    Sizes(Vec<usize>),
    /// Each vertex picks one of `k` clusters uniformly at random.
    Uniform { k: usize },
}

/// Parameters of a symmetric two-probability block model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockParams {
    pub n: usize,
    pub p: f64,
    pub q: f64,
    pub partition: Partition,
    /// Sample the diagonal like an intra-cluster pair. With this off, `A_ii = 0`.
    #[serde(default = "default_self_loops")]
    pub self_loops: bool,
}

fn default_self_loops() -> bool {
    true
}

impl BlockParams {
    pub fn with_sizes(sizes: Vec<usize>, p: f64, q: f64) -> Result<Self> {
        let params = Self {
            n: sizes.iter().sum(),
            p,
            q,
            partition: Partition::Sizes(sizes),
            self_loops: true,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn uniform(n: usize, k: usize, p: f64, q: f64) -> Result<Self> {
        let params = Self {
            n,
            p,
            q,
            partition: Partition::Uniform { k },
            self_loops: true,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn self_loops(mut self, on: bool) -> Self {
        self.self_loops = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        validate_probabilities(self.p, self.q)?;
        if self.n == 0 {
            return Err(invalid("vertex count must be at least 1"));
        }
        match &self.partition {
            Partition::Sizes(sizes) => {
                if sizes.is_empty() {
                    return Err(invalid("at least one cluster size is required"));
                }
                if let Some(pos) = sizes.iter().position(|&s| s == 0) {
                    return Err(invalid(format!("cluster {pos} has size 0")));
                }
                let total: usize = sizes.iter().sum();
                if total != self.n {
                    return Err(invalid(format!(
                        "cluster sizes sum to {total}, expected n = {}",
                        self.n
                    )));
                }
            }
            Partition::Uniform { k } => {
                if *k == 0 || *k > self.n {
                    return Err(invalid(format!("k must lie in 1..={}, got {k}", self.n)));
                }
            }
        }
        Ok(())
    }

    pub fn k(&self) -> usize {
        match &self.partition {
            Partition::Sizes(sizes) => sizes.len(),
            Partition::Uniform { k } => *k,
        }
    }

    pub fn gap(&self) -> f64 {
        self.p - self.q
    }

    /// `max{p(1-p), q(1-q)}`, the largest entry variance of the noise part.
    pub fn sigma_squared(&self) -> f64 {
        sigma_squared(self.p, self.q)
    }

    /// Expected cluster size `n / k`.
    pub fn mean_cluster_size(&self) -> f64 {
        self.n as f64 / self.k() as f64
    }
}

/// `max{p(1-p), q(1-q)}`.
pub fn sigma_squared(p: f64, q: f64) -> f64 {
    (p * (1.0 - p)).max(q * (1.0 - q))
}

/// Checks `0 <= q < p <= 1`.
pub fn validate_probabilities(p: f64, q: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&q) {
        return Err(invalid(format!(
            "probabilities must lie in [0, 1], got p = {p}, q = {q}"
        )));
    }
    if p == q {
        return Err(invalid(format!(
            "p = q = {p} carries no planted signal; need q < p"
        )));
    }
    if q > p {
        return Err(invalid(format!(
            "model must be assortative (q < p), got p = {p}, q = {q}"
        )));
    }
    Ok(())
}

/// Block parameters together with the realized ground-truth labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedModel {
    pub params: BlockParams,
    pub labels: Vec<usize>,
    pub seed: u64,
}

impl PlantedModel {
    /// Draws labels (uniform mode) from the label stream of `seed`.
    pub fn new(params: BlockParams, seed: u64) -> Result<Self> {
        params.validate()?;
        let labels = match &params.partition {
            Partition::Sizes(sizes) => contiguous_labels(sizes),
            Partition::Uniform { k } => {
                assign_uniform(params.n, *k, derive_seed(seed, stream::LABELS))?
            }
        };
        Ok(Self {
            params,
            labels,
            seed,
        })
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn k(&self) -> usize {
        self.params.k()
    }

    /// Size of every cluster id `0..k`; clusters may be empty in uniform mode.
    pub fn cluster_sizes(&self) -> Vec<usize> {
        cluster_sizes(&self.labels, self.k())
    }

    /// Size of the largest cluster.
    pub fn s_star(&self) -> usize {
        self.cluster_sizes().into_iter().max().unwrap_or(0)
    }

    /// Label of the largest cluster (lowest id on ties).
    pub fn largest_label(&self) -> usize {
        let sizes = self.cluster_sizes();
        let max = sizes.iter().copied().max().unwrap_or(0);
        sizes.iter().position(|&s| s == max).unwrap_or(0)
    }

    /// Vertices carrying `label`, ascending.
    pub fn members(&self, label: usize) -> Vec<usize> {
        (0..self.n()).filter(|&v| self.labels[v] == label).collect()
    }

    /// Adjacency matrix drawn from the edge stream of the model seed.
    pub fn sample(&self) -> SymMatrix {
        sample_ssbm(self)
    }
}

fn contiguous_labels(sizes: &[usize]) -> Vec<usize> {
    sizes
        .iter()
        .enumerate()
        .flat_map(|(label, &s)| std::iter::repeat_n(label, s))
        .collect()
}

pub fn cluster_sizes(labels: &[usize], k: usize) -> Vec<usize> {
    let k = k.max(labels.iter().map(|&l| l + 1).max().unwrap_or(0));
    let mut sizes = vec![0; k];
    for &l in labels {
        sizes[l] += 1;
    }
    sizes
}

/// Independent uniform labels in `0..k`.
pub fn assign_uniform(n: usize, k: usize, seed: u64) -> Result<Vec<usize>> {
    if k == 0 || k > n {
        return Err(invalid(format!("k must lie in 1..={n}, got {k}")));
    }
    let mut rng = rng_from_seed(seed);
    Ok((0..n).map(|_| rng.gen_range(0..k)).collect())
}

/// Samples the adjacency matrix of `model`.
///
/// Pairs `i <= j` are visited in row-major order and each is drawn once, with
/// probability `p` when the labels agree and `q` otherwise.
pub fn sample_ssbm(model: &PlantedModel) -> SymMatrix {
    sample_block_graph(
        &model.labels,
        model.params.p,
        model.params.q,
        model.params.self_loops,
        derive_seed(model.seed, stream::EDGES),
    )
}

/// Low-level sampler behind [`sample_ssbm`]. Probabilities are only clamped
/// to `[0, 1]`; `p <= q` is allowed here.
pub fn sample_block_graph(
    labels: &[usize],
    p: f64,
    q: f64,
    self_loops: bool,
    seed: u64,
) -> SymMatrix {
    let (p, q) = (p.clamp(0.0, 1.0), q.clamp(0.0, 1.0));
    let mut rng = rng_from_seed(seed);
    SymMatrix::from_upper_fn(labels.len(), |i, j| {
        if i == j && !self_loops {
            return 0.0;
        }
        let prob = if labels[i] == labels[j] { p } else { q };
        if rng.gen_bool(prob) {
            1.0
        } else {
            0.0
        }
    })
}

/// `B = A - q * ones`.
pub fn center(a: &SymMatrix, q: f64) -> SymMatrix {
    a.map(|x| x - q)
}

/// `B = L + R` with `L = E[B]` the planted block matrix and `R` the noise.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureNoiseSplit {
    pub structure: SymMatrix,
    pub noise: SymMatrix,
    pub labels: Vec<usize>,
    pub p: f64,
    pub q: f64,
}

impl StructureNoiseSplit {
    pub fn n(&self) -> usize {
        self.structure.n()
    }

    /// Size of the largest planted cluster.
    pub fn s_star(&self) -> usize {
        cluster_sizes(&self.labels, 0).into_iter().max().unwrap_or(0)
    }
}

/// `(p - q)` on same-label pairs (diagonal included), zero elsewhere.
pub fn structure_matrix(labels: &[usize], p: f64, q: f64) -> SymMatrix {
    let gap = p - q;
    SymMatrix::from_upper_fn(labels.len(), |i, j| {
        if labels[i] == labels[j] {
            gap
        } else {
            0.0
        }
    })
}

/// Splits a centered adjacency matrix of `model` into structure and noise.
///
/// Without self-loops the diagonal of `L` keeps the block value, so the
/// `O(1)` per-row discrepancy lands in `R`.
pub fn split(b: &SymMatrix, model: &PlantedModel) -> Result<StructureNoiseSplit> {
    split_with_labels(b, &model.labels, model.params.p, model.params.q)
}

pub fn split_with_labels(
    b: &SymMatrix,
    labels: &[usize],
    p: f64,
    q: f64,
) -> Result<StructureNoiseSplit> {
    if b.n() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: labels.len(),
            found: b.n(),
        });
    }
    let structure = structure_matrix(labels, p, q);
    let noise = b.sub(&structure)?;
    Ok(StructureNoiseSplit {
        structure,
        noise,
        labels: labels.to_vec(),
        p,
        q,
    })
}
