use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::threshold::{delta_svd, s_star_from_eigenvalue};
use super::{threshold_groups, Algorithm, Clustering, DeltaMode};
use crate::error::{invalid, Result};
use crate::linalg::{
    dot, norm2, scaled_power, sym_eigen, EigenDecomposition, Matrix, ScaledValue, SymMatrix,
    EIGEN_TOL,
};
use crate::model::validate_probabilities;
use crate::rng::{derive_seed, rng_from_seed, stream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvdConfig {
    pub k: usize,
    pub p: f64,
    pub q: f64,
    pub delta_mode: DeltaMode,
}

impl SvdConfig {
    pub fn new(k: usize, p: f64, q: f64) -> Self {
        Self {
            k,
            p,
            q,
            delta_mode: DeltaMode::Theoretical,
        }
    }

    pub fn with_delta(mut self, mode: DeltaMode) -> Self {
        self.delta_mode = mode;
        self
    }

    fn check(&self, n: usize) -> Result<()> {
        validate_probabilities(self.p, self.q)?;
        if n == 0 {
            return Err(invalid("empty matrix"));
        }
        if self.k == 0 || self.k > n {
            return Err(invalid(format!("k must lie in 1..={n}, got {}", self.k)));
        }
        Ok(())
    }

    /// Threshold for `n` projected columns. `lambda1_centered` is the top
    /// eigenvalue of the centered matrix, used by the estimated mode.
    fn delta(&self, n: usize, lambda1_centered: f64) -> Result<f64> {
        match self.delta_mode {
            DeltaMode::Theoretical => delta_svd(n, self.k, self.p, self.q),
            DeltaMode::Estimated => {
                let s = s_star_from_eigenvalue(lambda1_centered, self.p, self.q, n);
                Ok(0.5 * (self.p - self.q) * (s as f64).sqrt())
            }
            DeltaMode::Explicit(v) => Ok(v),
        }
    }
}

/// Eigendecomposition, projected coordinates and threshold behind an SVD clustering.
#[derive(Debug, Clone)]
pub struct SvdRun {
    pub decomposition: EigenDecomposition,
    /// Row `i` holds the top-`k` eigenbasis coordinates of column `i`.
    pub coordinates: Matrix,
    pub delta: f64,
    pub clustering: Clustering,
}

/// Top-`k` eigenbasis coordinates of every column of `m`.
fn project_columns(decomp: &EigenDecomposition, k: usize, m: &Matrix) -> Matrix {
    Matrix::from_fn(m.cols(), k, |i, j| dot(decomp.vector(j), m.row(i)))
}

fn run_projection(m: &SymMatrix, cfg: &SvdConfig, algorithm: Algorithm, shift: f64) -> Result<SvdRun> {
    let n = m.n();
    cfg.check(n)?;
    let decomposition = sym_eigen(m, EIGEN_TOL)?;
    let delta = cfg.delta(n, decomposition.value(0) - shift)?;
    // Columns equal rows by symmetry.
    let coordinates = project_columns(&decomposition, cfg.k, m.as_matrix());
    let groups = threshold_groups(&coordinates, delta);
    let clustering = Clustering::new(n, groups, algorithm, ScaledValue::from_f64(delta), None);
    Ok(SvdRun {
        decomposition,
        coordinates,
        delta,
        clustering,
    })
}

/// Centered-SVD on `B = A - qJ`.
pub fn run_centered_svd(b: &SymMatrix, cfg: &SvdConfig) -> Result<SvdRun> {
    run_projection(b, cfg, Algorithm::Csvd, 0.0)
}

pub fn centered_svd_cluster(b: &SymMatrix, cfg: &SvdConfig) -> Result<Clustering> {
    Ok(run_centered_svd(b, cfg)?.clustering)
}

/// SVD on the raw adjacency matrix.
pub fn run_svd1(a: &SymMatrix, cfg: &SvdConfig) -> Result<SvdRun> {
    // lambda_1(A) exceeds lambda_1(B) by roughly qn.
    let shift = cfg.q * a.n() as f64;
    run_projection(a, cfg, Algorithm::Svd1, shift)
}

pub fn svd1_cluster(a: &SymMatrix, cfg: &SvdConfig) -> Result<Clustering> {
    Ok(run_svd1(a, cfg)?.clustering)
}

fn random_halves(n: usize, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut rng = rng_from_seed(derive_seed(seed, stream::HALVING));
    for _ in 0..2 {
        let (mut first, mut second) = (Vec::new(), Vec::new());
        for v in 0..n {
            if rng.gen_bool(0.5) {
                first.push(v);
            } else {
                second.push(v);
            }
        }
        if !first.is_empty() && !second.is_empty() {
            return Ok((first, second));
        }
    }
    Err(invalid(format!("random halving of {n} vertices left an empty half twice")))
}

/// Random halving: cluster the second half by projecting its columns onto the
/// top-`k` eigenspace of the first half's induced submatrix, then attach each
/// first-half vertex to the discovered group it is densest toward.
pub fn svd2_cluster(a: &SymMatrix, cfg: &SvdConfig, seed: u64) -> Result<Clustering> {
    let n = a.n();
    if n < 2 {
        return Err(invalid("random halving needs at least 2 vertices"));
    }
    validate_probabilities(cfg.p, cfg.q)?;
    let (v1, v2) = random_halves(n, seed)?;
    if cfg.k == 0 || cfg.k > v1.len() {
        return Err(invalid(format!("k must lie in 1..={}, got {}", v1.len(), cfg.k)));
    }
    let a1 = a.submatrix(&v1);
    let decomp = sym_eigen(&a1, EIGEN_TOL)?;
    let shift = cfg.q * v1.len() as f64;
    let delta = cfg.delta(v1.len(), decomp.value(0) - shift)?;

    // Row t: column v2[t] of A restricted to rows v1.
    let cross = Matrix::from_fn(v2.len(), v1.len(), |t, i| a.get(v1[i], v2[t]));
    let coordinates = Matrix::from_fn(v2.len(), cfg.k, |t, j| dot(decomp.vector(j), cross.row(t)));
    let local = threshold_groups(&coordinates, delta);
    let mut groups: Vec<Vec<usize>> = local
        .iter()
        .map(|g| g.iter().map(|&t| v2[t]).collect())
        .collect();

    // Targets are the k largest second-half groups (earliest first on ties).
    let mut order: Vec<usize> = (0..groups.len()).collect();
    order.sort_by(|&x, &y| groups[y].len().cmp(&groups[x].len()).then(x.cmp(&y)));
    order.truncate(cfg.k);
    order.sort_unstable();
    for &u in &v1 {
        let mut best = order[0];
        let mut best_density = f64::NEG_INFINITY;
        for &g in &order {
            let members = &groups[g];
            let density =
                members.iter().map(|&v| a.get(u, v)).sum::<f64>() / members.len() as f64;
            if density > best_density {
                best_density = density;
                best = g;
            }
        }
        groups[best].push(u);
    }
    Ok(Clustering::new(
        n,
        groups,
        Algorithm::Svd2,
        ScaledValue::from_f64(delta),
        None,
    ))
}

/// `max_i ||P u_i - f_r B^{r+1}_i|| / Delta` with `f_r = 1 / ((p - q) s)^r`,
/// `s = n / k` and `Delta = 0.5 (p - q) sqrt(n / k)`.
pub fn power_svd_residual(b: &SymMatrix, k: usize, r: u32, p: f64, q: f64) -> Result<f64> {
    let decomp = sym_eigen(b, EIGEN_TOL)?;
    power_svd_residual_with(b, &decomp, k, r, p, q)
}

/// As [`power_svd_residual`] with a precomputed eigendecomposition of `b`.
pub fn power_svd_residual_with(
    b: &SymMatrix,
    decomp: &EigenDecomposition,
    k: usize,
    r: u32,
    p: f64,
    q: f64,
) -> Result<f64> {
    let n = b.n();
    if decomp.n() != n {
        return Err(crate::Error::DimensionMismatch {
            expected: n,
            found: decomp.n(),
        });
    }
    if r == 0 {
        return Err(invalid("power exponent must be at least 1"));
    }
    let delta = delta_svd(n, k, p, q)?;
    let s = n as f64 / k as f64;
    let ln_f = -f64::from(r) * ((p - q) * s).ln();
    let power = scaled_power(b, r + 1)?;
    let factor = (power.log_scale() + ln_f).exp();
    let coords = project_columns(decomp, k, b.as_matrix());
    let mut worst = 0.0_f64;
    let mut projected = vec![0.0; n];
    for i in 0..n {
        projected.iter_mut().for_each(|x| *x = 0.0);
        for j in 0..k {
            let c = coords.get(i, j);
            for (x, &v) in projected.iter_mut().zip(decomp.vector(j)) {
                *x += c * v;
            }
        }
        let diff: Vec<f64> = projected
            .iter()
            .zip(power.base().row(i))
            .map(|(x, y)| x - factor * y)
            .collect();
        worst = worst.max(norm2(&diff));
    }
    Ok(worst / delta)
}
