//! Empirical audits of entry-size and spectral-scaling bounds.

use serde::{Deserialize, Serialize};

use sbm_core::clustering::default_power;
use sbm_core::linalg::{sym_eigenvalues, Matrix, SymMatrix};
use sbm_core::model::StructureNoiseSplit;
use sbm_core::{Error, Result};

/// `calibration * sqrt(p(1-q)) * (ln n)^log_power * shape`, where the shape
/// factor depends on the audited product.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub calibration: f64,
    pub log_power: i32,
    /// Largest accepted `max entry / envelope`.
    pub bar: f64,
}

impl Envelope {
    /// Defaults for `R^t L`: calibration 1 and `(ln n)^6`.
    pub fn rtl() -> Self {
        Self {
            calibration: 1.0,
            log_power: 6,
            bar: 1.0,
        }
    }

    /// Defaults for `L^t R`: calibration 96 and `ln n`.
    pub fn ltr() -> Self {
        Self {
            calibration: 96.0,
            log_power: 1,
            bar: 1.0,
        }
    }

    pub fn with_log_power(mut self, log_power: i32) -> Self {
        self.log_power = log_power;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryAudit {
    pub t: u32,
    pub max_entry: f64,
    pub envelope: f64,
    pub ratio: f64,
    pub pass: bool,
    /// Whether `p(1-q) n / t >= 1`, the size condition the concentration step assumes
    /// for a part of a random partition.
    pub in_regime: bool,
}

fn power_times(x: &Matrix, t: u32, tail: &Matrix) -> Result<Matrix> {
    let mut acc = tail.clone();
    for _ in 0..t {
        acc = x.matmul(&acc)?;
    }
    Ok(acc)
}

fn check_t(t: u32, n: usize) -> Result<()> {
    let max = default_power(n);
    if t == 0 || t > max {
        return Err(Error::InvalidParameter(format!("t must lie in 1..={max}, got {t}")));
    }
    Ok(())
}

fn entry_audit(
    product: &Matrix,
    envelope: f64,
    t: u32,
    n: usize,
    p: f64,
    q: f64,
    bar: f64,
) -> EntryAudit {
    let max_entry = product.max_abs();
    let ratio = max_entry / envelope;
    EntryAudit {
        t,
        max_entry,
        envelope,
        ratio,
        pass: ratio <= bar,
        in_regime: p * (1.0 - q) * n as f64 / f64::from(t) >= 1.0,
    }
}

/// Largest `|(R^t L)_{a,b}|` against
/// `c sqrt(p(1-q)) (ln n)^e (p-q) sqrt(s*) ((p-q) s*)^(t-1)`.
pub fn audit_entry_bound_rtl(
    split: &StructureNoiseSplit,
    t: u32,
    s_star: usize,
    p: f64,
    q: f64,
    env: Envelope,
) -> Result<EntryAudit> {
    let n = split.n();
    check_t(t, n)?;
    let product = power_times(split.noise.as_matrix(), t, split.structure.as_matrix())?;
    let s = s_star as f64;
    let envelope = env.calibration
        * (p * (1.0 - q)).sqrt()
        * (n as f64).ln().powi(env.log_power)
        * (p - q)
        * s.sqrt()
        * ((p - q) * s).powi(t as i32 - 1);
    Ok(entry_audit(&product, envelope, t, n, p, q, env.bar))
}

/// Largest `|(L^t R)_{a,b}|` against
/// `c sqrt(p(1-q)) sqrt(s*) (ln n)^e (p-q)^t s*^(t-1)`.
pub fn audit_entry_bound_ltr(
    split: &StructureNoiseSplit,
    t: u32,
    s_star: usize,
    p: f64,
    q: f64,
    env: Envelope,
) -> Result<EntryAudit> {
    let n = split.n();
    check_t(t, n)?;
    let product = power_times(split.structure.as_matrix(), t, split.noise.as_matrix())?;
    let s = s_star as f64;
    let envelope = env.calibration
        * (p * (1.0 - q)).sqrt()
        * s.sqrt()
        * (n as f64).ln().powi(env.log_power)
        * (p - q).powi(t as i32)
        * s.powi(t as i32 - 1);
    Ok(entry_audit(&product, envelope, t, n, p, q, env.bar))
}

/// How far `f_r lambda_i^r` is from 1 on the top `k` eigenvalues and from 0 on the rest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionScaling {
    /// `max_{i<k} |f_r lambda_i^r - 1|`.
    pub top_deviation: f64,
    /// `max_{j>=k} |f_r lambda_j^r|`; 0 when `k = n`.
    pub tail_max: f64,
    pub top_values: Vec<f64>,
}

/// `f_r = 1 / ((p-q) n/k)^r`, evaluated in the log domain.
pub fn audit_projection_scaling(b: &SymMatrix, k: usize, r: u32, p: f64, q: f64) -> Result<ProjectionScaling> {
    let n = b.n();
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!("k must lie in 1..={n}, got {k}")));
    }
    if !(p > q) {
        return Err(Error::InvalidParameter(format!("need p > q, got p = {p}, q = {q}")));
    }
    let values = sym_eigenvalues(b, 1e-14)?;
    let s = n as f64 / k as f64;
    let ln_f = -f64::from(r) * ((p - q) * s).ln();
    let scaled = |lambda: f64| {
        if lambda == 0.0 {
            return 0.0;
        }
        let sign = if lambda < 0.0 && r % 2 == 1 { -1.0 } else { 1.0 };
        sign * (ln_f + f64::from(r) * lambda.abs().ln()).exp()
    };
    let top_deviation = values[..k]
        .iter()
        .map(|&l| (scaled(l) - 1.0).abs())
        .fold(0.0, f64::max);
    let tail_max = values[k..].iter().map(|&l| scaled(l).abs()).fold(0.0, f64::max);
    Ok(ProjectionScaling {
        top_deviation,
        tail_max,
        top_values: values[..k].to_vec(),
    })
}
