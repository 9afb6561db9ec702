//! Exhaustive monomial and random-partition oracles for entries of `R^t L`.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use sbm_core::linalg::SymMatrix;
use sbm_core::rng::rng_from_seed;
use sbm_core::{Error, Result};

use crate::encoding::{encode_index_list, EncodingClass};

/// Cap on `n^t` for monomial enumeration.
pub const MAX_MONOMIALS: u64 = 300_000;
/// Cap on `t^n` for partition enumeration.
pub const MAX_PARTITIONS: u64 = 10_000;

fn checked_pow(base: usize, exp: usize, cap: u64, what: &str) -> Result<u64> {
    let mut acc: u64 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base as u64);
        if acc > cap {
            return Err(Error::Resource(format!(
                "{what}: {base}^{exp} exceeds the cap of {cap}"
            )));
        }
    }
    Ok(acc)
}

fn check_inputs(r: &SymMatrix, l: &SymMatrix, a: usize, b: usize, t: usize) -> Result<usize> {
    let n = r.n();
    if l.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: l.n(),
        });
    }
    if a >= n || b >= n {
        return Err(Error::InvalidParameter(format!(
            "endpoints ({a}, {b}) must lie in 0..{n}"
        )));
    }
    if t == 0 {
        return Err(Error::InvalidParameter("t must be at least 1".into()));
    }
    Ok(n)
}

/// `R_{a,l1} R_{l1,l2} ... R_{l(t-1),lt} L_{lt,b}`.
pub fn monomial(r: &SymMatrix, l: &SymMatrix, a: usize, b: usize, indices: &[usize]) -> f64 {
    let mut prev = a;
    let mut prod = 1.0;
    for &i in indices {
        prod *= r.get(prev, i);
        prev = i;
    }
    prod * l.get(prev, b)
}

/// `(R^t L)_{a,b}` by repeated vector-matrix products.
pub fn rtl_entry(r: &SymMatrix, l: &SymMatrix, a: usize, b: usize, t: usize) -> f64 {
    let n = r.n();
    let mut row: Vec<f64> = r.row(a).to_vec();
    for _ in 1..t {
        let mut next = vec![0.0; n];
        for (k, &w) in row.iter().enumerate() {
            for (x, &y) in next.iter_mut().zip(r.row(k)) {
                *x += w * y;
            }
        }
        row = next;
    }
    row.iter().enumerate().map(|(k, &w)| w * l.get(k, b)).sum()
}

/// Monomial sums grouped by encoding class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSums {
    pub classes: Vec<(EncodingClass, f64)>,
    /// Sum over all classes.
    pub total: f64,
    /// `(R^t L)_{a,b}` from the matrix product.
    pub direct: f64,
    /// Sum of absolute class sums; bounds `|direct|`.
    pub abs_class_total: f64,
}

impl GroupSums {
    /// `|total - direct| / max(|direct|, max |monomial class|)`.
    pub fn relative_error(&self) -> f64 {
        let scale = self
            .classes
            .iter()
            .fold(self.direct.abs(), |acc, (_, s)| acc.max(s.abs()));
        if scale == 0.0 {
            (self.total - self.direct).abs()
        } else {
            (self.total - self.direct).abs() / scale
        }
    }
}

/// Enumerates all `n^t` index lists and groups their monomials by encoding.
pub fn group_sum_oracle(r: &SymMatrix, l: &SymMatrix, a: usize, b: usize, t: usize) -> Result<GroupSums> {
    let n = check_inputs(r, l, a, b, t)?;
    let count = checked_pow(n, t, MAX_MONOMIALS, "monomial enumeration")?;
    let mut sums: BTreeMap<EncodingClass, f64> = BTreeMap::new();
    let mut indices = vec![0usize; t];
    for code in 0..count {
        let mut c = code;
        for slot in indices.iter_mut().rev() {
            *slot = (c % n as u64) as usize;
            c /= n as u64;
        }
        *sums.entry(encode_index_list(&indices)).or_insert(0.0) += monomial(r, l, a, b, &indices);
    }
    let classes: Vec<(EncodingClass, f64)> = sums.into_iter().collect();
    let total = classes.iter().map(|(_, s)| s).sum();
    let abs_class_total = classes.iter().map(|(_, s)| s.abs()).sum();
    Ok(GroupSums {
        classes,
        total,
        direct: rtl_entry(r, l, a, b, t),
        abs_class_total,
    })
}

/// `Z(X)`: the class sum built by substituting distinct values for the
/// `t'` labels of `x` (a second route to the grouped sums).
pub fn class_sum(r: &SymMatrix, l: &SymMatrix, a: usize, b: usize, x: &EncodingClass) -> Result<f64> {
    let t = x.len();
    let n = check_inputs(r, l, a, b, t)?;
    if !x.is_restricted_growth() {
        return Err(Error::InvalidParameter(format!("{:?} is not a restricted-growth string", x.x)));
    }
    let tp = x.t_prime();
    checked_pow(n, tp, MAX_MONOMIALS, "class substitution")?;
    let mut values = vec![0usize; tp];
    let mut total = 0.0;
    let mut indices = vec![0usize; t];
    distinct_tuples(n, &mut values, 0, &mut |vals| {
        for (slot, &label) in indices.iter_mut().zip(&x.x) {
            *slot = vals[label - 1];
        }
        total += monomial(r, l, a, b, &indices);
    });
    Ok(total)
}

fn distinct_tuples(n: usize, vals: &mut Vec<usize>, pos: usize, f: &mut impl FnMut(&[usize])) {
    if pos == vals.len() {
        f(vals);
        return;
    }
    for v in 0..n {
        if vals[..pos].contains(&v) {
            continue;
        }
        vals[pos] = v;
        distinct_tuples(n, vals, pos + 1, f);
    }
}

/// Outcome of comparing `W^t` with `t^t` times the partition average of `W^t(T)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionCheck {
    /// Sum over index lists with all indices distinct.
    pub w_direct: f64,
    /// `t^t` times the mean of `W^t(T)` over partitions.
    pub w_from_partitions: f64,
    pub partitions: u64,
    pub relative_error: f64,
    /// Standard error of `w_from_partitions` (zero when exhaustive).
    pub standard_error: f64,
    pub exhaustive: bool,
}

/// `W^t(T)`: sum over `l_i` in `T_i`, where `part[v]` is the set holding `v`.
pub fn partition_sum(r: &SymMatrix, l: &SymMatrix, a: usize, b: usize, t: usize, part: &[usize]) -> f64 {
    let n = r.n();
    let members: Vec<Vec<usize>> = (0..t)
        .map(|s| (0..n).filter(|&v| part[v] == s).collect())
        .collect();
    // Dynamic program over positions: weight[v] = sum of prefixes ending at v.
    let mut weight = vec![0.0; n];
    for &v in &members[0] {
        weight[v] = r.get(a, v);
    }
    for set in members.iter().skip(1) {
        let mut next = vec![0.0; n];
        for &v in set {
            next[v] = (0..n).map(|u| weight[u] * r.get(u, v)).sum();
        }
        weight = next;
    }
    (0..n).map(|v| weight[v] * l.get(v, b)).sum()
}

fn all_distinct_sum(r: &SymMatrix, l: &SymMatrix, a: usize, b: usize, t: usize) -> f64 {
    let n = r.n();
    let mut vals = vec![0usize; t];
    let mut total = 0.0;
    distinct_tuples(n, &mut vals, 0, &mut |v| total += monomial(r, l, a, b, v));
    total
}

/// Relative difference; absolute when `scale` is zero.
fn relative(got: f64, want: f64, scale: f64) -> f64 {
    if scale == 0.0 {
        (got - want).abs()
    } else {
        (got - want).abs() / scale
    }
}

/// Exhaustive check over all `t^n` partitions of `[n]` into `t` labelled sets.
pub fn partition_unbiasedness_check(
    r: &SymMatrix,
    l: &SymMatrix,
    a: usize,
    b: usize,
    t: usize,
) -> Result<PartitionCheck> {
    let n = check_inputs(r, l, a, b, t)?;
    let count = checked_pow(t, n, MAX_PARTITIONS, "partition enumeration")?;
    checked_pow(n, t, MAX_MONOMIALS, "all-distinct enumeration")?;
    let w_direct = all_distinct_sum(r, l, a, b, t);
    let sum: f64 = (0..count)
        .into_par_iter()
        .map(|code| {
            let mut c = code;
            let part: Vec<usize> = (0..n)
                .map(|_| {
                    let s = (c % t as u64) as usize;
                    c /= t as u64;
                    s
                })
                .collect();
            partition_sum(r, l, a, b, t, &part)
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum();
    let tt = (t as f64).powi(t as i32);
    let w_from_partitions = tt * sum / count as f64;
    Ok(PartitionCheck {
        w_direct,
        w_from_partitions,
        partitions: count,
        relative_error: relative(w_from_partitions, w_direct, w_direct.abs()),
        standard_error: 0.0,
        exhaustive: true,
    })
}

/// Monte Carlo estimate over `samples` uniformly random partitions, for sizes
/// beyond the exhaustive cap.
pub fn partition_unbiasedness_sampled(
    r: &SymMatrix,
    l: &SymMatrix,
    a: usize,
    b: usize,
    t: usize,
    samples: usize,
    seed: u64,
) -> Result<PartitionCheck> {
    let n = check_inputs(r, l, a, b, t)?;
    if samples < 2 {
        return Err(Error::InvalidParameter("need at least 2 samples".into()));
    }
    checked_pow(n, t, MAX_MONOMIALS, "all-distinct enumeration")?;
    let w_direct = all_distinct_sum(r, l, a, b, t);
    let mut rng = rng_from_seed(seed);
    let tt = (t as f64).powi(t as i32);
    let draws: Vec<f64> = (0..samples)
        .map(|_| {
            let part: Vec<usize> = (0..n).map(|_| rng.gen_range(0..t)).collect();
            tt * partition_sum(r, l, a, b, t, &part)
        })
        .collect();
    let mean = draws.iter().sum::<f64>() / samples as f64;
    let var = draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (samples - 1) as f64;
    Ok(PartitionCheck {
        w_direct,
        w_from_partitions: mean,
        partitions: samples as u64,
        relative_error: relative(mean, w_direct, w_direct.abs()),
        standard_error: (var / samples as f64).sqrt(),
        exhaustive: false,
    })
}
