//! Structure/noise expansion of `B^r`.

use sbm_core::linalg::{Matrix, ScaledMatrix, ScaledValue, SymMatrix};
use sbm_core::model::StructureNoiseSplit;
use sbm_core::{Error, Result};

/// Largest order accepted by [`decompose_terms`].
pub const MAX_DECOMPOSE_N: usize = 1200;

/// `B^r = L^r + M + M' + R^r` with
/// `M = sum_{t=1}^{r-1} L^t R B^{r-1-t}` and `M' = sum_{t=1}^{r-1} R^t L B^{r-1-t}`.
#[derive(Debug, Clone)]
pub struct DecompositionTerms {
    pub r: u32,
    pub lr: ScaledMatrix,
    pub m: ScaledMatrix,
    pub mp: ScaledMatrix,
    pub rr: ScaledMatrix,
    pub labels: Vec<usize>,
}

impl DecompositionTerms {
    pub fn n(&self) -> usize {
        self.lr.base.rows()
    }

    /// `L^r + M + M' + R^r`.
    pub fn reconstruct(&self) -> Result<ScaledMatrix> {
        self.lr.add(&self.m)?.add(&self.mp)?.add(&self.rr)
    }

    /// `max |sum - want| / max |want|`, evaluated in the scale of `want`.
    pub fn reconstruction_error(&self, want: &ScaledMatrix) -> Result<f64> {
        let diff = self.reconstruct()?.sub(want)?;
        Ok(diff.max_abs().ratio(&want.max_abs()))
    }
}

fn powers(x: &ScaledMatrix, upto: u32) -> Result<Vec<ScaledMatrix>> {
    let n = x.base.rows();
    let mut out = vec![ScaledMatrix::new(Matrix::identity(n))];
    for _ in 0..upto {
        let next = out.last().expect("nonempty").matmul(x)?;
        out.push(next);
    }
    Ok(out)
}

/// Expands `B^r` term by term. Every product is renormalized, so large `r`
/// and `n` do not overflow.
pub fn decompose_terms(split: &StructureNoiseSplit, r: u32) -> Result<DecompositionTerms> {
    let n = split.n();
    if r == 0 {
        return Err(Error::InvalidParameter("power exponent must be at least 1".into()));
    }
    if n > MAX_DECOMPOSE_N {
        return Err(Error::Resource(format!(
            "dense decomposition is capped at n = {MAX_DECOMPOSE_N}, got {n}"
        )));
    }
    let l = ScaledMatrix::new(split.structure.as_matrix().clone());
    let noise = ScaledMatrix::new(split.noise.as_matrix().clone());
    if r == 1 {
        return Ok(DecompositionTerms {
            r,
            lr: l,
            m: ScaledMatrix::zeros(n, n),
            mp: ScaledMatrix::zeros(n, n),
            rr: noise,
            labels: split.labels.clone(),
        });
    }
    let b = SymMatrix::from_matrix(
        split.structure.as_matrix().add(split.noise.as_matrix())?,
    )?;
    let b = ScaledMatrix::new(b.into_matrix());
    let b_pow = powers(&b, r - 2)?;
    let l_pow = powers(&l, r)?;
    let r_pow = powers(&noise, r)?;

    let mut m = ScaledMatrix::zeros(n, n);
    let mut mp = ScaledMatrix::zeros(n, n);
    for t in 1..r {
        let tail = &b_pow[(r - 1 - t) as usize];
        let lt = &l_pow[t as usize];
        let rt = &r_pow[t as usize];
        m = m.add(&lt.matmul(&noise)?.matmul(tail)?)?;
        mp = mp.add(&rt.matmul(&l)?.matmul(tail)?)?;
    }
    Ok(DecompositionTerms {
        r,
        lr: l_pow[r as usize].clone(),
        m,
        mp,
        rr: r_pow[r as usize].clone(),
        labels: split.labels.clone(),
    })
}

/// Row-norm ratios against a threshold and the separation of `L^r`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NormAudit {
    pub m_ratio: f64,
    pub mp_ratio: f64,
    pub rr_ratio: f64,
    /// Smallest distance from an `L^r` row of the largest cluster to a row of
    /// another cluster, over the threshold.
    pub lr_cross_ratio: f64,
    /// Largest distance between `L^r` rows of the same cluster, over the threshold.
    pub lr_within_ratio: f64,
    pub ratio_bar: f64,
    pub separation_bar: f64,
    pub pass: bool,
}

/// Bars for [`audit_norm_lemmas`]: noise-term ratios must stay at or below
/// `ratio_bar`, the cross-cluster separation of `L^r` at or above `separation_bar`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormBars {
    pub ratio_bar: f64,
    pub separation_bar: f64,
}

impl Default for NormBars {
    fn default() -> Self {
        Self {
            ratio_bar: 1.0,
            separation_bar: 2.0,
        }
    }
}

pub fn audit_norm_lemmas(terms: &DecompositionTerms, delta: ScaledValue, bars: NormBars) -> NormAudit {
    let m_ratio = terms.m.max_row_norm().ratio(&delta);
    let mp_ratio = terms.mp.max_row_norm().ratio(&delta);
    let rr_ratio = terms.rr.max_row_norm().ratio(&delta);

    // L^r rows are constant within a cluster; compare one representative per
    // cluster, and every member against its representative. Cross separation
    // is measured from the largest cluster.
    let mut reps: Vec<(usize, usize, usize)> = Vec::new();
    let mut within = ScaledValue::ZERO;
    for (v, &label) in terms.labels.iter().enumerate() {
        match reps.iter_mut().find(|(l, _, _)| *l == label) {
            Some((_, rep, size)) => {
                *size += 1;
                let d = terms.lr.row_distance(*rep, v);
                if d.ratio(&within) > 1.0 {
                    within = d;
                }
            }
            None => reps.push((label, v, 1)),
        }
    }
    let largest = reps.iter().enumerate().fold(None, |best: Option<usize>, (x, r)| match best {
        Some(b) if reps[b].2 >= r.2 => Some(b),
        _ => Some(x),
    });
    let mut cross: Option<ScaledValue> = None;
    if let Some(x) = largest {
        let a = reps[x].1;
        for (y, &(_, b, _)) in reps.iter().enumerate() {
            if y == x {
                continue;
            }
            let d = terms.lr.row_distance(a, b);
            cross = Some(match cross {
                Some(c) if c.ratio(&d) <= 1.0 => c,
                _ => d,
            });
        }
    }
    let lr_cross_ratio = cross.map_or(f64::INFINITY, |c| c.ratio(&delta));
    let lr_within_ratio = within.ratio(&delta);
    let pass = m_ratio <= bars.ratio_bar
        && mp_ratio <= bars.ratio_bar
        && rr_ratio <= bars.ratio_bar
        && lr_cross_ratio >= bars.separation_bar;
    NormAudit {
        m_ratio,
        mp_ratio,
        rr_ratio,
        lr_cross_ratio,
        lr_within_ratio,
        ratio_bar: bars.ratio_bar,
        separation_bar: bars.separation_bar,
        pass,
    }
}
