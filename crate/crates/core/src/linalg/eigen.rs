//! Symmetric eigendecomposition by Householder tridiagonalization followed by
//! implicit-shift QL iteration.
//!
//! Eigenvectors are kept as rows so that both the reflector accumulation and
//! the Givens rotations of the QL sweep touch contiguous memory.

use serde::{Deserialize, Serialize};

use super::matrix::{dot, norm2, Matrix, SymMatrix};
use crate::error::{invalid, Error, Result};

/// Maximum QL sweeps per eigenvalue before giving up.
const MAX_SWEEPS: usize = 60;

/// Full eigendecomposition of a symmetric matrix, ordered by descending
/// algebraic eigenvalue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenDecomposition {
    values: Vec<f64>,
    /// Row `i` is the unit eigenvector for `values[i]`.
    vectors: Matrix,
}

impl EigenDecomposition {
    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn vector(&self, i: usize) -> &[f64] {
        self.vectors.row(i)
    }

    /// Eigenvectors as the rows of an `n x n` matrix.
    pub fn vectors(&self) -> &Matrix {
        &self.vectors
    }

    /// `sum_i lambda_i v_i v_i^T`.
    pub fn reconstruct(&self) -> SymMatrix {
        let n = self.n();
        SymMatrix::from_upper_fn(n, |a, b| {
            (0..n)
                .map(|i| self.values[i] * self.vectors.get(i, a) * self.vectors.get(i, b))
                .sum()
        })
    }
}

struct Tridiagonal {
    diag: Vec<f64>,
    /// `off[i]` couples `i` and `i + 1`; the last slot is zero.
    off: Vec<f64>,
}

struct Reflector {
    /// First index the reflector acts on.
    start: usize,
    v: Vec<f64>,
    beta: f64,
}

/// Reduces `a` to tridiagonal form `Q^T a Q`, returning the reflectors that make up `Q`.
fn tridiagonalize(m: &SymMatrix) -> (Tridiagonal, Vec<Reflector>) {
    let n = m.n();
    let mut a = m.as_matrix().clone();
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n];
    let mut reflectors = Vec::with_capacity(n.saturating_sub(2));
    let mut p = vec![0.0; n];

    for k in 0..n.saturating_sub(2) {
        diag[k] = a.get(k, k);
        let start = k + 1;
        let mut v = a.row(k)[start..].to_vec();
        let tail_norm = norm2(&v[1..]);
        if tail_norm == 0.0 {
            off[k] = v[0];
            continue;
        }
        let norm = norm2(&v);
        let alpha = if v[0] > 0.0 { -norm } else { norm };
        v[0] -= alpha;
        let beta = 2.0 / dot(&v, &v);
        off[k] = alpha;

        // p = beta * A22 v, w = p - (beta / 2)(p.v) v, A22 -= v w^T + w v^T
        let m_len = n - start;
        let p = &mut p[..m_len];
        for (r, pr) in p.iter_mut().enumerate() {
            *pr = beta * dot(&a.row(start + r)[start..], &v);
        }
        let kappa = 0.5 * beta * dot(p, &v);
        for (pr, &vr) in p.iter_mut().zip(&v) {
            *pr -= kappa * vr;
        }
        for r in 0..m_len {
            let (vr, wr) = (v[r], p[r]);
            let row = &mut a.row_mut(start + r)[start..];
            for ((x, &vc), &wc) in row.iter_mut().zip(&v).zip(p.iter()) {
                *x -= vr * wc + wr * vc;
            }
        }
        reflectors.push(Reflector { start, v, beta });
    }
    if n >= 2 {
        diag[n - 2] = a.get(n - 2, n - 2);
        off[n - 2] = a.get(n - 2, n - 1);
    }
    if n >= 1 {
        diag[n - 1] = a.get(n - 1, n - 1);
    }
    (Tridiagonal { diag, off }, reflectors)
}

/// Forms `Q^T` (rows are the columns of `Q`) from the reflectors.
fn accumulate_q_transposed(n: usize, reflectors: &[Reflector]) -> Matrix {
    // Q = H_0 H_1 ... H_last, built right to left as Q <- H_k Q.
    let mut q = Matrix::identity(n);
    let mut u = vec![0.0; n];
    for h in reflectors.iter().rev() {
        let s = h.start;
        let u = &mut u[s..];
        u.iter_mut().for_each(|x| *x = 0.0);
        for (r, &vr) in h.v.iter().enumerate() {
            if vr == 0.0 {
                continue;
            }
            for (x, &qv) in u.iter_mut().zip(&q.row(s + r)[s..]) {
                *x += vr * qv;
            }
        }
        for (r, &vr) in h.v.iter().enumerate() {
            let f = h.beta * vr;
            if f == 0.0 {
                continue;
            }
            for (qv, &x) in q.row_mut(s + r)[s..].iter_mut().zip(u.iter()) {
                *qv -= f * x;
            }
        }
    }
    q.transpose()
}

/// Implicit QL on a tridiagonal matrix. When `rows` is given, each Givens
/// rotation of columns `(i, i + 1)` is applied to rows `i` and `i + 1` of it.
fn ql_implicit(t: &mut Tridiagonal, mut rows: Option<&mut Matrix>, rel_tol: f64) -> Result<()> {
    let n = t.diag.len();
    let (d, e) = (&mut t.diag, &mut t.off);
    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= rel_tol * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_SWEEPS {
                return Err(Error::NonConvergence {
                    matrix: format!("tridiagonal block {l}..{m} of order {n}"),
                    residual: e[l].abs(),
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = rows.as_deref_mut() {
                    rotate_rows(z, i, s, c);
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

#[inline]
fn rotate_rows(z: &mut Matrix, i: usize, s: f64, c: f64) {
    let (lo, hi) = z.adjacent_rows_mut(i);
    for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
        let f = *b;
        *b = s * *a + c * f;
        *a = c * *a - s * f;
    }
}

/// Full symmetric eigendecomposition.
///
/// `tol` bounds the accepted residual `||M v - lambda v||` relative to
/// `1 + rho(M)`; a decomposition that misses it is reported as non-convergence.
pub fn sym_eigen(m: &SymMatrix, tol: f64) -> Result<EigenDecomposition> {
    if !(tol > 0.0) {
        return Err(invalid(format!("tolerance must be positive, got {tol}")));
    }
    let n = m.n();
    if n == 0 {
        return Err(invalid("empty matrix"));
    }
    let (mut tri, reflectors) = tridiagonalize(m);
    let mut zt = accumulate_q_transposed(n, &reflectors);
    drop(reflectors);
    ql_implicit(&mut tri, Some(&mut zt), f64::EPSILON)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| tri.diag[b].total_cmp(&tri.diag[a]));
    let values: Vec<f64> = order.iter().map(|&i| tri.diag[i]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.row_mut(dst).copy_from_slice(zt.row(src));
    }

    // Row i of V*M is (M v_i)^T.
    let mv = vectors.matmul(m.as_matrix())?;
    let radius = values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let bound = tol * (1.0 + radius);
    let mut worst = 0.0_f64;
    for i in 0..n {
        let lambda = values[i];
        let res: f64 = mv
            .row(i)
            .iter()
            .zip(vectors.row(i))
            .map(|(a, b)| (a - lambda * b).powi(2))
            .sum::<f64>()
            .sqrt();
        worst = worst.max(res);
    }
    if !(worst <= bound) {
        return Err(Error::NonConvergence {
            matrix: format!("symmetric matrix of order {n}"),
            residual: worst,
        });
    }
    Ok(EigenDecomposition { values, vectors })
}

/// Eigenvalues only, descending. `rel_tol` is the QL deflation tolerance.
pub fn sym_eigenvalues(m: &SymMatrix, rel_tol: f64) -> Result<Vec<f64>> {
    if !(rel_tol > 0.0) {
        return Err(invalid(format!("tolerance must be positive, got {rel_tol}")));
    }
    if m.n() == 0 {
        return Err(invalid("empty matrix"));
    }
    let (mut tri, _) = tridiagonalize(m);
    ql_implicit(&mut tri, None, rel_tol.max(f64::EPSILON))?;
    let mut values = tri.diag;
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

/// Spectral norm `max |lambda_i|` to relative tolerance `tol`.
pub fn spectral_norm(m: &SymMatrix, tol: f64) -> Result<f64> {
    let values = sym_eigenvalues(m, tol)?;
    Ok(values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs())))
}

/// Orthogonal projection of `u` onto the span of the top `k` eigenvectors.
pub fn project_topk(decomp: &EigenDecomposition, k: usize, u: &[f64]) -> Result<Vec<f64>> {
    let n = decomp.n();
    if k == 0 || k > n {
        return Err(invalid(format!("k must lie in 1..={n}, got {k}")));
    }
    if u.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: u.len(),
        });
    }
    let mut out = vec![0.0; n];
    for i in 0..k {
        let v = decomp.vector(i);
        let c = dot(v, u);
        for (o, &x) in out.iter_mut().zip(v) {
            *o += c * x;
        }
    }
    Ok(out)
}

/// Coordinates `<v_i, u>` of `u` in the top-`k` eigenbasis. Distances between
/// projected vectors equal distances between their coordinates.
pub fn topk_coordinates(decomp: &EigenDecomposition, k: usize, u: &[f64]) -> Result<Vec<f64>> {
    let n = decomp.n();
    if k == 0 || k > n {
        return Err(invalid(format!("k must lie in 1..={n}, got {k}")));
    }
    if u.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: u.len(),
        });
    }
    Ok((0..k).map(|i| dot(decomp.vector(i), u)).collect())
}
