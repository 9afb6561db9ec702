//! Matrices and magnitudes carried as `unit value * exp(log_scale)`.
//!
//! Powers of the centered adjacency matrix grow like `((p - q) s)^r` and leave
//! the `f64` range at moderate `n` and `r = ln n`. Every powered quantity is
//! renormalized by a power of two after each product, so the stored scale is
//! exact and the base keeps its max-abs entry in `[0.5, 1)`.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::matrix::{distance, Matrix, SymMatrix};
use crate::error::{invalid, Result};

/// A nonnegative magnitude `value * exp(log_scale)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledValue {
    pub value: f64,
    pub log_scale: f64,
}

impl ScaledValue {
    pub const ZERO: ScaledValue = ScaledValue {
        value: 0.0,
        log_scale: 0.0,
    };

    pub fn new(value: f64, log_scale: f64) -> Self {
        Self { value, log_scale }
    }

    pub fn from_f64(value: f64) -> Self {
        Self {
            value,
            log_scale: 0.0,
        }
    }

    /// Magnitude given directly by its natural log.
    pub fn from_ln(ln: f64) -> Self {
        Self {
            value: 1.0,
            log_scale: ln,
        }
    }

    /// Natural log of the magnitude; `-inf` for zero.
    pub fn ln(&self) -> f64 {
        self.value.ln() + self.log_scale
    }

    /// The plain value; may overflow to infinity or underflow to zero.
    pub fn to_f64(&self) -> f64 {
        self.value * self.log_scale.exp()
    }

    /// `self / other` as a plain number, computed in the log domain.
    pub fn ratio(&self, other: &ScaledValue) -> f64 {
        if self.value == 0.0 {
            return 0.0;
        }
        (self.value / other.value) * (self.log_scale - other.log_scale).exp()
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            value: self.value * factor,
            log_scale: self.log_scale,
        }
    }

    /// Expresses this magnitude in units of `exp(log_scale)`.
    pub fn in_units_of(&self, log_scale: f64) -> f64 {
        if self.value == 0.0 {
            return 0.0;
        }
        self.value * (self.log_scale - log_scale).exp()
    }
}

impl PartialOrd for ScaledValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.ln().partial_cmp(&other.ln())
    }
}

/// Power-of-two exponent `e` with `x / 2^e` in `[0.5, 1)`; `None` for zero or non-finite `x`.
fn binary_exponent(x: f64) -> Option<i32> {
    if x == 0.0 || !x.is_finite() {
        return None;
    }
    let mut e = x.log2().floor() as i32 + 1;
    // Correct for rounding in log2 near exact powers of two.
    while x / 2f64.powi(e) >= 1.0 {
        e += 1;
    }
    while x / 2f64.powi(e) < 0.5 {
        e -= 1;
    }
    Some(e)
}

/// `exp(d)`, exact when `d` is (up to accumulated rounding) a multiple of
/// `ln 2`, as it is between renormalized matrices.
fn scale_factor(d: f64) -> f64 {
    let k = (d / std::f64::consts::LN_2).round();
    if (d / std::f64::consts::LN_2 - k).abs() < 1e-9 && k.abs() < 1000.0 {
        2f64.powi(k as i32)
    } else {
        d.exp()
    }
}

/// A general dense matrix `base * exp(log_scale)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaledMatrix {
    pub base: Matrix,
    pub log_scale: f64,
}

impl ScaledMatrix {
    pub fn new(base: Matrix) -> Self {
        let mut s = Self {
            base,
            log_scale: 0.0,
        };
        s.renormalize();
        s
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            base: Matrix::zeros(rows, cols),
            log_scale: 0.0,
        }
    }

    /// Rescales the base by an exact power of two so its max-abs entry lies in
    /// `[0.5, 1)`. The zero matrix is left as is.
    pub fn renormalize(&mut self) {
        if let Some(e) = binary_exponent(self.base.max_abs()) {
            if e != 0 {
                self.base.scale_in_place(2f64.powi(-e));
                self.log_scale += f64::from(e) * std::f64::consts::LN_2;
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.base.max_abs() == 0.0
    }

    pub fn matmul(&self, rhs: &ScaledMatrix) -> Result<ScaledMatrix> {
        let mut out = ScaledMatrix {
            base: self.base.matmul(&rhs.base)?,
            log_scale: self.log_scale + rhs.log_scale,
        };
        out.renormalize();
        Ok(out)
    }

    /// `self + rhs`, aligning both onto the larger scale.
    pub fn add(&self, rhs: &ScaledMatrix) -> Result<ScaledMatrix> {
        self.combine(rhs, 1.0)
    }

    pub fn sub(&self, rhs: &ScaledMatrix) -> Result<ScaledMatrix> {
        self.combine(rhs, -1.0)
    }

    fn combine(&self, rhs: &ScaledMatrix, sign: f64) -> Result<ScaledMatrix> {
        if rhs.is_zero() {
            return Ok(self.clone());
        }
        if self.is_zero() {
            let mut out = rhs.clone();
            out.base.scale_in_place(sign);
            return Ok(out);
        }
        let scale = self.log_scale.max(rhs.log_scale);
        let a = scale_factor(self.log_scale - scale);
        let b = sign * scale_factor(rhs.log_scale - scale);
        let mut out = ScaledMatrix {
            base: self.base.axpby(a, &rhs.base, b)?,
            log_scale: scale,
        };
        out.renormalize();
        Ok(out)
    }

    /// Entries in plain floating point; may overflow.
    pub fn to_matrix(&self) -> Matrix {
        self.base.scale(self.log_scale.exp())
    }

    pub fn max_abs(&self) -> ScaledValue {
        ScaledValue::new(self.base.max_abs(), self.log_scale)
    }

    pub fn max_row_norm(&self) -> ScaledValue {
        ScaledValue::new(self.base.max_row_norm(), self.log_scale)
    }

    pub fn row_distance(&self, i: usize, j: usize) -> ScaledValue {
        ScaledValue::new(distance(self.base.row(i), self.base.row(j)), self.log_scale)
    }
}

/// `m^exponent` held as `base * exp(log_scale)` with a symmetric base.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaledPower {
    base: SymMatrix,
    log_scale: f64,
    exponent: u32,
}

impl ScaledPower {
    pub fn base(&self) -> &SymMatrix {
        &self.base
    }

    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn n(&self) -> usize {
        self.base.n()
    }

    /// Entries in plain floating point; may overflow.
    pub fn to_matrix(&self) -> Matrix {
        self.base.as_matrix().scale(self.log_scale.exp())
    }

    pub fn as_scaled_matrix(&self) -> ScaledMatrix {
        ScaledMatrix {
            base: self.base.as_matrix().clone(),
            log_scale: self.log_scale,
        }
    }

    /// `||row_i - row_j||_2` of the represented matrix.
    pub fn row_distance(&self, i: usize, j: usize) -> ScaledValue {
        ScaledValue::new(distance(self.base.row(i), self.base.row(j)), self.log_scale)
    }

    /// `||row_i||_2` of the represented matrix.
    pub fn row_norm(&self, i: usize) -> ScaledValue {
        ScaledValue::new(super::matrix::norm2(self.base.row(i)), self.log_scale)
    }
}

/// `m^r` by square-and-multiply, renormalizing after every product.
pub fn scaled_power(m: &SymMatrix, r: u32) -> Result<ScaledPower> {
    if r == 0 {
        return Err(invalid("power exponent must be at least 1"));
    }
    let start = ScaledMatrix::new(m.as_matrix().clone());
    let mut acc: Option<ScaledMatrix> = None;
    let mut square = start;
    let mut bits = r;
    loop {
        if bits & 1 == 1 {
            acc = Some(match acc {
                None => square.clone(),
                Some(a) => symmetric_product(&a, &square)?,
            });
        }
        bits >>= 1;
        if bits == 0 {
            break;
        }
        square = symmetric_product(&square, &square)?;
    }
    let acc = acc.expect("r >= 1 sets at least one bit");
    Ok(ScaledPower {
        base: SymMatrix::symmetrize(acc.base)?,
        log_scale: acc.log_scale,
        exponent: r,
    })
}

/// Product of two commuting symmetric factors, re-symmetrized.
fn symmetric_product(a: &ScaledMatrix, b: &ScaledMatrix) -> Result<ScaledMatrix> {
    let prod = a.matmul(b)?;
    Ok(ScaledMatrix {
        base: SymMatrix::symmetrize(prod.base)?.into_matrix(),
        log_scale: prod.log_scale,
    })
}

/// `||row_i - row_j||_2` of `p`.
pub fn row_distance(p: &ScaledPower, i: usize, j: usize) -> ScaledValue {
    p.row_distance(i, j)
}
