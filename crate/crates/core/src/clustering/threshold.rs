use crate::error::{invalid, Result};
use crate::linalg::{sym_eigenvalues, ScaledValue, SymMatrix};
use crate::model::validate_probabilities;

/// `ceil(ln n)`, at least 1.
pub fn default_power(n: usize) -> u32 {
    ((n.max(1) as f64).ln().ceil() as u32).max(1)
}

/// Power-method threshold `0.5 sqrt(s*) (p - q)^r (s*)^(r - 1)`, in the log domain.
pub fn delta_power(s_star: usize, p: f64, q: f64, r: u32) -> Result<ScaledValue> {
    if s_star == 0 {
        return Err(invalid("largest cluster size must be at least 1"));
    }
    if r == 0 {
        return Err(invalid("power exponent must be at least 1"));
    }
    if !(p > q) {
        return Err(invalid(format!("threshold needs p > q, got p = {p}, q = {q}")));
    }
    let s = s_star as f64;
    let r = f64::from(r);
    let ln = 0.5f64.ln() + 0.5 * s.ln() + r * (p - q).ln() + (r - 1.0) * s.ln();
    Ok(ScaledValue::from_ln(ln))
}

/// Projection threshold `0.5 (p - q) sqrt(n / k)`.
pub fn delta_svd(n: usize, k: usize, p: f64, q: f64) -> Result<f64> {
    if k == 0 || k > n {
        return Err(invalid(format!("k must lie in 1..={n}, got {k}")));
    }
    validate_probabilities(p, q)?;
    Ok(0.5 * (p - q) * (n as f64 / k as f64).sqrt())
}

/// `round(lambda_1 / (p - q))` clamped to `[1, n]`.
pub fn s_star_from_eigenvalue(lambda1: f64, p: f64, q: f64, n: usize) -> usize {
    let est = (lambda1 / (p - q)).round();
    if est.is_nan() || est < 1.0 {
        1
    } else {
        (est as usize).min(n.max(1))
    }
}

/// Largest-cluster size estimated from the top eigenvalue of `B`.
pub fn estimate_s_star(b: &SymMatrix, p: f64, q: f64) -> Result<usize> {
    if !(p > q) {
        return Err(invalid(format!("estimate needs p > q, got p = {p}, q = {q}")));
    }
    let values = sym_eigenvalues(b, 1e-14)?;
    Ok(s_star_from_eigenvalue(values[0], p, q, b.n()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{center, sample_block_graph, structure_matrix};

    #[test]
    fn delta_power_reference_value() {
        let d = delta_power(4, 0.75, 0.25, 2).unwrap();
        assert!(d.ln().abs() < 1e-15);
        assert!((d.to_f64() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn delta_power_first_power() {
        let d = delta_power(9, 0.5, 0.1, 1).unwrap();
        assert!((d.to_f64() - 0.5 * 3.0 * 0.4).abs() < 1e-14);
    }

    #[test]
    fn delta_power_matches_direct_evaluation() {
        let (s, gap, r) = (100.0_f64, 0.3_f64, 5);
        let direct = 0.5 * s.sqrt() * gap.powi(r) * s.powi(r - 1);
        let d = delta_power(100, 0.4, 0.1, r as u32).unwrap().to_f64();
        assert!(((d - direct) / direct).abs() <= 1e-12);
    }

    #[test]
    fn delta_power_rejects_bad_input() {
        assert!(delta_power(4, 0.3, 0.3, 2).is_err());
        assert!(delta_power(0, 0.5, 0.1, 2).is_err());
        assert!(delta_power(4, 0.5, 0.1, 0).is_err());
        // Finite in the log domain where the plain value overflows.
        let huge = delta_power(800, 0.55, 0.0, 200).unwrap();
        assert!(huge.ln().is_finite());
        assert!(huge.to_f64().is_infinite());
    }

    #[test]
    fn default_power_is_ceil_ln() {
        assert_eq!(default_power(1), 1);
        assert_eq!(default_power(3), 2);
        assert_eq!(default_power(1200), 8);
        assert_eq!(default_power(1000), 7);
    }

    #[test]
    fn s_star_from_exact_structure() {
        let labels = [0, 0, 0, 0, 0, 0, 1, 1, 1];
        let b = center(&sample_block_graph(&labels, 1.0, 0.0, true, 1), 0.0);
        assert_eq!(b, structure_matrix(&labels, 1.0, 0.0));
        assert_eq!(estimate_s_star(&b, 1.0, 0.0).unwrap(), 6);
    }

    #[test]
    fn s_star_clamps() {
        assert_eq!(estimate_s_star(&SymMatrix::diagonal(&[0.2]), 0.5, 0.1).unwrap(), 1);
        assert_eq!(s_star_from_eigenvalue(1e9, 0.5, 0.1, 10), 10);
        assert_eq!(s_star_from_eigenvalue(-3.0, 0.5, 0.1, 10), 1);
    }
}
