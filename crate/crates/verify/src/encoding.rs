//! Restricted-growth encodings of index lists.

use serde::{Deserialize, Serialize};

use sbm_core::{Error, Result};

/// Largest list length accepted by [`enumerate_encodings`].
pub const MAX_ENCODING_LEN: usize = 8;

/// Pattern of repeated indices in a list: the first index is 1, and each later
/// position gets the label of its earlier equal index or one past the largest
/// label so far.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EncodingClass {
    pub x: Vec<usize>,
}

impl EncodingClass {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Number of distinct indices.
    pub fn t_prime(&self) -> usize {
        self.x.iter().copied().max().unwrap_or(0)
    }

    pub fn all_distinct(&self) -> bool {
        self.t_prime() == self.len()
    }

    /// Checks the restricted-growth property.
    pub fn is_restricted_growth(&self) -> bool {
        let mut max = 0;
        for (i, &v) in self.x.iter().enumerate() {
            if (i == 0 && v != 1) || v == 0 || v > max + 1 {
                return false;
            }
            max = max.max(v);
        }
        true
    }
}

pub fn encode_index_list(indices: &[usize]) -> EncodingClass {
    let mut seen: Vec<usize> = Vec::new();
    let x = indices
        .iter()
        .map(|l| match seen.iter().position(|s| s == l) {
            Some(p) => p + 1,
            None => {
                seen.push(*l);
                seen.len()
            }
        })
        .collect();
    EncodingClass { x }
}

/// All restricted-growth strings of length `t`, in lexicographic order.
pub fn enumerate_encodings(t: usize) -> Result<Vec<EncodingClass>> {
    if t > MAX_ENCODING_LEN {
        return Err(Error::Resource(format!(
            "encodings are enumerated up to length {MAX_ENCODING_LEN}, got {t}"
        )));
    }
    if t == 0 {
        return Ok(vec![EncodingClass { x: Vec::new() }]);
    }
    let mut out = Vec::new();
    let mut x = vec![1usize; t];
    extend(&mut x, 1, 1, &mut out);
    Ok(out)
}

fn extend(x: &mut Vec<usize>, pos: usize, max: usize, out: &mut Vec<EncodingClass>) {
    if pos == x.len() {
        out.push(EncodingClass { x: x.clone() });
        return;
    }
    for v in 1..=max + 1 {
        x[pos] = v;
        extend(x, pos + 1, max.max(v), out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encodes_by_first_occurrence() {
        assert_eq!(encode_index_list(&[5, 7, 5]).x, vec![1, 2, 1]);
        assert_eq!(encode_index_list(&[9, 9, 9]).x, vec![1, 1, 1]);
        assert_eq!(encode_index_list(&[2, 4, 6, 8]).x, vec![1, 2, 3, 4]);
        assert_eq!(encode_index_list(&[3, 1, 1, 4, 3]).x, vec![1, 2, 2, 3, 1]);
    }

    #[test]
    fn small_enumerations() {
        assert_eq!(enumerate_encodings(1).unwrap().len(), 1);
        assert_eq!(enumerate_encodings(2).unwrap().len(), 2);
        let three: Vec<Vec<usize>> = enumerate_encodings(3).unwrap().into_iter().map(|c| c.x).collect();
        assert_eq!(
            three,
            vec![vec![1, 1, 1], vec![1, 1, 2], vec![1, 2, 1], vec![1, 2, 2], vec![1, 2, 3]]
        );
        assert!(enumerate_encodings(9).is_err());
    }

    #[test]
    fn class_properties() {
        let c = encode_index_list(&[4, 2, 4]);
        assert_eq!(c.t_prime(), 2);
        assert!(!c.all_distinct());
        assert!(c.is_restricted_growth());
        assert!(!EncodingClass { x: vec![1, 3] }.is_restricted_growth());
        assert!(!EncodingClass { x: vec![2, 1] }.is_restricted_growth());
    }
}
