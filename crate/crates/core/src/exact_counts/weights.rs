use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// One row `q_1..q_alpha` of a triangular weight array.
///
/// Lengths above `alpha` carry weight zero by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightRow {
    q: Vec<f64>,
}

impl WeightRow {
    /// `q[0]` is the weight of cycle length 1.
    pub fn new(q: Vec<f64>) -> Result<Self> {
        for (i, &v) in q.iter().enumerate() {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::BadWeight { index: i + 1, value: v });
            }
        }
        Ok(WeightRow { q })
    }

    /// `q_j = 1` for `1 <= j <= alpha`.
    pub fn unit(alpha: usize) -> Self {
        WeightRow { q: vec![1.0; alpha] }
    }

    /// `q_j = 1` for `lo <= j <= hi`, zero below `lo`.
    pub fn indicator(lo: usize, hi: usize) -> Self {
        let lo = lo.max(1);
        let mut q = vec![0.0; hi];
        for v in q.iter_mut().skip(lo - 1) {
            *v = 1.0;
        }
        WeightRow { q }
    }

    pub fn from_fn(alpha: usize, f: impl Fn(usize) -> f64) -> Result<Self> {
        Self::new((1..=alpha).map(f).collect())
    }

    /// Largest cycle length allowed by the row.
    pub fn alpha(&self) -> usize {
        self.q.len()
    }

    /// Weight of cycle length `j` (zero outside `1..=alpha`).
    #[inline]
    pub fn get(&self, j: usize) -> f64 {
        if j == 0 || j > self.q.len() {
            0.0
        } else {
            self.q[j - 1]
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.q
    }

    pub fn is_zero(&self) -> bool {
        self.q.iter().all(|&v| v == 0.0)
    }

    /// Iterator over `(j, q_j)` with `q_j > 0`.
    pub fn support(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.q
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 0.0)
            .map(|(i, &v)| (i + 1, v))
    }

    /// When every positive weight equals one on a contiguous block
    /// `lo..=hi`, returns that block.
    pub fn unit_block(&self) -> Option<(usize, usize)> {
        let lo = self.q.iter().position(|&v| v != 0.0)? + 1;
        let hi = self.q.iter().rposition(|&v| v != 0.0)? + 1;
        if self.q[lo - 1..hi].iter().all(|&v| v == 1.0) {
            Some((lo, hi))
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_negative() {
        assert!(matches!(
            WeightRow::new(vec![1.0, -0.5]),
            Err(Error::BadWeight { index: 2, .. })
        ));
        assert!(WeightRow::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn blocks() {
        assert_eq!(WeightRow::unit(4).unit_block(), Some((1, 4)));
        assert_eq!(WeightRow::indicator(3, 7).unit_block(), Some((3, 7)));
        assert_eq!(WeightRow::new(vec![1.0, 2.0]).unwrap().unit_block(), None);
        assert_eq!(WeightRow::new(vec![0.0, 0.0]).unwrap().unit_block(), None);
        assert_eq!(WeightRow::indicator(3, 7).get(2), 0.0);
        assert_eq!(WeightRow::indicator(3, 7).get(8), 0.0);
    }
}
