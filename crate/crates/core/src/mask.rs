use crate::error::{Error, Result};

/// Boolean grid over (row, feature) cells, row-major.
///
/// The same type backs observation masks (true = present in source data),
/// amputation masks (true = artificially removed) and visibility masks
/// (true = the imputer may read the cell).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mask {
    n_rows: usize,
    n_features: usize,
    bits: Vec<bool>,
}

pub type ObservationMask = Mask;
pub type AmputationMask = Mask;

impl Mask {
    pub fn new(n_rows: usize, n_features: usize, fill: bool) -> Self {
        Mask {
            n_rows,
            n_features,
            bits: vec![fill; n_rows * n_features],
        }
    }

    pub fn from_bits(n_rows: usize, n_features: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != n_rows * n_features {
            return Err(Error::Shape(format!(
                "mask has {} bits, expected {}x{}",
                bits.len(),
                n_rows,
                n_features
            )));
        }
        Ok(Mask {
            n_rows,
            n_features,
            bits,
        })
    }

    #[inline]
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    #[inline]
    pub fn n_features(&self) -> usize {
        self.n_features
    }

    #[inline]
    pub fn get(&self, row: usize, feature: usize) -> bool {
        self.bits[row * self.n_features + feature]
    }

    #[inline]
    pub fn set(&mut self, row: usize, feature: usize, value: bool) {
        self.bits[row * self.n_features + feature] = value;
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn bits_mut(&mut self) -> &mut [bool] {
        &mut self.bits
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn count_feature(&self, feature: usize) -> usize {
        (0..self.n_rows).filter(|&r| self.get(r, feature)).count()
    }

    pub fn same_shape(&self, other: &Mask) -> bool {
        self.n_rows == other.n_rows && self.n_features == other.n_features
    }

    fn zip_with(&self, other: &Mask, f: impl Fn(bool, bool) -> bool) -> Mask {
        assert!(self.same_shape(other), "mask shape mismatch");
        Mask {
            n_rows: self.n_rows,
            n_features: self.n_features,
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn and(&self, other: &Mask) -> Mask {
        self.zip_with(other, |a, b| a && b)
    }

    /// Cells set here but not in `other`.
    pub fn and_not(&self, other: &Mask) -> Mask {
        self.zip_with(other, |a, b| a && !b)
    }

    pub fn is_subset_of(&self, other: &Mask) -> bool {
        self.same_shape(other) && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    /// Gathers the given rows (in order) into a new mask.
    pub fn select_rows(&self, rows: &[usize]) -> Mask {
        let mut bits = Vec::with_capacity(rows.len() * self.n_features);
        for &r in rows {
            bits.extend_from_slice(&self.bits[r * self.n_features..(r + 1) * self.n_features]);
        }
        Mask {
            n_rows: rows.len(),
            n_features: self.n_features,
            bits,
        }
    }

    /// Copy with every feature other than `feature` cleared.
    pub fn restrict_feature(&self, feature: usize) -> Mask {
        let mut out = Mask::new(self.n_rows, self.n_features, false);
        for r in 0..self.n_rows {
            out.set(r, feature, self.get(r, feature));
        }
        out
    }

    /// Keeps only the bits of rows for which `keep_row` is true.
    pub fn restrict_rows(&self, keep_row: impl Fn(usize) -> bool) -> Mask {
        let mut out = self.clone();
        for r in 0..self.n_rows {
            if !keep_row(r) {
                for f in 0..self.n_features {
                    out.set(r, f, false);
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_algebra() {
        let a = Mask::from_bits(1, 3, vec![true, true, false]).unwrap();
        let b = Mask::from_bits(1, 3, vec![true, false, false]).unwrap();
        assert_eq!(a.and_not(&b).bits(), &[false, true, false]);
        assert_eq!(a.and(&b).count(), 1);
        assert!(b.is_subset_of(&a));
        assert!(!a.is_subset_of(&b));
        assert!(Mask::from_bits(2, 2, vec![true]).is_err());
    }
}
