//! Block dimensions n_ij and the derived counts used everywhere in the
//! gamma and density formulas.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::poset::Poset;

/// Dimensions per comparable strict pair, symmetric in the pair.
#[derive(Debug, Clone)]
pub struct DimensionSystem {
    /// Keyed by `(hi, lo)` with lo ≺ hi.
    dims: BTreeMap<(usize, usize), usize>,
}

impl DimensionSystem {
    /// All pair dimensions equal to one.
    pub fn scalar(p: &Poset) -> DimensionSystem {
        let dims = p.lower_pairs().into_iter().map(|k| (k, 1)).collect();
        DimensionSystem { dims }
    }

    /// Explicit dimensions; pairs not listed default to 1. Keys must be
    /// comparable pairs and dimensions positive.
    pub fn with_dims(p: &Poset, given: &BTreeMap<(usize, usize), usize>) -> Result<DimensionSystem> {
        let mut sys = DimensionSystem::scalar(p);
        for (&(a, b), &d) in given {
            let key = if p.lt(b, a) {
                (a, b)
            } else if p.lt(a, b) {
                (b, a)
            } else {
                return Err(Error::DimensionMismatch(format!(
                    "dimension given for incomparable pair ({}, {})",
                    p.label(a),
                    p.label(b)
                )));
            };
            if d == 0 {
                return Err(Error::DimensionMismatch(format!(
                    "dimension for pair ({}, {}) must be positive",
                    p.label(a),
                    p.label(b)
                )));
            }
            sys.dims.insert(key, d);
        }
        Ok(sys)
    }

    /// n_ij for lo ≺ hi (or hi ≺ lo; symmetric).
    pub fn pair(&self, a: usize, b: usize) -> usize {
        *self
            .dims
            .get(&(a, b))
            .or_else(|| self.dims.get(&(b, a)))
            .expect("dimension queried for incomparable pair")
    }

    /// n_{i.} = Σ_{μ≺i} n_iμ.
    pub fn n_below(&self, p: &Poset, i: usize) -> usize {
        (0..p.len()).filter(|&m| p.lt(m, i)).map(|m| self.pair(i, m)).sum()
    }

    /// n_{.i} = Σ_{i≺μ} n_μi.
    pub fn n_above(&self, p: &Poset, i: usize) -> usize {
        (0..p.len()).filter(|&m| p.lt(i, m)).map(|m| self.pair(m, i)).sum()
    }

    /// n_i = 1 + (n_{i.} + n_{.i})/2, possibly half-integral.
    pub fn n_i(&self, p: &Poset, i: usize) -> f64 {
        1.0 + 0.5 * (self.n_below(p, i) + self.n_above(p, i)) as f64
    }

    /// n_. = Σ n_i = |I| + Σ_pairs n_ij, the dimension of the Hermitian space.
    pub fn dim_h(&self, p: &Poset) -> usize {
        p.len() + self.dims.values().sum::<usize>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain2_derived_counts() {
        let p = Poset::new(&["1", "2"], &[("1", "2")]).unwrap();
        let d = DimensionSystem::scalar(&p);
        assert_eq!(d.n_below(&p, 1), 1);
        assert_eq!(d.n_above(&p, 0), 1);
        assert_eq!(d.n_i(&p, 0), 1.5);
        assert_eq!(d.n_i(&p, 1), 1.5);
        assert_eq!(d.dim_h(&p), 3);
    }

    #[test]
    fn example_poset_counts() {
        let p = Poset::new(&["1", "2", "3", "4"], &[("1", "3"), ("1", "4"), ("2", "3")]).unwrap();
        let d = DimensionSystem::scalar(&p);
        let below: Vec<usize> = (0..4).map(|i| d.n_below(&p, i)).collect();
        assert_eq!(below, vec![0, 0, 2, 1]);
        assert_eq!(d.dim_h(&p), 7);
    }

    #[test]
    fn rejects_incomparable_or_zero() {
        let p = Poset::new(&["1", "2", "3"], &[("1", "3")]).unwrap();
        let mut m = BTreeMap::new();
        m.insert((0, 1), 2);
        assert!(DimensionSystem::with_dims(&p, &m).is_err());
        let mut m = BTreeMap::new();
        m.insert((2, 0), 0);
        assert!(DimensionSystem::with_dims(&p, &m).is_err());
    }
}
