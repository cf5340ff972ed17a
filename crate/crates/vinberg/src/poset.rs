//! Finite partially ordered index sets and their derived structure.
//!
//! The order relation is stored as a reflexive-transitive closure over
//! bitmasks, so every query below is O(1) or a popcount. Elements are
//! addressed by their position in the label list; labels only matter at
//! the parsing and reporting boundaries.

use std::collections::HashMap;

use crate::error::{Error, Result};

pub const MAX_ELEMENTS: usize = 64;

/// A finite poset with a fixed, deterministic linear extension.
#[derive(Debug, Clone, PartialEq)]
pub struct Poset {
    labels: Vec<String>,
    /// `leq[i]` has bit `j` set iff i ⪯ j (reflexive-transitive closure).
    leq: Vec<u64>,
    /// Topological order of element indices, minimal elements first.
    /// Ties broken by position in the label list.
    lin_ext: Vec<usize>,
}

impl Poset {
    /// Builds a poset from labels and strict relation pairs `(lo, hi)`
    /// meaning `lo ≺ hi`. Covers or full relations are accepted; the
    /// closure is computed internally.
    pub fn new<S: AsRef<str>>(labels: &[S], relations: &[(S, S)]) -> Result<Poset> {
        let labels: Vec<String> = labels.iter().map(|s| s.as_ref().to_string()).collect();
        let n = labels.len();
        if n > MAX_ELEMENTS {
            return Err(Error::SpecError(format!(
                "at most {MAX_ELEMENTS} elements supported, got {n}"
            )));
        }
        let mut index = HashMap::new();
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(Error::DuplicateElement(l.clone()));
            }
        }
        // Strict adjacency, then Warshall closure.
        let mut strict = vec![0u64; n];
        for (lo, hi) in relations {
            let &a = index
                .get(lo.as_ref())
                .ok_or_else(|| Error::UnknownLabelInRelation(lo.as_ref().to_string()))?;
            let &b = index
                .get(hi.as_ref())
                .ok_or_else(|| Error::UnknownLabelInRelation(hi.as_ref().to_string()))?;
            if a == b {
                return Err(Error::CycleDetected(labels[a].clone()));
            }
            strict[a] |= 1 << b;
        }
        for k in 0..n {
            for i in 0..n {
                if strict[i] >> k & 1 == 1 {
                    strict[i] |= strict[k];
                }
            }
        }
        for i in 0..n {
            if strict[i] >> i & 1 == 1 {
                return Err(Error::CycleDetected(labels[i].clone()));
            }
        }
        let leq: Vec<u64> = (0..n).map(|i| strict[i] | 1 << i).collect();

        // Stable topological sort: repeatedly take the first-listed element
        // whose strict predecessors are all placed.
        let mut placed = 0u64;
        let mut lin_ext = Vec::with_capacity(n);
        while lin_ext.len() < n {
            let next = (0..n)
                .find(|&i| placed >> i & 1 == 0 && (0..n).all(|j| leq[j] >> i & 1 == 0 || j == i || placed >> j & 1 == 1))
                .expect("acyclic relation always has a minimal element");
            placed |= 1 << next;
            lin_ext.push(next);
        }

        Ok(Poset { labels, leq, lin_ext })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// i ⪯ j in the closure.
    pub fn leq(&self, i: usize, j: usize) -> bool {
        self.leq[i] >> j & 1 == 1
    }

    /// i ≺ j (strict).
    pub fn lt(&self, i: usize, j: usize) -> bool {
        i != j && self.leq(i, j)
    }

    pub fn comparable(&self, i: usize, j: usize) -> bool {
        self.leq(i, j) || self.leq(j, i)
    }

    /// Up-set I_{i⪯} as a bitmask.
    pub fn up_set(&self, i: usize) -> u64 {
        self.leq[i]
    }

    /// Strict up-set I_{i≺}.
    pub fn strict_up_set(&self, i: usize) -> u64 {
        self.leq[i] & !(1 << i)
    }

    /// Down-set I_{⪯i}.
    pub fn down_set(&self, i: usize) -> u64 {
        let mut m = 0;
        for j in 0..self.len() {
            if self.leq(j, i) {
                m |= 1 << j;
            }
        }
        m
    }

    /// Strict down-set I_{≺i}.
    pub fn strict_down_set(&self, i: usize) -> u64 {
        self.down_set(i) & !(1 << i)
    }

    /// Rank of the sub-cone at i: |I_{i⪯}|.
    pub fn rank_up(&self, i: usize) -> usize {
        self.up_set(i).count_ones() as usize
    }

    /// Linear extension (element indices, minimal first).
    pub fn linear_extension(&self) -> &[usize] {
        &self.lin_ext
    }

    /// The poset with every strict pair reversed.
    pub fn opposite(&self) -> Poset {
        let n = self.len();
        let mut pairs = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if self.lt(i, j) {
                    pairs.push((self.labels[j].clone(), self.labels[i].clone()));
                }
            }
        }
        Poset::new(&self.labels, &pairs).expect("opposite of a valid poset is valid")
    }

    /// Ordered strict comparable pairs `(hi, lo)` with lo ≺ hi, in a fixed
    /// deterministic order (by column in the linear extension, then row).
    pub fn lower_pairs(&self) -> Vec<(usize, usize)> {
        let mut v = Vec::new();
        for &lo in &self.lin_ext {
            for &hi in &self.lin_ext {
                if self.lt(lo, hi) {
                    v.push((hi, lo));
                }
            }
        }
        v
    }

    /// True when the scalar block algebra on this poset can satisfy the
    /// triangular homogeneity axiom: no incomparable pair may have both a
    /// common strict lower bound and a common strict upper bound.
    pub fn scalar_admissible(&self) -> bool {
        let n = self.len();
        for a in 0..n {
            for b in 0..n {
                if a != b && !self.comparable(a, b) {
                    let common_lower = (0..n).any(|m| self.lt(m, a) && self.lt(m, b));
                    let common_upper = (0..n).any(|m| self.lt(a, m) && self.lt(b, m));
                    if common_lower && common_upper {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// Per-element order sets.
#[derive(Debug, Clone)]
pub struct OrderProfile {
    pub down_sets: Vec<u64>,
    pub strict_down_sets: Vec<u64>,
    pub up_sets: Vec<u64>,
    pub strict_up_sets: Vec<u64>,
    pub rank_up: Vec<usize>,
}

pub fn order_sets(p: &Poset) -> OrderProfile {
    let n = p.len();
    OrderProfile {
        down_sets: (0..n).map(|i| p.down_set(i)).collect(),
        strict_down_sets: (0..n).map(|i| p.strict_down_set(i)).collect(),
        up_sets: (0..n).map(|i| p.up_set(i)).collect(),
        strict_up_sets: (0..n).map(|i| p.strict_up_set(i)).collect(),
        rank_up: (0..n).map(|i| p.rank_up(i)).collect(),
    }
}

/// Separators, minimal elements and child sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructureSets {
    /// All separators: j with j ∈ I_{i1⪯} ∩ I_{i2⪯} for distinct i1, i2 ∉ {j}.
    pub separators: u64,
    /// Minimal elements (I_{≺i} = ∅). Note this includes isolated vertices,
    /// which the decomposition of a cone element requires.
    pub roots: u64,
    /// S_i = S ∩ I_{i⪯} per element.
    pub separators_above: Vec<u64>,
    /// M_i = {j : I_{≺j} = {i}}.
    pub children: Vec<u64>,
}

impl StructureSets {
    /// Anchors ℘ ∪ S in linear-extension order.
    pub fn anchors(&self, p: &Poset) -> Vec<usize> {
        p.linear_extension()
            .iter()
            .copied()
            .filter(|&i| (self.roots | self.separators) >> i & 1 == 1)
            .collect()
    }

    pub fn is_separator(&self, i: usize) -> bool {
        self.separators >> i & 1 == 1
    }

    pub fn is_root(&self, i: usize) -> bool {
        self.roots >> i & 1 == 1
    }
}

pub fn structure_sets(p: &Poset) -> StructureSets {
    let n = p.len();
    let mut separators = 0u64;
    for j in 0..n {
        let below: Vec<usize> = (0..n).filter(|&i| i != j && p.leq(i, j)).collect();
        if below.len() >= 2 {
            separators |= 1 << j;
        }
    }
    let mut roots = 0u64;
    for i in 0..n {
        if p.strict_down_set(i) == 0 {
            roots |= 1 << i;
        }
    }
    let separators_above = (0..n).map(|i| separators & p.up_set(i)).collect();
    let children = (0..n)
        .map(|i| {
            let mut m = 0u64;
            for j in 0..n {
                if p.strict_down_set(j) == 1 << i {
                    m |= 1 << j;
                }
            }
            m
        })
        .collect();
    StructureSets { separators, roots, separators_above, children }
}

/// Iterates over the indices set in a bitmask, ascending.
pub fn bits(mask: u64) -> impl Iterator<Item = usize> {
    (0..64).filter(move |&i| mask >> i & 1 == 1)
}
