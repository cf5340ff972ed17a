//! The Gindikin set: which multipliers are Laplace transforms of positive
//! measures, with certificates. Membership is decided by searching
//! signature tuples over the anchors ℘ ∪ S; feasibility decouples per
//! coordinate into pinned equalities and strict inequalities against
//! half-integer thresholds, so all comparisons are exact in f64 for
//! dyadic inputs.

use crate::algebra::Algebra;
use crate::error::{Error, Result};
use crate::poset::{bits, StructureSets};
use crate::power::{n_profile, Multiplier};
use crate::triangular::OrbitSignature;

/// The signature family ε^i of one anchor: ψ vanishes off I_{i⪯}, and on
/// the separators too when the anchor is minimal. Signatures are listed
/// in ascending mask order (all-dead first).
#[derive(Debug, Clone)]
pub struct SignatureFamily {
    pub anchor: usize,
    pub free_mask: u64,
    pub signatures: Vec<OrbitSignature>,
}

/// ε^i for every anchor, in linear-extension order of the anchors.
pub fn enumerate_signatures(alg: &Algebra, st: &StructureSets) -> Vec<SignatureFamily> {
    let p = alg.poset();
    let n = p.len();
    st.anchors(p)
        .into_iter()
        .map(|i| {
            let free_mask = if st.is_root(i) {
                p.up_set(i) & !st.separators
            } else {
                p.up_set(i)
            };
            let slots: Vec<usize> = bits(free_mask).take_while(|&j| j < n).collect();
            let mut signatures = Vec::with_capacity(1 << slots.len());
            for pick in 0u64..(1 << slots.len()) {
                let mut mask = 0u64;
                for (b, &j) in slots.iter().enumerate() {
                    if pick >> b & 1 == 1 {
                        mask |= 1 << j;
                    }
                }
                signatures.push(OrbitSignature::from_mask(n, mask));
            }
            signatures.sort_by_key(|s| s.mask());
            signatures.dedup_by_key(|s| s.mask());
            SignatureFamily { anchor: i, free_mask, signatures }
        })
        .collect()
}

/// One anchor's share of a Gindikin decomposition.
#[derive(Debug, Clone)]
pub struct XiComponent {
    pub anchor: usize,
    pub psi: OrbitSignature,
    /// λ values, pinned to n_j^{i,ψ}/2 at dead slots of the up-set.
    pub chi: Multiplier,
    /// The reduced multiplier (dead slots zeroed) driving the orbit
    /// measure: λ_j − (1 − ψ(j)) n_j^{i,ψ}/2.
    pub chi_tilde: Multiplier,
}

/// A certificate that χ lies in the Gindikin set: components per anchor
/// summing to χ exactly.
#[derive(Debug, Clone)]
pub struct XiWitness {
    pub components: Vec<XiComponent>,
}

impl XiWitness {
    pub fn reconstruct(&self, n: usize) -> Multiplier {
        self.components
            .iter()
            .fold(Multiplier::zeros(n), |acc, c| acc.add(&c.chi))
    }
}

/// Checks whether a single-anchor multiplier lies in Ξ(i) and finds the
/// unique signature if so. The slot decision is forced in linear order:
/// equality with the pinned value means dead, strict excess means live.
pub fn xi_component_check(
    alg: &Algebra,
    st: &StructureSets,
    i: usize,
    chi_i: &Multiplier,
) -> Result<Option<(OrbitSignature, Multiplier)>> {
    let p = alg.poset();
    let n = p.len();
    if !chi_i.supported_on(p.up_set(i)) {
        let bad = (0..n).find(|&j| chi_i.get(j) != 0.0 && !p.leq(i, j)).unwrap();
        return Err(Error::SupportViolation(p.label(bad).to_string()));
    }
    let allowed = if st.is_root(i) { p.up_set(i) & !st.separators } else { p.up_set(i) };
    let mut on = vec![false; n];
    for &j in p.linear_extension() {
        if !p.leq(i, j) {
            continue;
        }
        let pinned: f64 = (0..n)
            .filter(|&k| p.lt(k, j) && on[k])
            .map(|k| alg.dims().pair(j, k) as f64 / 2.0)
            .sum();
        let l = chi_i.get(j);
        if allowed >> j & 1 == 0 {
            if l != pinned {
                return Ok(None);
            }
        } else if l == pinned {
            on[j] = false;
        } else if l > pinned {
            on[j] = true;
        } else {
            return Ok(None);
        }
    }
    let psi = OrbitSignature::from_bools(on);
    let prof = n_profile(alg, Some(i), &psi);
    let mut tilde = Multiplier::zeros(n);
    for j in bits(p.up_set(i)).take_while(|&j| j < n) {
        if psi.get(j) {
            tilde.set(j, chi_i.get(j));
        } else {
            tilde.set(j, chi_i.get(j) - prof.n_j[j] as f64 / 2.0);
        }
    }
    Ok(Some((psi, tilde)))
}

/// Builds the witness for a fixed signature tuple, if feasible. Excess at
/// a coordinate is split evenly over its live slots (the last slot takes
/// the remainder so components reconstruct χ exactly).
pub fn witness_for_tuple(
    alg: &Algebra,
    chi: &Multiplier,
    tuple: &[(usize, OrbitSignature)],
) -> Option<XiWitness> {
    let p = alg.poset();
    let n = p.len();
    let profs: Vec<_> =
        tuple.iter().map(|(i, psi)| n_profile(alg, Some(*i), psi)).collect();
    let mut shares = vec![vec![0.0; n]; tuple.len()];
    for j in 0..n {
        let mut pinned_sum = 0.0;
        let mut live = Vec::new();
        let mut threshold_sum = 0.0;
        for (s, (i, psi)) in tuple.iter().enumerate() {
            if !p.leq(*i, j) {
                continue;
            }
            let half = profs[s].n_j[j] as f64 / 2.0;
            if psi.get(j) {
                live.push((s, half));
                threshold_sum += half;
            } else {
                pinned_sum += half;
                shares[s][j] = half;
            }
        }
        let l = chi.get(j);
        if live.is_empty() {
            if l != pinned_sum {
                return None;
            }
        } else {
            if l <= pinned_sum + threshold_sum {
                return None;
            }
            let per = (l - pinned_sum - threshold_sum) / live.len() as f64;
            let mut assigned = pinned_sum;
            for (k, &(s, half)) in live.iter().enumerate() {
                // last live slot takes the remainder for exact reconstruction
                let v = if k + 1 == live.len() { l - assigned } else { half + per };
                shares[s][j] = v;
                assigned += v;
            }
        }
    }
    let mut components = Vec::new();
    for (s, (i, psi)) in tuple.iter().enumerate() {
        let chi_i = Multiplier::new(shares[s].clone());
        let prof = &profs[s];
        let mut tilde = Multiplier::zeros(n);
        for j in bits(p.up_set(*i)).take_while(|&j| j < n) {
            if psi.get(j) {
                tilde.set(j, chi_i.get(j));
            } else {
                tilde.set(j, chi_i.get(j) - prof.n_j[j] as f64 / 2.0);
            }
        }
        components.push(XiComponent { anchor: *i, psi: psi.clone(), chi: chi_i, chi_tilde: tilde });
    }
    Some(XiWitness { components })
}

/// Searches signature tuples in lexicographic order (first anchor varies
/// slowest) and returns the first feasible witness.
pub fn xi_membership(alg: &Algebra, st: &StructureSets, chi: &Multiplier) -> Option<XiWitness> {
    let families = enumerate_signatures(alg, st);
    if families.is_empty() {
        return if chi.is_zero() { Some(XiWitness { components: Vec::new() }) } else { None };
    }
    let mut idx = vec![0usize; families.len()];
    loop {
        let tuple: Vec<(usize, OrbitSignature)> = families
            .iter()
            .zip(&idx)
            .map(|(f, &k)| (f.anchor, f.signatures[k].clone()))
            .collect();
        if let Some(w) = witness_for_tuple(alg, chi, &tuple) {
            return Some(w);
        }
        // odometer: last anchor fastest
        let mut pos = families.len();
        loop {
            if pos == 0 {
                return None;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < families[pos].signatures.len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureClass {
    NotRiesz,
    Dirac,
    Singular,
    AbsolutelyContinuous,
}

impl std::fmt::Display for MeasureClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            MeasureClass::NotRiesz => "not a Riesz measure",
            MeasureClass::Dirac => "Dirac",
            MeasureClass::Singular => "singular",
            MeasureClass::AbsolutelyContinuous => "absolutely continuous",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone)]
pub struct MeasureClassification {
    pub class: MeasureClass,
    pub generates_nef: bool,
    pub witness: Option<XiWitness>,
}

/// True when λ_i > n_{i.}/2 for every i (the density condition).
pub fn is_absolutely_continuous(alg: &Algebra, chi: &Multiplier) -> bool {
    let p = alg.poset();
    (0..p.len()).all(|i| chi.get(i) > alg.dims().n_below(p, i) as f64 / 2.0)
}

pub fn classify_measure(
    alg: &Algebra,
    st: &StructureSets,
    chi: &Multiplier,
) -> MeasureClassification {
    let witness = xi_membership(alg, st, chi);
    let class = if witness.is_none() {
        MeasureClass::NotRiesz
    } else if chi.is_zero() {
        MeasureClass::Dirac
    } else if is_absolutely_continuous(alg, chi) {
        MeasureClass::AbsolutelyContinuous
    } else {
        MeasureClass::Singular
    };
    let anchors_mask = st.roots | st.separators;
    let generates_nef = witness.is_some()
        && bits(anchors_mask)
            .take_while(|&i| i < alg.size())
            .all(|i| chi.get(i) != 0.0);
    MeasureClassification { class, generates_nef, witness }
}
