//! Determinants, principal minors, generalized power functions and the
//! generalized gamma functions of the cone and its boundary orbits.

use crate::algebra::{Algebra, Element};
use crate::error::{Error, Result};
use crate::poset::{bits, StructureSets};
use crate::special::ln_gamma;
use crate::triangular::{LowerTriangular, OrbitSignature};

/// A multiplier: one real exponent per element of the index set.
#[derive(Debug, Clone, PartialEq)]
pub struct Multiplier {
    lambda: Vec<f64>,
}

impl Multiplier {
    pub fn new(lambda: Vec<f64>) -> Multiplier {
        Multiplier { lambda }
    }

    pub fn zeros(n: usize) -> Multiplier {
        Multiplier { lambda: vec![0.0; n] }
    }

    pub fn constant(n: usize, v: f64) -> Multiplier {
        Multiplier { lambda: vec![v; n] }
    }

    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.lambda[i]
    }

    pub fn set(&mut self, i: usize, v: f64) {
        self.lambda[i] = v;
    }

    pub fn values(&self) -> &[f64] {
        &self.lambda
    }

    pub fn add(&self, other: &Multiplier) -> Multiplier {
        Multiplier {
            lambda: self.lambda.iter().zip(&other.lambda).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.lambda.iter().all(|&l| l == 0.0)
    }

    /// True when every nonzero coordinate lies inside `mask`.
    pub fn supported_on(&self, mask: u64) -> bool {
        self.lambda.iter().enumerate().all(|(i, &l)| l == 0.0 || mask >> i & 1 == 1)
    }

    /// χ̈ = {−n_i}: the exponent shift of the Lebesgue density.
    pub fn density_shift(alg: &Algebra) -> Multiplier {
        let p = alg.poset();
        Multiplier {
            lambda: (0..p.len()).map(|i| -alg.dims().n_i(p, i)).collect(),
        }
    }
}

/// Strict and large principal minors, from the factor diagonal.
#[derive(Debug, Clone)]
pub struct MinorTable {
    /// Δ_{≺k}: product of t_jj² over the strict down-set (1 when empty).
    pub strict: Vec<f64>,
    /// Δ_{⪯k}: product over the full down-set.
    pub large: Vec<f64>,
    pub det: f64,
}

/// Minors of X ∈ P via its factorization.
pub fn minors(alg: &Algebra, x: &Element) -> Result<MinorTable> {
    let t = alg.cholesky(x)?;
    Ok(minors_of_factor(alg, &t))
}

pub fn minors_of_factor(alg: &Algebra, t: &LowerTriangular) -> MinorTable {
    let p = alg.poset();
    let n = p.len();
    let sq: Vec<f64> = t.diag.iter().map(|d| d * d).collect();
    let prod = |mask: u64| bits(mask).take_while(|&j| j < n).map(|j| sq[j]).product::<f64>();
    MinorTable {
        strict: (0..n).map(|k| prod(p.strict_down_set(k))).collect(),
        large: (0..n).map(|k| prod(p.down_set(k))).collect(),
        det: sq.iter().product(),
    }
}

/// log Δ_χ(X) restricted to the columns in `scope`: Σ 2 λ_k log t_kk.
fn ln_power_of_factor(t: &LowerTriangular, chi: &Multiplier, scope: u64) -> f64 {
    bits(scope)
        .take_while(|&k| k < t.diag.len())
        .map(|k| 2.0 * chi.get(k) * t.diag[k].ln())
        .sum()
}

/// The generalized power Δ_χ(X) = Π_k (Δ_{⪯k}/Δ_{≺k})^{λ_k}.
pub fn gen_power(alg: &Algebra, x: &Element, chi: &Multiplier) -> Result<f64> {
    Ok(ln_gen_power(alg, x, chi)?.exp())
}

pub fn ln_gen_power(alg: &Algebra, x: &Element, chi: &Multiplier) -> Result<f64> {
    let t = alg.cholesky(x)?;
    Ok(ln_power_of_factor(&t, chi, u64::MAX))
}

/// Δ^{(i)}_χ(X): the product restricted to k ∈ I_{i⪯}.
pub fn gen_power_upset(alg: &Algebra, x: &Element, chi: &Multiplier, i: usize) -> Result<f64> {
    let t = alg.cholesky(x)?;
    Ok(ln_power_of_factor(&t, chi, alg.poset().up_set(i)).exp())
}

/// Δ^ψ_χ(T·e_ψ) = Δ^{(i)}_χ(TT*) on an orbit: requires χ supported on
/// I_{i⪯} and vanishing where ψ does.
pub fn gen_power_orbit(
    alg: &Algebra,
    t: &LowerTriangular,
    psi: &OrbitSignature,
    i: usize,
    chi: &Multiplier,
) -> Result<f64> {
    let p = alg.poset();
    if !chi.supported_on(p.up_set(i)) {
        let bad = (0..p.len()).find(|&j| chi.get(j) != 0.0 && !p.leq(i, j)).unwrap();
        return Err(Error::SupportViolation(p.label(bad).to_string()));
    }
    for j in bits(p.up_set(i)).take_while(|&j| j < p.len()) {
        if !psi.get(j) && chi.get(j) != 0.0 {
            return Err(Error::MultiplierOutsideXpsi(p.label(j).to_string()));
        }
    }
    Ok(ln_power_of_factor(t, chi, p.up_set(i)).exp())
}

/// The exponents n_j^{i,ψ} = Σ_{k≺j} ψ(k) n_kj for j in the anchor's
/// up-set, with |ψ| and |n^ψ|.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExponentProfile {
    pub n_j: Vec<usize>,
    /// |ψ| over the scope.
    pub weight: usize,
    /// |n^ψ| = Σ_j n_j over the scope.
    pub total: usize,
    pub scope: u64,
}

/// Exponent profile for anchor `i` (or the whole index set when `None`).
pub fn n_profile(alg: &Algebra, i: Option<usize>, psi: &OrbitSignature) -> ExponentProfile {
    let p = alg.poset();
    let n = p.len();
    let scope = i.map(|i| p.up_set(i)).unwrap_or((1u64 << n) - 1);
    let mut n_j = vec![0usize; n];
    for j in bits(scope).take_while(|&j| j < n) {
        n_j[j] = (0..n)
            .filter(|&k| p.lt(k, j) && psi.get(k))
            .map(|k| alg.dims().pair(j, k))
            .sum();
    }
    let weight = bits(scope).take_while(|&j| j < n).filter(|&j| psi.get(j)).count();
    let total = n_j.iter().sum();
    ExponentProfile { n_j, weight, total, scope }
}

/// ln Γ_{T_l^+·e_ψ}(χ) = −|ψ| ln2 + |n^ψ|/2 lnπ + Σ_{ψ(j)=1} lnΓ(λ_j − n_j/2).
///
/// The π exponent is positive: the Gaussian column integrals contribute
/// π^{+dim/2} each, which is also what the closed cone gamma requires.
/// Values of χ at dead slots do not enter the integral and are ignored,
/// so the pinned components of a Gindikin witness can be passed directly.
pub fn ln_gamma_orbit(
    alg: &Algebra,
    i: usize,
    psi: &OrbitSignature,
    chi: &Multiplier,
) -> Result<f64> {
    let p = alg.poset();
    if !chi.supported_on(p.up_set(i)) {
        let bad = (0..p.len()).find(|&j| chi.get(j) != 0.0 && !p.leq(i, j)).unwrap();
        return Err(Error::SupportViolation(p.label(bad).to_string()));
    }
    let prof = n_profile(alg, Some(i), psi);
    let mut ln = -(prof.weight as f64) * 2.0f64.ln()
        + 0.5 * prof.total as f64 * std::f64::consts::PI.ln();
    for j in bits(prof.scope).take_while(|&j| j < p.len()) {
        if psi.get(j) {
            let bound = prof.n_j[j] as f64 / 2.0;
            if chi.get(j) <= bound {
                return Err(Error::Divergent { label: p.label(j).to_string(), bound });
            }
            ln += ln_gamma(chi.get(j) - bound);
        }
    }
    Ok(ln)
}

pub fn gamma_orbit(
    alg: &Algebra,
    i: usize,
    psi: &OrbitSignature,
    chi: &Multiplier,
) -> Result<f64> {
    Ok(ln_gamma_orbit(alg, i, psi, chi)?.exp())
}

/// ln Γ_P(χ) = (n_. − |I|)/2 · lnπ + Σ_i lnΓ(λ_i − n_{i.}/2).
pub fn ln_gamma_cone(alg: &Algebra, chi: &Multiplier) -> Result<f64> {
    let p = alg.poset();
    let mut ln =
        0.5 * (alg.dims().dim_h(p) - p.len()) as f64 * std::f64::consts::PI.ln();
    for i in 0..p.len() {
        let bound = alg.dims().n_below(p, i) as f64 / 2.0;
        if chi.get(i) <= bound {
            return Err(Error::Divergent { label: p.label(i).to_string(), bound });
        }
        ln += ln_gamma(chi.get(i) - bound);
    }
    Ok(ln)
}

pub fn gamma_cone(alg: &Algebra, chi: &Multiplier) -> Result<f64> {
    Ok(ln_gamma_cone(alg, chi)?.exp())
}

/// The decomposition χ = Σ χ_i along the distinguished signatures 1_i:
/// within each anchor's up-set the dead slots take the pinned value
/// n_j^{i,1_i}/2 and the live slot keeps the remainder. Defined exactly
/// when each index is covered by exactly one live slot (single coverage),
/// which holds when no two separators are comparable.
pub fn anchor_components(
    alg: &Algebra,
    st: &StructureSets,
    chi: &Multiplier,
) -> Option<Vec<(usize, OrbitSignature, Multiplier)>> {
    let p = alg.poset();
    let n = p.len();
    let anchors = st.anchors(p);
    let mut cover = vec![0usize; n];
    let sigs: Vec<OrbitSignature> =
        anchors.iter().map(|&i| OrbitSignature::one_anchor(alg, st, i)).collect();
    for sig in &sigs {
        for j in 0..n {
            if sig.get(j) {
                cover[j] += 1;
            }
        }
    }
    if cover.iter().any(|&c| c != 1) {
        return None;
    }
    let mut out = Vec::new();
    for (&i, sig) in anchors.iter().zip(&sigs) {
        let prof = n_profile(alg, Some(i), sig);
        let mut chi_i = Multiplier::zeros(n);
        for j in bits(p.up_set(i)).take_while(|&j| j < n) {
            if sig.get(j) {
                // remainder after every other anchor's pinned share
                let pinned: f64 = anchors
                    .iter()
                    .zip(&sigs)
                    .filter(|&(&a, s)| a != i && p.leq(a, j) && !s.get(j))
                    .map(|(&a, s)| n_profile(alg, Some(a), s).n_j[j] as f64 / 2.0)
                    .sum();
                chi_i.set(j, chi.get(j) - pinned);
            } else {
                chi_i.set(j, prof.n_j[j] as f64 / 2.0);
            }
        }
        out.push((i, sig.clone(), chi_i));
    }
    Some(out)
}
