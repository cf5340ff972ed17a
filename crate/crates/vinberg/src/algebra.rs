//! The poset-indexed block algebra: elements, multiplication, involution,
//! trace and the duality pairing.
//!
//! An element carries one real per diagonal slot and one coefficient vector
//! per ordered comparable pair. Products at incomparable target pairs are
//! identically zero (those blocks do not exist), which is what distinguishes
//! this multiplication from the ambient matrix product.
//!
//! Structure data consists of the chain bilinear maps E_ij × E_jk → E_ik
//! for k ≺ j ≺ i together with the involutions f_ij. Every other block
//! product (a·b*, a*·b, and the scalar forms feeding the trace) is derived
//! from these through the trace identities, so supplying the chain maps
//! pins down the whole multiplication. The `scalar` preset (all n_ij = 1,
//! plain real products, f = id) is the default instantiation.

use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicU64, Ordering};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dims::DimensionSystem;
use crate::error::{Error, Result};
use crate::poset::{bits, Poset};

static NEXT_ALGEBRA_ID: AtomicU64 = AtomicU64::new(1);

/// Chain maps and involutions; `Scalar` means every block is 1-dimensional,
/// products are real multiplication and every involution is the identity.
#[derive(Debug, Clone, Default)]
pub enum StructureConstants {
    #[default]
    Scalar,
    General(GeneralStructure),
}

#[derive(Debug, Clone, Default)]
pub struct GeneralStructure {
    /// Keyed by `(hi, mid, lo)` with lo ≺ mid ≺ hi; row-major tensor of
    /// shape (n_himid, n_midlo, n_hilo): entry [p][q][s] is the coefficient
    /// of basis vector s in the product of basis vectors p and q.
    pub chain_maps: HashMap<(usize, usize, usize), Vec<f64>>,
    /// Keyed by `(hi, lo)` with lo ≺ hi; row-major n×n matrix, must be
    /// self-inverse. Pairs not listed use the identity.
    pub involutions: HashMap<(usize, usize), Vec<f64>>,
}

/// An element of the algebra: diagonal reals plus one vector per ordered
/// comparable pair. `low` holds blocks at (hi, lo) with lo ≺ hi, `up` the
/// opposite orientation; both live in the same pair space E_ij.
#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    pub(crate) alg_id: u64,
    pub(crate) diag: Vec<f64>,
    pub(crate) low: Vec<f64>,
    pub(crate) up: Vec<f64>,
}

impl Element {
    pub fn trace(&self) -> f64 {
        self.diag.iter().sum()
    }
}

/// The algebra handle: poset, dimensions, structure constants and the block
/// layout tables. Immutable after construction.
#[derive(Debug)]
pub struct Algebra {
    id: u64,
    poset: Poset,
    dims: DimensionSystem,
    sc: StructureConstants,
    /// Lower pairs (hi, lo) in deterministic order.
    pairs: Vec<(usize, usize)>,
    pair_pos: HashMap<(usize, usize), usize>,
    offset: Vec<usize>,
    pair_dim: Vec<usize>,
    off_len: usize,
}

impl Algebra {
    pub fn new(poset: Poset, dims: DimensionSystem, sc: StructureConstants) -> Result<Algebra> {
        let pairs = poset.lower_pairs();
        let mut pair_pos = HashMap::new();
        let mut offset = Vec::with_capacity(pairs.len());
        let mut pair_dim = Vec::with_capacity(pairs.len());
        let mut off_len = 0;
        for (q, &(hi, lo)) in pairs.iter().enumerate() {
            pair_pos.insert((hi, lo), q);
            offset.push(off_len);
            let d = dims.pair(hi, lo);
            pair_dim.push(d);
            off_len += d;
        }

        if let StructureConstants::General(g) = &sc {
            for &(hi, lo) in &pairs {
                let d = dims.pair(hi, lo);
                if let Some(f) = g.involutions.get(&(hi, lo)) {
                    if f.len() != d * d {
                        return Err(Error::DimensionMismatch(format!(
                            "involution for ({}, {}) must be {d}x{d}",
                            poset.label(hi),
                            poset.label(lo)
                        )));
                    }
                    // f ∘ f = id
                    for r in 0..d {
                        for c in 0..d {
                            let v: f64 = (0..d).map(|k| f[r * d + k] * f[k * d + c]).sum();
                            let want = if r == c { 1.0 } else { 0.0 };
                            if (v - want).abs() > 1e-12 {
                                return Err(Error::InvalidInvolution(format!(
                                    "({}, {})",
                                    poset.label(hi),
                                    poset.label(lo)
                                )));
                            }
                        }
                    }
                }
            }
            for lo in 0..poset.len() {
                for mid in 0..poset.len() {
                    for hi in 0..poset.len() {
                        if poset.lt(lo, mid) && poset.lt(mid, hi) {
                            let t = g.chain_maps.get(&(hi, mid, lo)).ok_or_else(|| {
                                Error::MissingStructureConstant(format!(
                                    "{} ≺ {} ≺ {}",
                                    poset.label(lo),
                                    poset.label(mid),
                                    poset.label(hi)
                                ))
                            })?;
                            let want = dims.pair(hi, mid) * dims.pair(mid, lo) * dims.pair(hi, lo);
                            if t.len() != want {
                                return Err(Error::DimensionMismatch(format!(
                                    "chain map {} ≺ {} ≺ {} must have {want} entries",
                                    poset.label(lo),
                                    poset.label(mid),
                                    poset.label(hi)
                                )));
                            }
                        }
                    }
                }
            }
        }

        Ok(Algebra {
            id: NEXT_ALGEBRA_ID.fetch_add(1, Ordering::Relaxed),
            poset,
            dims,
            sc,
            pairs,
            pair_pos,
            offset,
            pair_dim,
            off_len,
        })
    }

    pub fn scalar(poset: Poset) -> Algebra {
        let dims = DimensionSystem::scalar(&poset);
        Algebra::new(poset, dims, StructureConstants::Scalar).expect("scalar preset is well-formed")
    }

    pub fn poset(&self) -> &Poset {
        &self.poset
    }

    pub fn dims(&self) -> &DimensionSystem {
        &self.dims
    }

    pub fn size(&self) -> usize {
        self.poset.len()
    }

    /// Ordered lower pairs (hi, lo).
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn pair_index(&self, hi: usize, lo: usize) -> usize {
        self.pair_pos[&(hi, lo)]
    }

    pub fn dim_h(&self) -> usize {
        self.size() + self.off_len
    }

    pub(crate) fn id(&self) -> u64 {
        self.id
    }

    pub(crate) fn check(&self, e: &Element) -> Result<()> {
        if e.alg_id == self.id {
            Ok(())
        } else {
            Err(Error::AlgebraMismatch)
        }
    }

    pub fn block<'a>(&self, buf: &'a [f64], q: usize) -> &'a [f64] {
        &buf[self.offset[q]..self.offset[q] + self.pair_dim[q]]
    }

    pub(crate) fn block_range(&self, q: usize) -> std::ops::Range<usize> {
        self.offset[q]..self.offset[q] + self.pair_dim[q]
    }

    fn block_mut<'a>(&self, buf: &'a mut [f64], q: usize) -> &'a mut [f64] {
        &mut buf[self.offset[q]..self.offset[q] + self.pair_dim[q]]
    }

    pub fn zero(&self) -> Element {
        Element {
            alg_id: self.id,
            diag: vec![0.0; self.size()],
            low: vec![0.0; self.off_len],
            up: vec![0.0; self.off_len],
        }
    }

    /// The unit e.
    pub fn unit(&self) -> Element {
        let mut e = self.zero();
        e.diag.fill(1.0);
        e
    }

    /// Diagonal unit E_k.
    pub fn diag_unit(&self, k: usize) -> Element {
        let mut e = self.zero();
        e.diag[k] = 1.0;
        e
    }

    /// Diagonal element from a mask (used for e_ψ and sub-units).
    pub fn diag_mask(&self, mask: u64) -> Element {
        let mut e = self.zero();
        for i in bits(mask).take_while(|&i| i < self.size()) {
            e.diag[i] = 1.0;
        }
        e
    }

    /// Unit e_i of the subalgebra on I_{i⪯} (also the boundary unit E^i).
    pub fn upset_unit(&self, i: usize) -> Element {
        self.diag_mask(self.poset.up_set(i))
    }

    /// Unit ě_i of the subalgebra on I_{i≺} (also Ě^i).
    pub fn strict_upset_unit(&self, i: usize) -> Element {
        self.diag_mask(self.poset.strict_up_set(i))
    }

    pub fn add(&self, a: &Element, b: &Element) -> Element {
        let mut c = a.clone();
        for (x, y) in c.diag.iter_mut().zip(&b.diag) {
            *x += y;
        }
        for (x, y) in c.low.iter_mut().zip(&b.low) {
            *x += y;
        }
        for (x, y) in c.up.iter_mut().zip(&b.up) {
            *x += y;
        }
        c
    }

    pub fn sub(&self, a: &Element, b: &Element) -> Element {
        let mut c = a.clone();
        for (x, y) in c.diag.iter_mut().zip(&b.diag) {
            *x -= y;
        }
        for (x, y) in c.low.iter_mut().zip(&b.low) {
            *x -= y;
        }
        for (x, y) in c.up.iter_mut().zip(&b.up) {
            *x -= y;
        }
        c
    }

    pub fn scale(&self, a: &Element, s: f64) -> Element {
        let mut c = a.clone();
        c.diag.iter_mut().for_each(|x| *x *= s);
        c.low.iter_mut().for_each(|x| *x *= s);
        c.up.iter_mut().for_each(|x| *x *= s);
        c
    }

    /// Max absolute coordinate, used for tolerances.
    pub fn max_abs(&self, a: &Element) -> f64 {
        a.diag
            .iter()
            .chain(&a.low)
            .chain(&a.up)
            .fold(0.0f64, |m, &x| m.max(x.abs()))
    }

    fn f_apply(&self, hi: usize, lo: usize, v: &[f64]) -> Vec<f64> {
        match &self.sc {
            StructureConstants::Scalar => v.to_vec(),
            StructureConstants::General(g) => match g.involutions.get(&(hi, lo)) {
                None => v.to_vec(),
                Some(f) => {
                    let d = v.len();
                    (0..d).map(|r| (0..d).map(|c| f[r * d + c] * v[c]).sum()).collect()
                }
            },
        }
    }

    /// The chain product E_{r μ} × E_{μ c} → E_{r c} for c ≺ μ ≺ r.
    pub(crate) fn chain_apply(&self, r: usize, mu: usize, c: usize, x: &[f64], y: &[f64]) -> Vec<f64> {
        match &self.sc {
            StructureConstants::Scalar => vec![x[0] * y[0]],
            StructureConstants::General(g) => {
                let t = &g.chain_maps[&(r, mu, c)];
                let (np, nq, ns) = (x.len(), y.len(), self.dims.pair(r, c));
                let mut out = vec![0.0; ns];
                for p in 0..np {
                    for q in 0..nq {
                        let xy = x[p] * y[q];
                        if xy != 0.0 {
                            for (s, o) in out.iter_mut().enumerate() {
                                *o += xy * t[(p * nq + q) * ns + s];
                            }
                        }
                    }
                }
                out
            }
        }
    }

    /// Column-update product a_{rμ}·(y*)_{μc} for μ ≺ c ≺ r, where `x` is a
    /// lower block at (r,μ) and `y` a lower block at (c,μ). Adjoint of the
    /// chain map (r, c, μ) in its first argument.
    pub(crate) fn lower_conj_product(
        &self,
        r: usize,
        c: usize,
        mu: usize,
        x: &[f64],
        y: &[f64],
    ) -> Vec<f64> {
        match &self.sc {
            StructureConstants::Scalar => vec![x[0] * y[0]],
            StructureConstants::General(g) => {
                let t = &g.chain_maps[&(r, c, mu)];
                let (ns, nq, nt) = (self.dims.pair(r, c), y.len(), x.len());
                let mut out = vec![0.0; ns];
                for (s, o) in out.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for q in 0..nq {
                        for tt in 0..nt {
                            acc += x[tt] * y[q] * t[(s * nq + q) * nt + tt];
                        }
                    }
                    *o = acc;
                }
                out
            }
        }
    }

    /// Row-update product (x*)_{rμ}·y_{μc} for c ≺ r ≺ μ, where `x` is a
    /// lower block at (μ,r) and `y` a lower block at (μ,c). Adjoint of the
    /// chain map (μ, r, c) in its second argument.
    pub(crate) fn conj_lower_product(
        &self,
        mu: usize,
        r: usize,
        c: usize,
        x: &[f64],
        y: &[f64],
    ) -> Vec<f64> {
        match &self.sc {
            StructureConstants::Scalar => vec![x[0] * y[0]],
            StructureConstants::General(g) => {
                let t = &g.chain_maps[&(mu, r, c)];
                let (np, ns, nt) = (x.len(), self.dims.pair(r, c), y.len());
                let mut out = vec![0.0; ns];
                for (s, o) in out.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for p in 0..np {
                        for tt in 0..nt {
                            acc += x[p] * y[tt] * t[(p * ns + s) * nt + tt];
                        }
                    }
                    *o = acc;
                }
                out
            }
        }
    }

    /// Product A_{rμ} × A_{μc} → A_{rc} for μ ≺ c ≺ r, with `x` the lower
    /// block at (r,μ) and `w` the upper block at (μ,c).
    fn lowlow_up_apply(&self, r: usize, c: usize, mu: usize, x: &[f64], w: &[f64]) -> Vec<f64> {
        let y = self.f_apply(c, mu, w);
        self.lower_conj_product(r, c, mu, x, &y)
    }

    /// Product A_{rμ} × A_{μc} → A_{rc} for c ≺ r ≺ μ, with `u` the upper
    /// block at (r,μ) and `y` the lower block at (μ,c).
    fn up_lowlow_apply(&self, mu: usize, r: usize, c: usize, u: &[f64], y: &[f64]) -> Vec<f64> {
        let x = self.f_apply(mu, r, u);
        self.conj_lower_product(mu, r, c, &x, y)
    }

    /// Scalar product of a lower block against an upper block of the same
    /// pair: the (r,r) contribution of a_{rμ} b_{μr} when μ ≺ r. The raw
    /// bilinear pairing of opposite slots is the plain dot in the storage
    /// basis; the inner product ‖a‖² = a·f(a) is built on top of it.
    fn form_low_up(&self, _hi: usize, _lo: usize, x: &[f64], w: &[f64]) -> f64 {
        x.iter().zip(w).map(|(a, b)| a * b).sum()
    }

    /// The (r,r) contribution of a_{rμ} b_{μr} when r ≺ μ: `u` upper at
    /// (r,μ), `y` lower at (μ,r).
    fn form_up_low(&self, _hi: usize, _lo: usize, u: &[f64], y: &[f64]) -> f64 {
        y.iter().zip(u).map(|(a, b)| a * b).sum()
    }

    /// ‖v‖² for a block of pair (hi, lo): v against f(v). Positive for all
    /// v ≠ 0 exactly when the involution is admissible (axiom i).
    pub(crate) fn block_norm2(&self, hi: usize, lo: usize, v: &[f64]) -> f64 {
        let fv = self.f_apply(hi, lo, v);
        v.iter().zip(&fv).map(|(a, b)| a * b).sum()
    }

    /// Polarization of the pair norm: d‖v‖² along dv equals 2·form(v, dv).
    pub(crate) fn block_form(&self, hi: usize, lo: usize, x: &[f64], y: &[f64]) -> f64 {
        let fy = self.f_apply(hi, lo, y);
        let fx = self.f_apply(hi, lo, x);
        let a: f64 = x.iter().zip(&fy).map(|(p, q)| p * q).sum();
        let b: f64 = y.iter().zip(&fx).map(|(p, q)| p * q).sum();
        0.5 * (a + b)
    }

    /// A* — involution: transpose through the f maps.
    pub fn involute(&self, a: &Element) -> Element {
        let mut c = self.zero();
        c.diag.copy_from_slice(&a.diag);
        for (q, &(hi, lo)) in self.pairs.iter().enumerate() {
            let fl = self.f_apply(hi, lo, self.block(&a.low, q));
            let fu = self.f_apply(hi, lo, self.block(&a.up, q));
            self.block_mut(&mut c.up, q).copy_from_slice(&fl);
            self.block_mut(&mut c.low, q).copy_from_slice(&fu);
        }
        c
    }

    /// Writes the lower blocks and diagonal of A·B into `out`.
    fn product_lower_into(&self, a: &Element, b: &Element, out: &mut Element) {
        let n = self.size();
        for r in 0..n {
            let mut v = a.diag[r] * b.diag[r];
            for mu in 0..n {
                if mu == r {
                    continue;
                }
                if self.poset.lt(mu, r) {
                    let q = self.pair_index(r, mu);
                    v += self.form_low_up(r, mu, self.block(&a.low, q), self.block(&b.up, q));
                } else if self.poset.lt(r, mu) {
                    let q = self.pair_index(mu, r);
                    v += self.form_up_low(mu, r, self.block(&a.up, q), self.block(&b.low, q));
                }
            }
            out.diag[r] = v;
        }
        for (q, &(r, c)) in self.pairs.iter().enumerate() {
            let mut z: Vec<f64> = self
                .block(&a.low, q)
                .iter()
                .map(|x| x * b.diag[c])
                .collect();
            for (zi, bi) in z.iter_mut().zip(self.block(&b.low, q)) {
                *zi += a.diag[r] * bi;
            }
            for mu in 0..self.size() {
                if mu == r || mu == c {
                    continue;
                }
                let term = if self.poset.lt(mu, c) {
                    // μ ≺ c ≺ r
                    let qa = self.pair_index(r, mu);
                    let qb = self.pair_index(c, mu);
                    self.lowlow_up_apply(r, c, mu, self.block(&a.low, qa), self.block(&b.up, qb))
                } else if self.poset.lt(c, mu) && self.poset.lt(mu, r) {
                    let qa = self.pair_index(r, mu);
                    let qb = self.pair_index(mu, c);
                    self.chain_apply(r, mu, c, self.block(&a.low, qa), self.block(&b.low, qb))
                } else if self.poset.lt(r, mu) {
                    // c ≺ r ≺ μ
                    let qa = self.pair_index(mu, r);
                    let qb = self.pair_index(mu, c);
                    self.up_lowlow_apply(mu, r, c, self.block(&a.up, qa), self.block(&b.low, qb))
                } else {
                    continue;
                };
                for (zi, ti) in z.iter_mut().zip(&term) {
                    *zi += ti;
                }
            }
            self.block_mut(&mut out.low, q).copy_from_slice(&z);
        }
    }

    /// The algebra product A·B. Contributions whose target pair is
    /// incomparable vanish by construction.
    pub fn multiply(&self, a: &Element, b: &Element) -> Result<Element> {
        self.check(a)?;
        self.check(b)?;
        let mut out = self.zero();
        self.product_lower_into(a, b, &mut out);
        // Upper blocks through (AB)* = B*A*.
        let ai = self.involute(a);
        let bi = self.involute(b);
        let mut t = self.zero();
        self.product_lower_into(&bi, &ai, &mut t);
        for (q, &(hi, lo)) in self.pairs.iter().enumerate() {
            let fu = self.f_apply(hi, lo, self.block(&t.low, q));
            self.block_mut(&mut out.up, q).copy_from_slice(&fu);
        }
        Ok(out)
    }

    pub fn trace(&self, a: &Element) -> f64 {
        a.trace()
    }

    /// tr(A·B), computed from the diagonal of the product only.
    pub fn pairing(&self, a: &Element, b: &Element) -> Result<f64> {
        self.check(a)?;
        self.check(b)?;
        let n = self.size();
        let mut v = 0.0;
        for r in 0..n {
            v += a.diag[r] * b.diag[r];
            for mu in 0..n {
                if mu == r {
                    continue;
                }
                if self.poset.lt(mu, r) {
                    let q = self.pair_index(r, mu);
                    v += self.form_low_up(r, mu, self.block(&a.low, q), self.block(&b.up, q));
                } else if self.poset.lt(r, mu) {
                    let q = self.pair_index(mu, r);
                    v += self.form_up_low(mu, r, self.block(&a.up, q), self.block(&b.low, q));
                }
            }
        }
        Ok(v)
    }

    /// Hermitian element from diagonal and lower blocks (upper = f(lower)).
    pub fn hermitian_from_parts(&self, diag: Vec<f64>, low: Vec<f64>) -> Element {
        let mut e = Element { alg_id: self.id, diag, low, up: vec![0.0; self.off_len] };
        for (q, &(hi, lo)) in self.pairs.iter().enumerate() {
            let fl = self.f_apply(hi, lo, self.block(&e.low, q));
            self.block_mut(&mut e.up, q).copy_from_slice(&fl);
        }
        e
    }

    /// Max |up − f(low)| over all pairs; 0 for Hermitian elements.
    pub fn hermitian_defect(&self, a: &Element) -> f64 {
        let mut worst = 0.0f64;
        for (q, &(hi, lo)) in self.pairs.iter().enumerate() {
            let fl = self.f_apply(hi, lo, self.block(&a.low, q));
            for (u, v) in self.block(&a.up, q).iter().zip(&fl) {
                worst = worst.max((u - v).abs());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, a: &Element, tol: f64) -> bool {
        self.hermitian_defect(a) <= tol * (1.0 + self.max_abs(a))
    }

    // ------------------------------------------------------------------
    // Canonical chart of the Hermitian space H: diagonal units in
    // linear-extension order, then the lower pair coordinates.
    // ------------------------------------------------------------------

    /// Coordinates of a Hermitian element in the canonical chart.
    pub fn chart_coords(&self, a: &Element) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.dim_h());
        for &i in self.poset.linear_extension() {
            v.push(a.diag[i]);
        }
        v.extend_from_slice(&a.low);
        v
    }

    /// Hermitian element from canonical-chart coordinates.
    pub fn from_chart_coords(&self, v: &[f64]) -> Element {
        let n = self.size();
        let mut diag = vec![0.0; n];
        for (k, &i) in self.poset.linear_extension().iter().enumerate() {
            diag[i] = v[k];
        }
        self.hermitian_from_parts(diag, v[n..].to_vec())
    }

    /// Duality weight of each chart coordinate: tr(AB) = Σ g_α a_α b_α for
    /// Hermitian A, B (1 on the diagonal, 2 on pair coordinates).
    pub fn chart_weights(&self) -> Vec<f64> {
        let mut g = vec![1.0; self.size()];
        g.extend(std::iter::repeat(2.0).take(self.off_len));
        g
    }

    /// Basis Hermitian element for a chart coordinate.
    pub fn chart_basis(&self, alpha: usize) -> Element {
        let mut v = vec![0.0; self.dim_h()];
        v[alpha] = 1.0;
        self.from_chart_coords(&v)
    }

    // ------------------------------------------------------------------
    // Element serialization: "i" -> [diag], "i|j" -> lower block at (i, j).
    // ------------------------------------------------------------------

    pub fn to_assoc(&self, a: &Element) -> BTreeMap<String, Vec<f64>> {
        let mut m = BTreeMap::new();
        for i in 0..self.size() {
            m.insert(self.poset.label(i).to_string(), vec![a.diag[i]]);
        }
        for (q, &(hi, lo)) in self.pairs.iter().enumerate() {
            m.insert(
                format!("{}|{}", self.poset.label(hi), self.poset.label(lo)),
                self.block(&a.low, q).to_vec(),
            );
        }
        m
    }

    /// Hermitian element from the association form; absent diagonal entries
    /// default to `default_diag`, absent blocks to zero.
    pub fn hermitian_from_assoc(
        &self,
        m: &BTreeMap<String, Vec<f64>>,
        default_diag: f64,
    ) -> Result<Element> {
        let mut diag = vec![default_diag; self.size()];
        let mut low = vec![0.0; self.off_len];
        for (k, v) in m {
            if let Some((a, b)) = k.split_once('|') {
                let hi = self
                    .poset
                    .index_of(a)
                    .ok_or_else(|| Error::SpecError(format!("unknown label `{a}`")))?;
                let lo = self
                    .poset
                    .index_of(b)
                    .ok_or_else(|| Error::SpecError(format!("unknown label `{b}`")))?;
                let q = *self
                    .pair_pos
                    .get(&(hi, lo))
                    .ok_or_else(|| Error::SpecError(format!("`{k}` is not a lower pair")))?;
                if v.len() != self.pair_dim[q] {
                    return Err(Error::DimensionMismatch(format!(
                        "block `{k}` needs {} coordinates",
                        self.pair_dim[q]
                    )));
                }
                low[self.offset[q]..self.offset[q] + v.len()].copy_from_slice(v);
            } else {
                let i = self
                    .poset
                    .index_of(k)
                    .ok_or_else(|| Error::SpecError(format!("unknown label `{k}`")))?;
                if v.len() != 1 {
                    return Err(Error::DimensionMismatch(format!(
                        "diagonal entry `{k}` needs exactly one value"
                    )));
                }
                diag[i] = v[0];
            }
        }
        Ok(self.hermitian_from_parts(diag, low))
    }

    // ------------------------------------------------------------------
    // Random elements for checks and samplers.
    // ------------------------------------------------------------------

    pub fn random_element<R: Rng>(&self, rng: &mut R) -> Element {
        let mut e = self.zero();
        for x in e.diag.iter_mut().chain(&mut e.low).chain(&mut e.up) {
            *x = StandardNormal.sample(rng);
        }
        e
    }

    pub fn random_hermitian<R: Rng>(&self, rng: &mut R) -> Element {
        let n = self.size();
        let diag = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        let low = (0..self.off_len).map(|_| StandardNormal.sample(rng)).collect();
        self.hermitian_from_parts(diag, low)
    }
}
