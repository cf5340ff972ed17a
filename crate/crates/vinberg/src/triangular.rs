//! The triangular group and its action on the cone: products, inverses,
//! the generalized Cholesky factorizations (primal TT* and dual T*T),
//! order-set projections, the decomposition of a cone element, and the
//! boundary-orbit machinery.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::algebra::{Algebra, Element};
use crate::error::{Error, Result};
use crate::poset::{bits, StructureSets};

/// Element of T_l: diagonal reals plus one block per lower pair (hi, lo).
#[derive(Debug, Clone, PartialEq)]
pub struct LowerTriangular {
    pub(crate) alg_id: u64,
    pub diag: Vec<f64>,
    pub low: Vec<f64>,
}

impl LowerTriangular {
    /// Member of T_l^+?
    pub fn is_positive(&self) -> bool {
        self.diag.iter().all(|&d| d > 0.0)
    }
}

/// A {0,1} signature on the index set, selecting which diagonal pivots
/// survive. Parametrizes the boundary orbits T_l^+ · e_ψ.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OrbitSignature {
    on: Vec<bool>,
}

impl OrbitSignature {
    pub fn from_bools(on: Vec<bool>) -> OrbitSignature {
        OrbitSignature { on }
    }

    pub fn from_mask(n: usize, mask: u64) -> OrbitSignature {
        OrbitSignature { on: (0..n).map(|i| mask >> i & 1 == 1).collect() }
    }

    pub fn all_on(n: usize) -> OrbitSignature {
        OrbitSignature { on: vec![true; n] }
    }

    pub fn all_off(n: usize) -> OrbitSignature {
        OrbitSignature { on: vec![false; n] }
    }

    /// The distinguished signature 1_i of an anchor: all of I_{i⪯} except,
    /// for a minimal anchor, the separators.
    pub fn one_anchor(alg: &Algebra, st: &StructureSets, i: usize) -> OrbitSignature {
        let p = alg.poset();
        let mask = if st.is_root(i) { p.up_set(i) & !st.separators } else { p.up_set(i) };
        OrbitSignature::from_mask(p.len(), mask)
    }

    pub fn len(&self) -> usize {
        self.on.len()
    }

    pub fn is_empty(&self) -> bool {
        self.on.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.on[i]
    }

    pub fn mask(&self) -> u64 {
        self.on
            .iter()
            .enumerate()
            .fold(0u64, |m, (i, &b)| if b { m | 1 << i } else { m })
    }

    /// |ψ| — number of live slots.
    pub fn weight(&self) -> usize {
        self.on.iter().filter(|&&b| b).count()
    }

    pub fn is_zero(&self) -> bool {
        self.weight() == 0
    }

    /// Valid member of ε^i: vanishes off I_{i⪯}, and off the separators
    /// when the anchor is minimal.
    pub fn valid_for_anchor(&self, alg: &Algebra, st: &StructureSets, i: usize) -> bool {
        let p = alg.poset();
        let allowed = if st.is_root(i) { p.up_set(i) & !st.separators } else { p.up_set(i) };
        self.mask() & !allowed == 0
    }

    /// e_ψ = diag(ψ).
    pub fn diagonal(&self, alg: &Algebra) -> Element {
        alg.diag_mask(self.mask())
    }
}

impl Algebra {
    pub fn tri_zero(&self) -> LowerTriangular {
        let e = self.zero();
        LowerTriangular { alg_id: e.alg_id, diag: e.diag, low: e.low }
    }

    pub fn tri_unit(&self) -> LowerTriangular {
        let mut t = self.tri_zero();
        t.diag.fill(1.0);
        t
    }

    pub fn tri_to_element(&self, t: &LowerTriangular) -> Element {
        let mut e = self.zero();
        e.diag.copy_from_slice(&t.diag);
        e.low.copy_from_slice(&t.low);
        e
    }

    pub(crate) fn tri_check(&self, t: &LowerTriangular) -> Result<()> {
        if t.alg_id == self.id() {
            Ok(())
        } else {
            Err(Error::AlgebraMismatch)
        }
    }

    /// Product of two lower triangulars, staying in T_l.
    pub fn tri_product(&self, s: &LowerTriangular, t: &LowerTriangular) -> Result<LowerTriangular> {
        self.tri_check(s)?;
        self.tri_check(t)?;
        let mut out = self.tri_zero();
        for r in 0..self.size() {
            out.diag[r] = s.diag[r] * t.diag[r];
        }
        let p = self.poset();
        for (q, &(r, c)) in self.pairs().iter().enumerate() {
            let mut z: Vec<f64> =
                self.block(&s.low, q).iter().map(|x| x * t.diag[c]).collect();
            for (zi, ti) in z.iter_mut().zip(self.block(&t.low, q)) {
                *zi += s.diag[r] * ti;
            }
            for mu in 0..self.size() {
                if p.lt(c, mu) && p.lt(mu, r) {
                    let qa = self.pair_index(r, mu);
                    let qb = self.pair_index(mu, c);
                    let term =
                        self.chain_apply(r, mu, c, self.block(&s.low, qa), self.block(&t.low, qb));
                    for (zi, ti) in z.iter_mut().zip(&term) {
                        *zi += ti;
                    }
                }
            }
            out.low[self.block_range(q)].copy_from_slice(&z);
        }
        Ok(out)
    }

    /// Inverse in T_l^+ by forward substitution in linear-extension order.
    pub fn tri_invert(&self, t: &LowerTriangular) -> Result<LowerTriangular> {
        self.tri_check(t)?;
        for (i, &d) in t.diag.iter().enumerate() {
            if d <= 0.0 {
                return Err(Error::SingularDiagonal(self.poset().label(i).to_string()));
            }
        }
        let p = self.poset();
        let order = p.linear_extension().to_vec();
        let mut s = self.tri_zero();
        for i in 0..self.size() {
            s.diag[i] = 1.0 / t.diag[i];
        }
        // Column j, rows r ≻ j in ascending linear order so that
        // interval entries s_{μ j} are already available.
        for &j in &order {
            for &r in &order {
                if !p.lt(j, r) {
                    continue;
                }
                let q = self.pair_index(r, j);
                let mut acc: Vec<f64> =
                    self.block(&t.low, q).iter().map(|x| x * s.diag[j]).collect();
                for mu in 0..self.size() {
                    if p.lt(j, mu) && p.lt(mu, r) {
                        let qa = self.pair_index(r, mu);
                        let qb = self.pair_index(mu, j);
                        let term = self.chain_apply(
                            r,
                            mu,
                            j,
                            self.block(&t.low, qa),
                            self.block(&s.low, qb),
                        );
                        for (a, b) in acc.iter_mut().zip(&term) {
                            *a += b;
                        }
                    }
                }
                let inv = -1.0 / t.diag[r];
                let dst = self.block_range(q);
                for (k, a) in acc.iter().enumerate() {
                    s.low[dst.start + k] = inv * a;
                }
            }
        }
        Ok(s)
    }

    /// TT* for a triangular factor.
    pub fn tt_star(&self, t: &LowerTriangular) -> Element {
        let e = self.tri_to_element(t);
        self.multiply(&e, &self.involute(&e)).expect("same algebra")
    }

    /// T*T for a triangular factor.
    pub fn star_t_t(&self, t: &LowerTriangular) -> Element {
        let e = self.tri_to_element(t);
        self.multiply(&self.involute(&e), &e).expect("same algebra")
    }

    /// Factors a Hermitian X ∈ P as TT* with T ∈ T_l^+. Pivots ≤ 0 are
    /// rejected exactly: membership of the open cone is strict.
    pub fn cholesky(&self, x: &Element) -> Result<LowerTriangular> {
        self.check(x)?;
        let defect = self.hermitian_defect(x);
        if defect > 1e-9 * (1.0 + self.max_abs(x)) {
            return Err(Error::NotHermitian(defect));
        }
        let p = self.poset();
        let order = p.linear_extension().to_vec();
        let mut t = self.tri_unit();
        for &j in &order {
            let mut pivot = x.diag[j];
            for mu in 0..self.size() {
                if p.lt(mu, j) {
                    let q = self.pair_index(j, mu);
                    pivot -= self.block_norm2(j, mu, self.block(&t.low, q));
                }
            }
            if pivot <= 0.0 {
                return Err(Error::NotInCone { label: p.label(j).to_string(), pivot });
            }
            t.diag[j] = pivot.sqrt();
            for &r in &order {
                if !p.lt(j, r) {
                    continue;
                }
                let q = self.pair_index(r, j);
                let mut num = self.block(&x.low, q).to_vec();
                for mu in 0..self.size() {
                    if p.lt(mu, j) {
                        let qa = self.pair_index(r, mu);
                        let qb = self.pair_index(j, mu);
                        let term = self.lower_conj_product(
                            r,
                            j,
                            mu,
                            self.block(&t.low, qa),
                            self.block(&t.low, qb),
                        );
                        for (n, v) in num.iter_mut().zip(&term) {
                            *n -= v;
                        }
                    }
                }
                let inv = 1.0 / t.diag[j];
                let dst = self.block_range(q);
                for (k, n) in num.iter().enumerate() {
                    t.low[dst.start + k] = inv * n;
                }
            }
        }
        Ok(t)
    }

    /// Factors a Hermitian θ ∈ P* as T*T with T ∈ T_l^+ (the factorization
    /// of the opposite poset, run directly in reverse linear order).
    pub fn cholesky_dual(&self, theta: &Element) -> Result<LowerTriangular> {
        self.check(theta)?;
        let defect = self.hermitian_defect(theta);
        if defect > 1e-9 * (1.0 + self.max_abs(theta)) {
            return Err(Error::NotHermitian(defect));
        }
        let p = self.poset();
        let mut order = p.linear_extension().to_vec();
        order.reverse();
        let mut t = self.tri_unit();
        for &k in &order {
            let mut pivot = theta.diag[k];
            for mu in 0..self.size() {
                if p.lt(k, mu) {
                    let q = self.pair_index(mu, k);
                    pivot -= self.block_norm2(mu, k, self.block(&t.low, q));
                }
            }
            if pivot <= 0.0 {
                return Err(Error::NotInDualCone { label: p.label(k).to_string(), pivot });
            }
            t.diag[k] = pivot.sqrt();
            for &j in &order {
                if !p.lt(j, k) {
                    continue;
                }
                let q = self.pair_index(k, j);
                let mut num = self.block(&theta.low, q).to_vec();
                for mu in 0..self.size() {
                    if p.lt(k, mu) {
                        let qa = self.pair_index(mu, k);
                        let qb = self.pair_index(mu, j);
                        let term = self.conj_lower_product(
                            mu,
                            k,
                            j,
                            self.block(&t.low, qa),
                            self.block(&t.low, qb),
                        );
                        for (n, v) in num.iter_mut().zip(&term) {
                            *n -= v;
                        }
                    }
                }
                let inv = 1.0 / t.diag[k];
                let dst = self.block_range(q);
                for (m, n) in num.iter().enumerate() {
                    t.low[dst.start + m] = inv * n;
                }
            }
        }
        Ok(t)
    }

    /// θ^{-1} ∈ P for θ ∈ P*: factor θ = T*T and return T^{-1}(T^{-1})*.
    pub fn inverse_dual(&self, theta: &Element) -> Result<Element> {
        let t = self.cholesky_dual(theta)?;
        let s = self.tri_invert(&t)?;
        Ok(self.tt_star(&s))
    }

    /// X^{-1} ∈ P* for X ∈ P: factor X = TT* and return (T^{-1})*(T^{-1}).
    pub fn inverse_primal(&self, x: &Element) -> Result<Element> {
        let t = self.cholesky(x)?;
        let s = self.tri_invert(&t)?;
        Ok(self.star_t_t(&s))
    }

    /// π(T)(X) = (TV)(TV)* where X = VV*. Computed by refactoring X, so the
    /// result is a genuine cone member for any T ∈ T_l^+.
    pub fn group_act(&self, t: &LowerTriangular, x: &Element) -> Result<Element> {
        self.tri_check(t)?;
        let v = self.cholesky(x)?;
        let tv = self.tri_product(t, &v)?;
        Ok(self.tt_star(&tv))
    }

    /// Zeroes factor entries outside I_{i⪯} × I_{i⪯} (or the strict set).
    fn tri_restrict(&self, t: &LowerTriangular, keep: u64) -> LowerTriangular {
        let mut out = self.tri_zero();
        for i in bits(keep).take_while(|&i| i < self.size()) {
            out.diag[i] = t.diag[i];
        }
        for (q, &(r, c)) in self.pairs().iter().enumerate() {
            if keep >> r & 1 == 1 && keep >> c & 1 == 1 {
                let rng = self.block_range(q);
                out.low[rng.clone()].copy_from_slice(&t.low[rng]);
            }
        }
        out
    }

    /// (X_{i⪯}, X_{i≺}) built from the restricted factor of X ∈ P.
    pub fn project_upsets(&self, x: &Element, i: usize) -> Result<(Element, Element)> {
        let t = self.cholesky(x)?;
        Ok(self.project_upsets_factor(&t, i))
    }

    /// Same, from an already computed factor.
    pub fn project_upsets_factor(&self, t: &LowerTriangular, i: usize) -> (Element, Element) {
        let p = self.poset();
        let up = self.tt_star(&self.tri_restrict(t, p.up_set(i)));
        let strict = self.tt_star(&self.tri_restrict(t, p.strict_up_set(i)));
        (up, strict)
    }

    /// The decomposition X = Σ_i X_i: minimal elements carry X_{i⪯} minus
    /// the separator terms above them, separators carry X_{i⪯}, everything
    /// else zero.
    pub fn components(&self, x: &Element, st: &StructureSets) -> Result<Vec<Element>> {
        let t = self.cholesky(x)?;
        let p = self.poset();
        let up: Vec<Element> =
            (0..self.size()).map(|i| self.tt_star(&self.tri_restrict(&t, p.up_set(i)))).collect();
        let mut out = Vec::with_capacity(self.size());
        for i in 0..self.size() {
            if st.is_root(i) {
                let mut xi = up[i].clone();
                for s in bits(st.separators_above[i]).take_while(|&s| s < self.size()) {
                    xi = self.sub(&xi, &up[s]);
                }
                out.push(xi);
            } else if st.is_separator(i) {
                out.push(up[i].clone());
            } else {
                out.push(self.zero());
            }
        }
        Ok(out)
    }

    /// T e_ψ T*, a point of the closure of P.
    pub fn orbit_point(&self, t: &LowerTriangular, psi: &OrbitSignature) -> Element {
        let e = self.tri_to_element(t);
        let te = self.multiply(&e, &psi.diagonal(self)).expect("same algebra");
        self.multiply(&te, &self.involute(&e)).expect("same algebra")
    }

    /// Pivoted factorization of a closure element: dead pivots force
    /// ψ(j) = 0 and zero the column. Returns the signature and a factor
    /// with orbit_point(T, ψ) ≈ Z.
    pub fn classify_orbit(
        &self,
        z: &Element,
        tol: Option<f64>,
    ) -> Result<(OrbitSignature, LowerTriangular)> {
        self.check(z)?;
        let defect = self.hermitian_defect(z);
        if defect > 1e-9 * (1.0 + self.max_abs(z)) {
            return Err(Error::NotHermitian(defect));
        }
        let p = self.poset();
        let max_diag = z.diag.iter().fold(1.0f64, |m, &d| m.max(d.abs()));
        let tol = tol.unwrap_or(1e-10 * max_diag);
        let order = p.linear_extension().to_vec();
        let mut t = self.tri_unit();
        let mut on = vec![false; self.size()];
        for &j in &order {
            let mut pivot = z.diag[j];
            for mu in 0..self.size() {
                if p.lt(mu, j) && on[mu] {
                    let q = self.pair_index(j, mu);
                    pivot -= self.block_norm2(j, mu, self.block(&t.low, q));
                }
            }
            if pivot < -tol {
                return Err(Error::NotInClosure { label: p.label(j).to_string(), pivot });
            }
            if pivot <= tol {
                on[j] = false;
                continue;
            }
            on[j] = true;
            t.diag[j] = pivot.sqrt();
            for &r in &order {
                if !p.lt(j, r) {
                    continue;
                }
                let q = self.pair_index(r, j);
                let mut num = self.block(&z.low, q).to_vec();
                for mu in 0..self.size() {
                    if p.lt(mu, j) && on[mu] {
                        let qa = self.pair_index(r, mu);
                        let qb = self.pair_index(j, mu);
                        let term = self.lower_conj_product(
                            r,
                            j,
                            mu,
                            self.block(&t.low, qa),
                            self.block(&t.low, qb),
                        );
                        for (n, v) in num.iter_mut().zip(&term) {
                            *n -= v;
                        }
                    }
                }
                let inv = 1.0 / t.diag[j];
                let dst = self.block_range(q);
                for (k, n) in num.iter().enumerate() {
                    t.low[dst.start + k] = inv * n;
                }
            }
        }
        Ok((OrbitSignature::from_bools(on), t))
    }

    /// Random factor in T_l^+: positive diagonals bounded away from zero.
    pub fn random_triangular<R: Rng>(&self, rng: &mut R) -> LowerTriangular {
        let mut t = self.tri_zero();
        for d in t.diag.iter_mut() {
            let g: f64 = StandardNormal.sample(rng);
            *d = g.abs() + 0.1;
        }
        for x in t.low.iter_mut() {
            *x = StandardNormal.sample(rng);
        }
        t
    }

    /// Random interior cone point.
    pub fn random_cone_point<R: Rng>(&self, rng: &mut R) -> Element {
        let t = self.random_triangular(rng);
        self.tt_star(&t)
    }

    /// Random dual-cone point.
    pub fn random_dual_point<R: Rng>(&self, rng: &mut R) -> Element {
        let t = self.random_triangular(rng);
        self.star_t_t(&t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poset::{structure_sets, Poset};
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn p4_algebra() -> Algebra {
        let p = Poset::new(&["1", "2", "3", "4"], &[("1", "3"), ("1", "4"), ("2", "3")]).unwrap();
        Algebra::scalar(p)
    }

    fn chain_algebra(n: usize) -> Algebra {
        let labels: Vec<String> = (1..=n).map(|i| i.to_string()).collect();
        let rels: Vec<(String, String)> =
            (1..n).map(|i| (i.to_string(), (i + 1).to_string())).collect();
        Algebra::scalar(Poset::new(&labels, &rels).unwrap())
    }

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * 1.0f64.max(a.abs()).max(b.abs())
    }

    fn elements_close(alg: &Algebra, a: &Element, b: &Element, tol: f64) -> bool {
        let d = alg.sub(a, b);
        alg.max_abs(&d) <= tol * (1.0 + alg.max_abs(a).max(alg.max_abs(b)))
    }

    #[test]
    fn tri_product_unit_and_diagonal() {
        let alg = p4_algebra();
        let mut rng = ChaCha12Rng::seed_from_u64(10);
        let t = alg.random_triangular(&mut rng);
        let e = alg.tri_unit();
        assert_eq!(alg.tri_product(&t, &e).unwrap(), t);
        assert_eq!(alg.tri_product(&e, &t).unwrap(), t);
        let mut d1 = alg.tri_unit();
        let mut d2 = alg.tri_unit();
        for i in 0..4 {
            d1.diag[i] = (i + 2) as f64;
            d2.diag[i] = 1.0 / (i + 1) as f64;
        }
        let p = alg.tri_product(&d1, &d2).unwrap();
        for i in 0..4 {
            assert!(rel_close(p.diag[i], d1.diag[i] * d2.diag[i], 1e-15));
        }
    }

    #[test]
    fn tri_product_associative_on_random_triples() {
        let alg = chain_algebra(4);
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for _ in 0..50 {
            let s = alg.random_triangular(&mut rng);
            let t = alg.random_triangular(&mut rng);
            let u = alg.random_triangular(&mut rng);
            let l = alg.tri_product(&alg.tri_product(&s, &t).unwrap(), &u).unwrap();
            let r = alg.tri_product(&s, &alg.tri_product(&t, &u).unwrap()).unwrap();
            let le = alg.tri_to_element(&l);
            let re = alg.tri_to_element(&r);
            assert!(elements_close(&alg, &le, &re, 1e-10));
        }
    }

    #[test]
    fn tri_invert_round_trip_and_hand_case() {
        let alg = chain_algebra(2);
        // t = (t11, t21, t22) = (2, 1, 1) inverts to (0.5, -0.5, 1).
        let mut t = alg.tri_unit();
        t.diag = vec![2.0, 1.0];
        t.low = vec![1.0];
        let s = alg.tri_invert(&t).unwrap();
        assert_eq!(s.diag, vec![0.5, 1.0]);
        assert_eq!(s.low, vec![-0.5]);

        let alg = p4_algebra();
        let mut rng = ChaCha12Rng::seed_from_u64(12);
        for _ in 0..50 {
            let t = alg.random_triangular(&mut rng);
            let s = alg.tri_invert(&t).unwrap();
            let prod = alg.tri_product(&t, &s).unwrap();
            assert!(elements_close(&alg, &alg.tri_to_element(&prod), &alg.unit(), 1e-10));
            let prod = alg.tri_product(&s, &t).unwrap();
            assert!(elements_close(&alg, &alg.tri_to_element(&prod), &alg.unit(), 1e-10));
            let tt = alg.tri_invert(&s).unwrap();
            assert!(elements_close(
                &alg,
                &alg.tri_to_element(&tt),
                &alg.tri_to_element(&t),
                1e-10
            ));
        }
        assert_eq!(alg.tri_invert(&alg.tri_unit()).unwrap(), alg.tri_unit());
    }

    #[test]
    fn cholesky_identity_and_hand_case() {
        let alg = chain_algebra(2);
        assert_eq!(alg.cholesky(&alg.unit()).unwrap(), alg.tri_unit());
        // X = (x11, x21, x22) = (4, 2, 2) factors with t = (2, 1, 1).
        let x = alg.hermitian_from_parts(vec![4.0, 2.0], vec![2.0]);
        let t = alg.cholesky(&x).unwrap();
        assert_eq!(t.diag, vec![2.0, 1.0]);
        assert_eq!(t.low, vec![1.0]);
        // det cross-check: x11 x22 - x21^2 = 4 = prod t_ii^2.
        assert!(rel_close(t.diag.iter().map(|d| d * d).product::<f64>(), 4.0, 1e-15));
    }

    #[test]
    fn cholesky_round_trip_uniqueness() {
        for alg in [p4_algebra(), chain_algebra(4)] {
            let mut rng = ChaCha12Rng::seed_from_u64(13);
            for _ in 0..60 {
                let t = alg.random_triangular(&mut rng);
                let x = alg.tt_star(&t);
                let u = alg.cholesky(&x).unwrap();
                assert!(elements_close(
                    &alg,
                    &alg.tri_to_element(&u),
                    &alg.tri_to_element(&t),
                    1e-9
                ));
            }
        }
    }

    #[test]
    fn cholesky_rejects_outside_cone() {
        let alg = chain_algebra(2);
        let x = alg.hermitian_from_parts(vec![1.0, 1.0], vec![2.0]);
        assert!(matches!(alg.cholesky(&x), Err(Error::NotInCone { .. })));
        let mut bad = alg.unit();
        bad.up[0] = 0.5; // break hermitian symmetry
        assert!(matches!(alg.cholesky(&bad), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn p4_factor_has_no_incomparable_entry() {
        // The (4,3) slot does not exist in the algebra, so the factor of a
        // cone point never produces one.
        let alg = p4_algebra();
        let mut rng = ChaCha12Rng::seed_from_u64(14);
        let x = alg.random_cone_point(&mut rng);
        let t = alg.cholesky(&x).unwrap();
        let m = alg.to_assoc(&alg.tri_to_element(&t));
        assert!(!m.contains_key("4|3"));
    }

    #[test]
    fn dual_factorization_round_trip() {
        for alg in [p4_algebra(), chain_algebra(3)] {
            let mut rng = ChaCha12Rng::seed_from_u64(15);
            for _ in 0..40 {
                let t0 = alg.random_triangular(&mut rng);
                let theta = alg.star_t_t(&t0);
                let t = alg.cholesky_dual(&theta).unwrap();
                assert!(elements_close(&alg, &alg.star_t_t(&t), &theta, 1e-9));
                // θ^{-1} is a cone point and round-trips: (θ^{-1})^{-1} = θ.
                let y = alg.inverse_dual(&theta).unwrap();
                let back = alg.inverse_primal(&y).unwrap();
                assert!(elements_close(&alg, &back, &theta, 1e-9));
            }
        }
        let alg = chain_algebra(1);
        let theta = alg.hermitian_from_parts(vec![2.0], vec![]);
        let y = alg.inverse_dual(&theta).unwrap();
        assert!(rel_close(y.diag[0], 0.5, 1e-15));
    }

    #[test]
    fn group_act_is_an_action() {
        let alg = p4_algebra();
        let mut rng = ChaCha12Rng::seed_from_u64(16);
        for _ in 0..40 {
            let x = alg.random_cone_point(&mut rng);
            assert!(elements_close(&alg, &alg.group_act(&alg.tri_unit(), &x).unwrap(), &x, 1e-12));
            let t1 = alg.random_triangular(&mut rng);
            let t2 = alg.random_triangular(&mut rng);
            let a = alg.group_act(&t1, &alg.group_act(&t2, &x).unwrap()).unwrap();
            let b = alg.group_act(&alg.tri_product(&t1, &t2).unwrap(), &x).unwrap();
            assert!(elements_close(&alg, &a, &b, 1e-9));
        }
    }

    #[test]
    fn projections_nest_and_telescope() {
        for alg in [p4_algebra(), chain_algebra(4)] {
            let mut rng = ChaCha12Rng::seed_from_u64(17);
            let p = alg.poset().clone();
            for _ in 0..30 {
                let x = alg.random_cone_point(&mut rng);
                // telescoping sum
                let mut sum = alg.zero();
                for i in 0..alg.size() {
                    let (up, strict) = alg.project_upsets(&x, i).unwrap();
                    sum = alg.add(&sum, &alg.sub(&up, &strict));
                }
                assert!(elements_close(&alg, &sum, &x, 1e-10));
                // nesting (X_{i⪯})_{j⪯} = X_{j⪯} for i ⪯ j
                for i in 0..alg.size() {
                    for j in 0..alg.size() {
                        if p.leq(i, j) {
                            let (xi, _) = alg.project_upsets(&x, i).unwrap();
                            let ti = alg.classify_orbit(&xi, None).unwrap().1;
                            let xij = alg.tt_star(&alg.tri_restrict(&ti, p.up_set(j)));
                            let (xj, _) = alg.project_upsets(&x, j).unwrap();
                            assert!(elements_close(&alg, &xij, &xj, 1e-9));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn components_sum_to_x() {
        for alg in [p4_algebra(), chain_algebra(4)] {
            let st = structure_sets(alg.poset());
            let mut rng = ChaCha12Rng::seed_from_u64(18);
            for _ in 0..50 {
                let x = alg.random_cone_point(&mut rng);
                let parts = alg.components(&x, &st).unwrap();
                let sum = parts.iter().fold(alg.zero(), |acc, p| alg.add(&acc, p));
                assert!(elements_close(&alg, &sum, &x, 1e-10));
            }
        }
    }

    #[test]
    fn p4_component_structure() {
        // X_1 = X_{1⪯} - X_{3⪯}, X_2 = X_{2⪯} - X_{3⪯}, X_3 = X_{3⪯}, X_4 = 0.
        let alg = p4_algebra();
        let st = structure_sets(alg.poset());
        let mut rng = ChaCha12Rng::seed_from_u64(19);
        let x = alg.random_cone_point(&mut rng);
        let parts = alg.components(&x, &st).unwrap();
        let up = |i: usize| alg.project_upsets(&x, i).unwrap().0;
        assert!(elements_close(&alg, &parts[0], &alg.sub(&up(0), &up(2)), 1e-12));
        assert!(elements_close(&alg, &parts[1], &alg.sub(&up(1), &up(2)), 1e-12));
        assert!(elements_close(&alg, &parts[2], &up(2), 1e-12));
        assert!(elements_close(&alg, &parts[3], &alg.zero(), 1e-12));
    }

    #[test]
    fn orbit_point_basics() {
        let alg = p4_algebra();
        let mut rng = ChaCha12Rng::seed_from_u64(20);
        let t = alg.random_triangular(&mut rng);
        let all = OrbitSignature::all_on(4);
        assert!(elements_close(&alg, &alg.orbit_point(&t, &all), &alg.tt_star(&t), 1e-12));
        let none = OrbitSignature::all_off(4);
        assert!(elements_close(&alg, &alg.orbit_point(&t, &none), &alg.zero(), 1e-15));
        let psi = OrbitSignature::from_mask(4, 0b0101);
        assert!(elements_close(
            &alg,
            &alg.orbit_point(&alg.tri_unit(), &psi),
            &psi.diagonal(&alg),
            1e-15
        ));
    }

    #[test]
    fn classify_orbit_recovers_signatures() {
        let alg = p4_algebra();
        let mut rng = ChaCha12Rng::seed_from_u64(21);
        assert_eq!(alg.classify_orbit(&alg.unit(), None).unwrap().0, OrbitSignature::all_on(4));
        for mask in 0..16u64 {
            let psi = OrbitSignature::from_mask(4, mask);
            let e_psi = psi.diagonal(&alg);
            let (got, t) = alg.classify_orbit(&e_psi, None).unwrap();
            assert_eq!(got, psi);
            assert!(elements_close(&alg, &alg.orbit_point(&t, &got), &e_psi, 1e-12));
            for _ in 0..10 {
                let t = alg.random_triangular(&mut rng);
                let z = alg.orbit_point(&t, &psi);
                let (got, u) = alg.classify_orbit(&z, None).unwrap();
                assert_eq!(got, psi, "mask {mask}");
                assert!(elements_close(&alg, &alg.orbit_point(&u, &got), &z, 1e-9));
            }
        }
        // A negative-definite direction is rejected.
        let mut neg = alg.zero();
        neg.diag[0] = -1.0;
        assert!(matches!(alg.classify_orbit(&neg, None), Err(Error::NotInClosure { .. })));
    }

    #[test]
    fn one_anchor_signatures() {
        let alg = p4_algebra();
        let st = structure_sets(alg.poset());
        // roots exclude separators, separators keep their whole up-set
        assert_eq!(OrbitSignature::one_anchor(&alg, &st, 0).mask(), 0b1001);
        assert_eq!(OrbitSignature::one_anchor(&alg, &st, 1).mask(), 0b0010);
        assert_eq!(OrbitSignature::one_anchor(&alg, &st, 2).mask(), 0b0100);
        for &i in &[0usize, 1, 2] {
            assert!(OrbitSignature::one_anchor(&alg, &st, i).valid_for_anchor(&alg, &st, i));
        }
    }

    #[test]
    fn dual_primal_projection_consistency() {
        // (θ_{i⪯})^{-1} = (θ^{-1})_{i⪯} for random θ in the dual cone.
        for alg in [p4_algebra(), chain_algebra(3)] {
            let mut rng = ChaCha12Rng::seed_from_u64(22);
            let p = alg.poset().clone();
            for _ in 0..20 {
                let theta = alg.random_dual_point(&mut rng);
                let y = alg.inverse_dual(&theta).unwrap();
                let td = alg.cholesky_dual(&theta).unwrap();
                for i in 0..alg.size() {
                    // θ_{i⪯} from the restricted dual factor; its inverse
                    // within the sub-cone, embedded back.
                    let tres = alg.tri_restrict(&td, p.up_set(i));
                    // invert within the subalgebra: restricted entries form a
                    // positive factor there; pad diagonal to 1 off the set.
                    let mut tsub = tres.clone();
                    for j in 0..alg.size() {
                        if p.up_set(i) >> j & 1 == 0 {
                            tsub.diag[j] = 1.0;
                        }
                    }
                    let s = alg.tri_invert(&tsub).unwrap();
                    let srestr = alg.tri_restrict(&s, p.up_set(i));
                    let lhs = alg.tt_star(&srestr);
                    let t = alg.cholesky(&y).unwrap();
                    let rhs = alg.tt_star(&alg.tri_restrict(&t, p.up_set(i)));
                    assert!(elements_close(&alg, &lhs, &rhs, 1e-9));
                }
            }
        }
    }
}
