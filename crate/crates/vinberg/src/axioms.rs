//! Numerical verification of the multiplication axioms and the two
//! inner-product conditions, on random elements. Failures are report
//! entries, never errors: this is the gate for user-supplied structure
//! constants (and for posets the scalar preset cannot carry).

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::algebra::{Algebra, Element};

#[derive(Debug, Clone)]
pub struct AxiomResult {
    pub name: &'static str,
    /// Worst relative residual seen over all samples; 0 when no instance
    /// of the axiom's pattern exists on this poset.
    pub max_residual: f64,
    pub samples: usize,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct AxiomReport {
    pub entries: Vec<AxiomResult>,
    pub tol: f64,
}

impl AxiomReport {
    pub fn pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }
}

fn rel(diff: f64, scale: f64) -> f64 {
    diff / 1.0f64.max(scale)
}

fn elem_rel(alg: &Algebra, a: &Element, b: &Element) -> f64 {
    let d = alg.sub(a, b);
    rel(alg.max_abs(&d), alg.max_abs(a).max(alg.max_abs(b)))
}

/// Checks axioms i–vi and inner-product conditions 1–2 on `samples` random
/// elements, reporting the max relative residual per axiom.
pub fn axiom_check(alg: &Algebra, samples: usize, tol: f64, seed: u64) -> AxiomReport {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut entries = Vec::new();

    // i) tr(AA*) > 0 for A ≠ 0. Residual: how far tr(AA*)/|A|² dips
    // below zero (or fails to be positive).
    {
        let mut worst = 0.0f64;
        for _ in 0..samples {
            let a = alg.random_element(&mut rng);
            let n2: f64 = alg.max_abs(&a).powi(2);
            let v = alg.pairing(&a, &alg.involute(&a)).unwrap();
            if v <= 0.0 {
                worst = worst.max(rel(-v, n2) + 1.0);
            }
        }
        entries.push(AxiomResult { name: "i: tr(AA*) > 0", max_residual: worst, samples, pass: worst <= tol });
    }

    // ii) (AB)* = B*A*.
    {
        let mut worst = 0.0f64;
        for _ in 0..samples {
            let a = alg.random_element(&mut rng);
            let b = alg.random_element(&mut rng);
            let l = alg.involute(&alg.multiply(&a, &b).unwrap());
            let r = alg.multiply(&alg.involute(&b), &alg.involute(&a)).unwrap();
            worst = worst.max(elem_rel(alg, &l, &r));
        }
        entries.push(AxiomResult { name: "ii: (AB)* = B*A*", max_residual: worst, samples, pass: worst <= tol });
    }

    // iii) tr(AB) = tr(BA).
    {
        let mut worst = 0.0f64;
        for _ in 0..samples {
            let a = alg.random_element(&mut rng);
            let b = alg.random_element(&mut rng);
            let l = alg.pairing(&a, &b).unwrap();
            let r = alg.pairing(&b, &a).unwrap();
            worst = worst.max(rel((l - r).abs(), l.abs().max(r.abs())));
        }
        entries.push(AxiomResult { name: "iii: tr(AB) = tr(BA)", max_residual: worst, samples, pass: worst <= tol });
    }

    // iv) tr(A(BC)) = tr((AB)C).
    {
        let mut worst = 0.0f64;
        for _ in 0..samples {
            let a = alg.random_element(&mut rng);
            let b = alg.random_element(&mut rng);
            let c = alg.random_element(&mut rng);
            let l = alg.pairing(&a, &alg.multiply(&b, &c).unwrap()).unwrap();
            let r = alg.pairing(&alg.multiply(&a, &b).unwrap(), &c).unwrap();
            worst = worst.max(rel((l - r).abs(), l.abs().max(r.abs())));
        }
        entries.push(AxiomResult { name: "iv: tr(A(BC)) = tr((AB)C)", max_residual: worst, samples, pass: worst <= tol });
    }

    // v) (ST)U = S(TU) on lower triangulars.
    {
        let mut worst = 0.0f64;
        for _ in 0..samples {
            let s = alg.random_triangular(&mut rng);
            let t = alg.random_triangular(&mut rng);
            let u = alg.random_triangular(&mut rng);
            let l = alg.tri_product(&alg.tri_product(&s, &t).unwrap(), &u).unwrap();
            let r = alg.tri_product(&s, &alg.tri_product(&t, &u).unwrap()).unwrap();
            worst = worst.max(elem_rel(alg, &alg.tri_to_element(&l), &alg.tri_to_element(&r)));
        }
        entries.push(AxiomResult { name: "v: (ST)U = S(TU)", max_residual: worst, samples, pass: worst <= tol });
    }

    // vi) T(UU*) = (TU)U* on lower triangulars.
    {
        let mut worst = 0.0f64;
        for _ in 0..samples {
            let t = alg.random_triangular(&mut rng);
            let u = alg.random_triangular(&mut rng);
            let te = alg.tri_to_element(&t);
            let uu = alg.tt_star(&u);
            let l = alg.multiply(&te, &uu).unwrap();
            let tu = alg.tri_product(&t, &u).unwrap();
            let r = alg
                .multiply(&alg.tri_to_element(&tu), &alg.involute(&alg.tri_to_element(&u)))
                .unwrap();
            worst = worst.max(elem_rel(alg, &l, &r));
        }
        entries.push(AxiomResult { name: "vi: T(UU*) = (TU)U*", max_residual: worst, samples, pass: worst <= tol });
    }

    // Condition 1: |a_ij b_jk|² = |a_ij|² |b_jk|² on chain triples.
    {
        let p = alg.poset();
        let mut triples = Vec::new();
        for lo in 0..alg.size() {
            for mid in 0..alg.size() {
                for hi in 0..alg.size() {
                    if p.lt(lo, mid) && p.lt(mid, hi) {
                        triples.push((hi, mid, lo));
                    }
                }
            }
        }
        let mut worst = 0.0f64;
        let mut count = 0;
        if !triples.is_empty() {
            for _ in 0..samples {
                let &(hi, mid, lo) = &triples[rng.gen_range(0..triples.len())];
                let a: Vec<f64> =
                    (0..alg.dims().pair(hi, mid)).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let b: Vec<f64> =
                    (0..alg.dims().pair(mid, lo)).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let ab = alg.chain_apply(hi, mid, lo, &a, &b);
                let l = alg.block_norm2(hi, lo, &ab);
                let r = alg.block_norm2(hi, mid, &a) * alg.block_norm2(mid, lo, &b);
                worst = worst.max(rel((l - r).abs(), l.abs().max(r.abs())));
                count += 1;
            }
        }
        entries.push(AxiomResult {
            name: "cond 1: |ab|² = |a|²|b|²",
            max_residual: worst,
            samples: count,
            pass: worst <= tol,
        });
    }

    // Condition 2: orthogonality propagates upward along 4-chains.
    {
        let p = alg.poset();
        let mut quads = Vec::new();
        for lo in 0..alg.size() {
            for mid in 0..alg.size() {
                for hi in 0..alg.size() {
                    for top in 0..alg.size() {
                        if p.lt(lo, mid) && p.lt(mid, hi) && p.lt(hi, top) {
                            quads.push((top, hi, mid, lo));
                        }
                    }
                }
            }
        }
        let mut worst = 0.0f64;
        let mut count = 0;
        if !quads.is_empty() {
            for _ in 0..samples {
                let &(top, hi, mid, lo) = &quads[rng.gen_range(0..quads.len())];
                let n_ik = alg.dims().pair(hi, lo);
                let b: Vec<f64> =
                    (0..alg.dims().pair(mid, lo)).map(|_| rng.gen_range(-1.0..1.0)).collect();
                // Project a random a_ik onto the orthocomplement of
                // {c_ij b_jk : c_ij} so the premise holds, then test the
                // conclusion on random d, c'.
                let mut basis: Vec<Vec<f64>> = Vec::new();
                for e in 0..alg.dims().pair(hi, mid) {
                    let mut c = vec![0.0; alg.dims().pair(hi, mid)];
                    c[e] = 1.0;
                    basis.push(alg.chain_apply(hi, mid, lo, &c, &b));
                }
                let mut a: Vec<f64> = (0..n_ik).map(|_| rng.gen_range(-1.0..1.0)).collect();
                for v in &basis {
                    let n2 = alg.block_norm2(hi, lo, v);
                    if n2.abs() > 1e-12 {
                        let av: f64 = a.iter().zip(v).map(|(x, y)| x * y).sum();
                        let coef = av / n2;
                        for (x, y) in a.iter_mut().zip(v) {
                            *x -= coef * y;
                        }
                    }
                }
                if alg.block_norm2(hi, lo, &a).abs() < 1e-12 {
                    continue;
                }
                let d: Vec<f64> =
                    (0..alg.dims().pair(top, hi)).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let c2: Vec<f64> =
                    (0..alg.dims().pair(top, mid)).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let da = alg.chain_apply(top, hi, lo, &d, &a);
                let cb = alg.chain_apply(top, mid, lo, &c2, &b);
                let mut dot = 0.0;
                for (x, y) in da.iter().zip(&cb) {
                    dot += x * y;
                }
                let scale = alg.block_norm2(top, lo, &da).sqrt() * alg.block_norm2(top, lo, &cb).sqrt();
                worst = worst.max(rel(dot.abs(), scale));
                count += 1;
            }
        }
        entries.push(AxiomResult {
            name: "cond 2: orthogonality propagates",
            max_residual: worst,
            samples: count,
            pass: worst <= tol,
        });
    }

    AxiomReport { entries, tol }
}
