//! The natural exponential family generated by a Riesz measure: cumulant
//! function, mean map and its inverse, quadratic representation, cumulant
//! Hessian and variance function, plus the finite-difference and Monte
//! Carlo oracles that pin all conventions.
//!
//! The cumulant is k(θ) = log Δ_χ(θ^{-1}) and the mean is m = −∇k, which
//! works out to m = (S·Λ)·S* where θ^{-1} = SS* and Λ = diag(λ). The
//! Hessian is the exact derivative of the mean map, propagated through the
//! dual factorization; closed projection formulas for it hold on chains
//! but not on every poset, so the derivative is computed, not guessed.

use crate::algebra::{Algebra, Element};
use crate::error::{Error, Result};
use crate::gindikin::classify_measure;
use crate::poset::{structure_sets, StructureSets};
use crate::power::Multiplier;
use crate::report::{Report, ReportRow};
use crate::riesz::sample_riesz;
use crate::triangular::LowerTriangular;

/// Dense symmetric bilinear form on the Hermitian space, stored in the
/// canonical chart: entry (α, β) is ⟨Op h_α, h_β⟩ under the trace pairing.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricOperator {
    pub dim: usize,
    pub mat: Vec<f64>,
}

impl SymmetricOperator {
    pub fn zeros(dim: usize) -> SymmetricOperator {
        SymmetricOperator { dim, mat: vec![0.0; dim * dim] }
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.mat[a * self.dim + b]
    }

    pub fn set(&mut self, a: usize, b: usize, v: f64) {
        self.mat[a * self.dim + b] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.mat.iter().fold(0.0f64, |m, &x| m.max(x.abs()))
    }

    pub fn max_abs_diff(&self, other: &SymmetricOperator) -> f64 {
        self.mat
            .iter()
            .zip(&other.mat)
            .fold(0.0f64, |m, (&x, &y)| m.max((x - y).abs()))
    }

    pub fn scale(&self, s: f64) -> SymmetricOperator {
        SymmetricOperator { dim: self.dim, mat: self.mat.iter().map(|x| x * s).collect() }
    }

    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for a in 0..self.dim {
            for b in 0..a {
                worst = worst.max((self.get(a, b) - self.get(b, a)).abs());
            }
        }
        worst
    }

    pub fn symmetrized(&self) -> SymmetricOperator {
        let mut out = self.clone();
        for a in 0..self.dim {
            for b in 0..self.dim {
                out.set(a, b, 0.5 * (self.get(a, b) + self.get(b, a)));
            }
        }
        out
    }

    /// Smallest eigenvalue via cyclic Jacobi sweeps (dims are tiny).
    pub fn min_eigenvalue(&self) -> f64 {
        let n = self.dim;
        let mut a = self.mat.clone();
        for _ in 0..60 {
            let mut off = 0.0f64;
            for p in 0..n {
                for q in (p + 1)..n {
                    off = off.max(a[p * n + q].abs());
                }
            }
            if off < 1e-13 * (1.0 + self.max_abs()) {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[p * n + q];
                    if apq.abs() < 1e-300 {
                        continue;
                    }
                    let app = a[p * n + p];
                    let aqq = a[q * n + q];
                    let phi = 0.5 * (2.0 * apq).atan2(aqq - app);
                    let (s, c) = phi.sin_cos();
                    for k in 0..n {
                        let akp = a[k * n + p];
                        let akq = a[k * n + q];
                        a[k * n + p] = c * akp - s * akq;
                        a[k * n + q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[p * n + k];
                        let aqk = a[q * n + k];
                        a[p * n + k] = c * apk - s * aqk;
                        a[q * n + k] = s * apk + c * aqk;
                    }
                }
            }
        }
        (0..n).map(|i| a[i * n + i]).fold(f64::INFINITY, f64::min)
    }
}

/// The quadratic representation P(X)K = X(KX).
pub fn quadratic_rep(alg: &Algebra, x: &Element, k: &Element) -> Result<Element> {
    let kx = alg.multiply(k, x)?;
    alg.multiply(x, &kx)
}

/// The bilinear form of P(X) on the canonical chart, entry (α, β) being
/// tr((X(h_β X)) h_α). The product X(KX) need not be entry-wise Hermitian
/// off totally ordered index sets, so the pairing is taken honestly.
pub fn quadratic_rep_operator(alg: &Algebra, x: &Element) -> Result<SymmetricOperator> {
    let d = alg.dim_h();
    let mut op = SymmetricOperator::zeros(d);
    for b in 0..d {
        let hb = alg.chart_basis(b);
        let img = quadratic_rep(alg, x, &hb)?;
        for a in 0..d {
            op.set(a, b, alg.pairing(&img, &alg.chart_basis(a))?);
        }
    }
    Ok(op)
}

/// Derivative of the inversion map P → P* at X along K: −P(X^{-1})K.
/// This is the matrix-cone identity; it holds exactly on totally ordered
/// index sets and is oracle-checked there.
pub fn inverse_derivative(alg: &Algebra, x: &Element, k: &Element) -> Result<Element> {
    let inv = alg.inverse_primal(x)?;
    Ok(alg.scale(&quadratic_rep(alg, &inv, k)?, -1.0))
}

/// A Riesz natural exponential family: a multiplier that lies in the
/// Gindikin set and is nonzero at every anchor.
pub struct Family<'a> {
    alg: &'a Algebra,
    st: StructureSets,
    chi: Multiplier,
}

impl<'a> Family<'a> {
    pub fn new(alg: &'a Algebra, chi: Multiplier) -> Result<Family<'a>> {
        let st = structure_sets(alg.poset());
        let cls = classify_measure(alg, &st, &chi);
        if cls.witness.is_none() {
            return Err(Error::NotInXi);
        }
        if !cls.generates_nef {
            let p = alg.poset();
            let bad = (0..p.len())
                .find(|&i| {
                    (st.roots | st.separators) >> i & 1 == 1 && chi.get(i) == 0.0
                })
                .map(|i| p.label(i).to_string())
                .unwrap_or_default();
            return Err(Error::ZeroLambda(bad));
        }
        Ok(Family { alg, st, chi })
    }

    pub fn algebra(&self) -> &Algebra {
        self.alg
    }

    pub fn multiplier(&self) -> &Multiplier {
        &self.chi
    }

    pub fn structure(&self) -> &StructureSets {
        &self.st
    }

    /// k(θ) = log Δ_χ(θ^{-1}) = −Σ 2 λ_k log t_kk(θ).
    pub fn cumulant(&self, theta: &Element) -> Result<f64> {
        let t = self.alg.cholesky_dual(theta)?;
        Ok(self.cumulant_of_factor(&t))
    }

    fn cumulant_of_factor(&self, t: &LowerTriangular) -> f64 {
        -(0..self.alg.size())
            .map(|k| 2.0 * self.chi.get(k) * t.diag[k].ln())
            .sum::<f64>()
    }

    /// Mean of the family member at θ: m = (S·Λ)S* with θ^{-1} = SS*.
    pub fn mean(&self, theta: &Element) -> Result<Element> {
        let t = self.alg.cholesky_dual(theta)?;
        let s = self.alg.tri_invert(&t)?;
        Ok(self.mean_of_inverse_factor(&s))
    }

    fn lambda_diag(&self) -> Element {
        let mut d = self.alg.zero();
        for i in 0..self.alg.size() {
            d.diag[i] = self.chi.get(i);
        }
        d
    }

    fn mean_of_inverse_factor(&self, s: &LowerTriangular) -> Element {
        let se = self.alg.tri_to_element(s);
        let sd = self.alg.multiply(&se, &self.lambda_diag()).expect("same algebra");
        self.alg.multiply(&sd, &self.alg.involute(&se)).expect("same algebra")
    }

    /// θ with mean(θ) = m: scale the columns of the factor of m by
    /// 1/√λ_μ to get the factor of θ^{-1}, then invert.
    pub fn mean_inverse(&self, m: &Element) -> Result<Element> {
        let u = self.alg.cholesky(m)?;
        let mut s = u.clone();
        let p = self.alg.poset();
        for mu in 0..self.alg.size() {
            let lam = self.chi.get(mu);
            if lam == 0.0 {
                return Err(Error::ZeroLambda(p.label(mu).to_string()));
            }
            if lam < 0.0 {
                return Err(Error::NotInCone { label: p.label(mu).to_string(), pivot: lam });
            }
            let scale = 1.0 / lam.sqrt();
            s.diag[mu] *= scale;
            for (q, &(_r, c)) in self.alg.pairs().iter().enumerate() {
                if c == mu {
                    for off in self.alg.block_range(q) {
                        s.low[off] *= scale;
                    }
                }
            }
        }
        let v = self.alg.tri_invert(&s)?;
        Ok(self.alg.star_t_t(&v))
    }

    /// The Hessian of the cumulant at θ as a bilinear form: the exact
    /// derivative of the mean map, column by chart column (k'' = −dm/dθ).
    pub fn hessian(&self, theta: &Element) -> Result<SymmetricOperator> {
        let t = self.alg.cholesky_dual(theta)?;
        let s = self.alg.tri_invert(&t)?;
        let d = self.alg.dim_h();
        let g = self.alg.chart_weights();
        let mut op = SymmetricOperator::zeros(d);
        for b in 0..d {
            let k = self.alg.chart_basis(b);
            let dm = self.mean_derivative(&t, &s, &k);
            let coords = self.alg.chart_coords(&dm);
            for a in 0..d {
                op.set(a, b, -g[a] * coords[a]);
            }
        }
        debug_assert!(op.asymmetry() <= 1e-8 * (1.0 + op.max_abs()));
        Ok(op.symmetrized())
    }

    /// Directional derivative of θ ↦ mean(θ) along dθ, given the dual
    /// factor T of θ and S = T^{-1}.
    fn mean_derivative(&self, t: &LowerTriangular, s: &LowerTriangular, dtheta: &Element) -> Element {
        let alg = self.alg;
        let dt = dual_factor_derivative(alg, t, dtheta);
        // dS = −S (dT S)
        let dts = alg.tri_product(&dt, s).expect("same algebra");
        let ds = {
            let m = alg.tri_product(s, &dts).expect("same algebra");
            LowerTriangular {
                alg_id: m.alg_id,
                diag: m.diag.iter().map(|x| -x).collect(),
                low: m.low.iter().map(|x| -x).collect(),
            }
        };
        // dm = A + A* with A = (dS·Λ)S*
        let dse = alg.tri_to_element(&ds);
        let a = alg.multiply(&dse, &self.lambda_diag()).expect("same algebra");
        let a = alg
            .multiply(&a, &alg.involute(&alg.tri_to_element(s)))
            .expect("same algebra");
        alg.add(&a, &alg.involute(&a))
    }

    /// Variance function V(m) = k''(ψ(m)): the Hessian at the natural
    /// parameter of mean m.
    pub fn variance(&self, m: &Element) -> Result<SymmetricOperator> {
        let theta = self.mean_inverse(m)?;
        self.hessian(&theta)
    }

    /// Central-difference gradient of the cumulant in chart coordinates.
    pub fn fd_cumulant_gradient(&self, theta: &Element) -> Result<Vec<f64>> {
        let coords = self.alg.chart_coords(theta);
        let d = self.alg.dim_h();
        let mut grad = vec![0.0; d];
        for a in 0..d {
            let h = 1e-4 * 1.0f64.max(coords[a].abs());
            let mut up = coords.clone();
            up[a] += h;
            let mut dn = coords.clone();
            dn[a] -= h;
            let ku = self.cumulant(&self.alg.from_chart_coords(&up))?;
            let kd = self.cumulant(&self.alg.from_chart_coords(&dn))?;
            grad[a] = (ku - kd) / (2.0 * h);
        }
        Ok(grad)
    }

    /// Central-difference Hessian of the cumulant in chart coordinates.
    pub fn fd_cumulant_hessian(&self, theta: &Element) -> Result<SymmetricOperator> {
        let coords = self.alg.chart_coords(theta);
        let d = self.alg.dim_h();
        let mut op = SymmetricOperator::zeros(d);
        let step = |a: usize| 1e-4 * 1.0f64.max(coords[a].abs());
        for a in 0..d {
            for b in 0..=a {
                let (ha, hb) = (step(a), step(b));
                let eval = |sa: f64, sb: f64| -> Result<f64> {
                    let mut v = coords.clone();
                    v[a] += sa * ha;
                    v[b] += sb * hb;
                    self.cumulant(&self.alg.from_chart_coords(&v))
                };
                let v = (eval(1.0, 1.0)? - eval(1.0, -1.0)? - eval(-1.0, 1.0)?
                    + eval(-1.0, -1.0)?)
                    / (4.0 * ha * hb);
                op.set(a, b, v);
                op.set(b, a, v);
            }
        }
        Ok(op)
    }

    /// The mean as chart coordinates read off the trace pairing: the FD
    /// gradient of k equals −g_α m_α coordinate-wise.
    pub fn mean_chart_weighted(&self, theta: &Element) -> Result<Vec<f64>> {
        let m = self.mean(theta)?;
        let g = self.alg.chart_weights();
        Ok(self
            .alg
            .chart_coords(&m)
            .iter()
            .zip(&g)
            .map(|(x, w)| x * w)
            .collect())
    }

    /// Runs the derivative and moment oracles at θ, emitting report rows:
    /// (a) finite differences of the cumulant against the closed mean map
    /// and the Hessian; (b) Monte Carlo mean and covariance of actual
    /// draws against the same closed forms.
    pub fn verification_oracles(
        &self,
        theta: &Element,
        mc_samples: usize,
        seed: u64,
    ) -> Result<Report> {
        let alg = self.alg;
        let d = alg.dim_h();
        let g = alg.chart_weights();
        let mut report = Report::default();

        // (a) finite differences
        let grad = self.fd_cumulant_gradient(theta)?;
        let mw = self.mean_chart_weighted(theta)?;
        let gerr = grad
            .iter()
            .zip(&mw)
            .fold(0.0f64, |w, (gv, mv)| w.max((gv + mv).abs()));
        let gscale = mw.iter().fold(1.0f64, |w, v| w.max(v.abs()));
        report.push(ReportRow::relative("fd-gradient-vs-mean", 0.0, gerr / gscale, 1e-5));

        let hess = self.hessian(theta)?;
        let fd = self.fd_cumulant_hessian(theta)?;
        let herr = hess.max_abs_diff(&fd) / 1.0f64.max(hess.max_abs());
        report.push(ReportRow::relative("fd-hessian-vs-hessian", 0.0, herr, 1e-5));

        let m = self.mean(theta)?;
        let back = self.mean_inverse(&m)?;
        let rerr = alg.max_abs(&alg.sub(&back, theta)) / 1.0f64.max(alg.max_abs(theta));
        report.push(ReportRow::relative("mean-inverse-round-trip", 0.0, rerr, 1e-8));

        let var = self.variance(&m)?;
        let verr = var.max_abs_diff(&hess) / 1.0f64.max(hess.max_abs());
        report.push(ReportRow::relative("variance-vs-hessian", 0.0, verr, 1e-9));
        let floor = -1e-8 * var.max_abs();
        report.push(ReportRow::flag(
            "variance-psd",
            var.min_eigenvalue() >= floor,
        ));

        // (b) Monte Carlo moments
        if mc_samples > 0 {
            let draws = sample_riesz(alg, &self.st, &self.chi, theta, mc_samples, seed, 4)?;
            let coords: Vec<Vec<f64>> = draws.iter().map(|z| alg.chart_coords(z)).collect();
            let n = coords.len() as f64;
            let mean_hat: Vec<f64> =
                (0..d).map(|a| coords.iter().map(|c| c[a]).sum::<f64>() / n).collect();
            let m_coords = alg.chart_coords(&m);
            let mut worst_z = 0.0f64;
            for a in 0..d {
                let var_a =
                    coords.iter().map(|c| (c[a] - mean_hat[a]).powi(2)).sum::<f64>() / (n - 1.0);
                let se = (var_a / n).sqrt();
                if se > 0.0 {
                    worst_z = worst_z.max((mean_hat[a] - m_coords[a]).abs() / se);
                }
            }
            report.push(ReportRow::absolute("mc-mean-max-z", 0.0, worst_z, 5.0));

            let mut worst_cov_z = 0.0f64;
            for a in 0..d {
                for b in 0..=a {
                    let mut cov = 0.0;
                    let mut m22 = 0.0;
                    for c in &coords {
                        let da = c[a] - mean_hat[a];
                        let db = c[b] - mean_hat[b];
                        cov += da * db;
                        m22 += (da * db) * (da * db);
                    }
                    cov /= n - 1.0;
                    m22 /= n;
                    let se = ((m22 - cov * cov).max(0.0) / n).sqrt();
                    let closed = hess.get(a, b) / (g[a] * g[b]);
                    if se > 0.0 {
                        worst_cov_z = worst_cov_z.max((cov - closed).abs() / se);
                    }
                }
            }
            report.push(ReportRow::absolute("mc-covariance-max-z", 0.0, worst_cov_z, 5.0));
        }
        Ok(report)
    }
}

/// Derivative of the dual factorization θ = T*T: given T and dθ, the
/// triangular dT with dθ = dT*·T + T*·dT, by differentiating the reverse
/// recurrence.
fn dual_factor_derivative(alg: &Algebra, t: &LowerTriangular, dtheta: &Element) -> LowerTriangular {
    let p = alg.poset();
    let mut order = p.linear_extension().to_vec();
    order.reverse();
    let mut dt = alg.tri_zero();
    for &k in &order {
        let mut dpivot = dtheta.diag[k];
        for mu in 0..alg.size() {
            if p.lt(k, mu) {
                let q = alg.pair_index(mu, k);
                dpivot -= 2.0 * alg.block_form(mu, k, alg.block(&t.low, q), alg.block(&dt.low, q));
            }
        }
        dt.diag[k] = dpivot / (2.0 * t.diag[k]);
        for &j in &order {
            if !p.lt(j, k) {
                continue;
            }
            let q = alg.pair_index(k, j);
            let mut dnum = alg.block(&dtheta.low, q).to_vec();
            for mu in 0..alg.size() {
                if p.lt(k, mu) {
                    let qa = alg.pair_index(mu, k);
                    let qb = alg.pair_index(mu, j);
                    let t1 = alg.conj_lower_product(
                        mu,
                        k,
                        j,
                        alg.block(&dt.low, qa),
                        alg.block(&t.low, qb),
                    );
                    let t2 = alg.conj_lower_product(
                        mu,
                        k,
                        j,
                        alg.block(&t.low, qa),
                        alg.block(&dt.low, qb),
                    );
                    for ((n, a), b) in dnum.iter_mut().zip(&t1).zip(&t2) {
                        *n -= a + b;
                    }
                }
            }
            let tkj = alg.block(&t.low, q).to_vec();
            let dst = alg.block_range(q);
            for (idx, off) in dst.enumerate() {
                dt.low[off] = (dnum[idx] - dt.diag[k] * tkj[idx]) / t.diag[k];
            }
        }
    }
    dt
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poset::Poset;
    use crate::riesz::draw_rng;
    use crate::triangular::OrbitSignature;

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

    /// Factor with diagonals bounded well away from zero, for derivative
    /// checks: finite differences degrade near the cone boundary.
    fn conditioned_factor(alg: &Algebra, rng: &mut impl rand::Rng) -> crate::triangular::LowerTriangular {
        let mut t = alg.tri_unit();
        for d in t.diag.iter_mut() {
            *d = 0.8 + 0.8 * rng.gen::<f64>();
        }
        for x in t.low.iter_mut() {
            *x = 0.3 * rng.gen::<f64>() - 0.15;
        }
        t
    }

    fn nice_dual(alg: &Algebra, rng: &mut impl rand::Rng) -> Element {
        let t = conditioned_factor(alg, rng);
        alg.star_t_t(&t)
    }

    fn nice_cone(alg: &Algebra, rng: &mut impl rand::Rng) -> Element {
        let t = conditioned_factor(alg, rng);
        alg.tt_star(&t)
    }

    #[test]
    fn cumulant_simple_values() {
        let alg = p4_algebra();
        let fam = Family::new(&alg, Multiplier::new(vec![1.0, 1.0, 2.0, 1.0])).unwrap();
        assert_eq!(fam.cumulant(&alg.unit()).unwrap(), 0.0);
        let a1 = chain_algebra(1);
        let fam1 = Family::new(&a1, Multiplier::new(vec![1.3])).unwrap();
        let theta = a1.hermitian_from_parts(vec![2.0], vec![]);
        assert!(rel_close(fam1.cumulant(&theta).unwrap(), -1.3 * 2.0f64.ln(), 1e-14));
    }

    #[test]
    fn mean_at_unit_is_diag_lambda() {
        let alg = p4_algebra();
        let chi = Multiplier::new(vec![1.0, 0.8, 2.0, 1.4]);
        let fam = Family::new(&alg, chi.clone()).unwrap();
        let m = fam.mean(&alg.unit()).unwrap();
        for i in 0..4 {
            assert!(rel_close(m.diag[i], chi.get(i), 1e-13));
        }
        assert_eq!(alg.max_abs(&m), 2.0);
    }

    #[test]
    fn chain2_hessian_matches_hand_computation() {
        // At θ = e the Hessian in chart order (θ11, θ22, θ21) is
        // diag(a, b, 2a) for χ = (a, b).
        let alg = chain_algebra(2);
        let (a, b) = (1.4, 0.9);
        let fam = Family::new(&alg, Multiplier::new(vec![a, b])).unwrap();
        let h = fam.hessian(&alg.unit()).unwrap();
        assert!(rel_close(h.get(0, 0), a, 1e-11));
        assert!(rel_close(h.get(1, 1), b, 1e-11));
        assert!(rel_close(h.get(2, 2), 2.0 * a, 1e-11));
        assert!(h.get(0, 1).abs() < 1e-11 && h.get(0, 2).abs() < 1e-11);
        // At a general point: H(θ21,θ21) = 2a/(θ22 q) + 4a θ21²/(θ22² q²),
        // with q = θ11 − θ21²/θ22.
        let (t, sd, w) = (1.2, 0.7, 0.9);
        let theta = {
            let mut f = alg.tri_unit();
            f.diag = vec![t, w];
            f.low = vec![sd];
            alg.star_t_t(&f)
        };
        let h = fam.hessian(&theta).unwrap();
        let (t11, t21, t22) = (theta.diag[0], theta.low[0], theta.diag[1]);
        let q = t11 - t21 * t21 / t22;
        let want = 2.0 * a / (t22 * q) + 4.0 * a * t21 * t21 / (t22 * t22 * q * q);
        assert!(rel_close(h.get(2, 2), want, 1e-10), "{} vs {}", h.get(2, 2), want);
        let want13 = -2.0 * a * t21 / (q * q * t22);
        assert!(rel_close(h.get(0, 2), want13, 1e-10));
    }

    #[test]
    fn singleton_closed_forms() {
        let alg = chain_algebra(1);
        let lam = 1.7;
        let fam = Family::new(&alg, Multiplier::new(vec![lam])).unwrap();
        let theta = alg.hermitian_from_parts(vec![2.5], vec![]);
        let m = fam.mean(&theta).unwrap();
        assert!(rel_close(m.diag[0], lam / 2.5, 1e-13));
        let ti = fam.mean_inverse(&m).unwrap();
        assert!(rel_close(ti.diag[0], 2.5, 1e-12));
        let h = fam.hessian(&theta).unwrap();
        assert!(rel_close(h.get(0, 0), lam / (2.5 * 2.5), 1e-12));
    }

    #[test]
    fn mean_matches_fd_gradient() {
        for (alg, chi) in [
            (p4_algebra(), Multiplier::new(vec![1.0, 1.0, 2.0, 1.0])),
            (chain_algebra(3), Multiplier::new(vec![1.0, 1.0, 1.5])),
        ] {
            let fam = Family::new(&alg, chi).unwrap();
            let mut rng = draw_rng(60, 0);
            for _ in 0..5 {
                let theta = nice_dual(&alg, &mut rng);
                let grad = fam.fd_cumulant_gradient(&theta).unwrap();
                let mw = fam.mean_chart_weighted(&theta).unwrap();
                for (gv, mv) in grad.iter().zip(&mw) {
                    assert!(
                        (gv + mv).abs() <= 1e-5 * 1.0f64.max(mv.abs()),
                        "{gv} vs {}",
                        -mv
                    );
                }
            }
        }
    }

    #[test]
    fn hessian_matches_fd_hessian() {
        for (alg, chi) in [
            (p4_algebra(), Multiplier::new(vec![1.0, 1.0, 2.0, 1.0])),
            (chain_algebra(3), Multiplier::new(vec![1.0, 1.0, 1.5])),
        ] {
            let fam = Family::new(&alg, chi).unwrap();
            let mut rng = draw_rng(61, 0);
            for _ in 0..3 {
                let theta = nice_dual(&alg, &mut rng);
                let h = fam.hessian(&theta).unwrap();
                let fd = fam.fd_cumulant_hessian(&theta).unwrap();
                let err = h.max_abs_diff(&fd) / 1.0f64.max(h.max_abs());
                assert!(err <= 1e-5, "relative Hessian error {err}");
            }
        }
    }

    #[test]
    fn mean_inverse_round_trip() {
        for (alg, chi) in [
            (p4_algebra(), Multiplier::new(vec![1.0, 1.0, 2.0, 1.0])),
            (chain_algebra(3), Multiplier::new(vec![0.7, 1.2, 1.6])),
        ] {
            let fam = Family::new(&alg, chi).unwrap();
            let mut rng = draw_rng(62, 0);
            for _ in 0..5 {
                let theta = alg.random_dual_point(&mut rng);
                let m = fam.mean(&theta).unwrap();
                let back = fam.mean_inverse(&m).unwrap();
                let err = alg.max_abs(&alg.sub(&back, &theta)) / 1.0f64.max(alg.max_abs(&theta));
                assert!(err <= 1e-8, "round trip error {err}");
                // and the other direction
                let m2 = fam.mean(&back).unwrap();
                let err = alg.max_abs(&alg.sub(&m2, &m)) / 1.0f64.max(alg.max_abs(&m));
                assert!(err <= 1e-8);
            }
        }
    }

    #[test]
    fn quadratic_rep_symmetry_and_unit() {
        let alg = p4_algebra();
        let mut rng = draw_rng(63, 0);
        for _ in 0..100 {
            let x = alg.random_hermitian(&mut rng);
            let k = alg.random_hermitian(&mut rng);
            let l = alg.random_hermitian(&mut rng);
            let pk = quadratic_rep(&alg, &x, &k).unwrap();
            let pl = quadratic_rep(&alg, &x, &l).unwrap();
            let a = alg.pairing(&pk, &l).unwrap();
            let b = alg.pairing(&pl, &k).unwrap();
            assert!(rel_close(a, b, 1e-10), "{a} vs {b}");
        }
        let k = alg.random_hermitian(&mut rng);
        let pk = quadratic_rep(&alg, &alg.unit(), &k).unwrap();
        assert!(alg.max_abs(&alg.sub(&pk, &k)) < 1e-14);
    }

    #[test]
    fn inverse_derivative_matches_fd_on_chains() {
        // The quadratic-representation identity for the derivative of
        // inversion is exact on totally ordered index sets.
        for n in [1usize, 2, 3] {
            let alg = chain_algebra(n);
            let mut rng = draw_rng(64, 0);
            for _ in 0..20 {
                let x = nice_cone(&alg, &mut rng);
                let k = alg.random_hermitian(&mut rng);
                let closed = inverse_derivative(&alg, &x, &k).unwrap();
                let h = 1e-5 * (1.0 + alg.max_abs(&x)) / (1.0 + alg.max_abs(&k));
                let xp = alg.add(&x, &alg.scale(&k, h));
                let xm = alg.sub(&x, &alg.scale(&k, h));
                let fd = alg.scale(
                    &alg.sub(&alg.inverse_primal(&xp).unwrap(), &alg.inverse_primal(&xm).unwrap()),
                    1.0 / (2.0 * h),
                );
                let err = alg.max_abs(&alg.sub(&closed, &fd))
                    / 1.0f64.max(alg.max_abs(&closed));
                assert!(err <= 1e-6, "n = {n}, err = {err}");
            }
        }
        let alg = chain_algebra(1);
        let x = alg.hermitian_from_parts(vec![2.0], vec![]);
        let k = alg.hermitian_from_parts(vec![1.0], vec![]);
        let d = inverse_derivative(&alg, &x, &k).unwrap();
        assert!(rel_close(d.diag[0], -0.25, 1e-13));
    }

    #[test]
    fn inverse_derivative_identity_fails_off_total_orders() {
        // On the example poset two incomparable indices below a common
        // separator couple through the factorization, which P(X^{-1}) does
        // not see: the quadratic-representation formula stops being the
        // derivative. This pins where the chain-only identity lives.
        let alg = p4_algebra();
        let mut t = alg.tri_unit();
        let q31 = alg.pair_index(2, 0);
        let q32 = alg.pair_index(2, 1);
        t.low[alg.block_range(q31).start] = 0.8;
        t.low[alg.block_range(q32).start] = 0.6;
        let x = alg.tt_star(&t);
        let k = alg.diag_unit(0);
        let closed = inverse_derivative(&alg, &x, &k).unwrap();
        let h = 1e-6;
        let xp = alg.add(&x, &alg.scale(&k, h));
        let xm = alg.sub(&x, &alg.scale(&k, h));
        let fd = alg.scale(
            &alg.sub(&alg.inverse_primal(&xp).unwrap(), &alg.inverse_primal(&xm).unwrap()),
            1.0 / (2.0 * h),
        );
        let err = alg.max_abs(&alg.sub(&closed, &fd));
        assert!(err > 1e-3, "expected a visible discrepancy, got {err}");
    }

    #[test]
    fn wishart_collapse_on_total_orders() {
        // Constant χ: V(m) = (1/λ) P(m) exactly on chains and antichains.
        let lam = 2.0;
        for alg in [chain_algebra(2), chain_algebra(3), Algebra::scalar(Poset::new(&["1", "2", "3"], &[]).unwrap())] {
            let fam = Family::new(&alg, Multiplier::constant(alg.size(), lam)).unwrap();
            let mut rng = draw_rng(65, 0);
            for _ in 0..5 {
                let m = alg.random_cone_point(&mut rng);
                let v = fam.variance(&m).unwrap();
                let pm = quadratic_rep_operator(&alg, &m).unwrap().scale(1.0 / lam);
                let err = v.max_abs_diff(&pm) / 1.0f64.max(pm.max_abs());
                assert!(err <= 1e-10, "collapse error {err}");
            }
        }
    }

    #[test]
    fn wishart_collapse_fails_on_the_example_poset() {
        // With incomparable pairs the quadratic representation is not the
        // cumulant Hessian; the exact variance differs from (1/λ)P(m).
        let alg = p4_algebra();
        let lam = 2.0;
        let fam = Family::new(&alg, Multiplier::constant(4, lam)).unwrap();
        let mut t = alg.tri_unit();
        t.low[alg.block_range(alg.pair_index(2, 0)).start] = 0.7;
        t.low[alg.block_range(alg.pair_index(2, 1)).start] = 0.5;
        t.low[alg.block_range(alg.pair_index(3, 0)).start] = 0.4;
        let m = alg.tt_star(&t);
        let v = fam.variance(&m).unwrap();
        let pm = quadratic_rep_operator(&alg, &m).unwrap().scale(1.0 / lam);
        let err = v.max_abs_diff(&pm) / 1.0f64.max(pm.max_abs());
        assert!(err > 1e-3, "expected the collapse to fail, got {err}");
        // but the exact variance still matches finite differences
        let theta = fam.mean_inverse(&m).unwrap();
        let fd = fam.fd_cumulant_hessian(&theta).unwrap();
        assert!(v.max_abs_diff(&fd) / 1.0f64.max(v.max_abs()) <= 1e-5);
    }

    #[test]
    fn projection_hessian_formula_holds_on_chains_only() {
        // The closed form Σ λ_i (P(Y_{i⪯}) − P(Y_{i≺})) with Y = θ^{-1}
        // equals the Hessian on chains; on the example poset it misses the
        // cross terms between incomparable factor columns.
        let build = |alg: &Algebra, chi: &Multiplier, theta: &Element| -> SymmetricOperator {
            let y = alg.inverse_dual(theta).unwrap();
            let t = alg.cholesky(&y).unwrap();
            let d = alg.dim_h();
            let mut op = SymmetricOperator::zeros(d);
            for i in 0..alg.size() {
                let (up, strict) = alg.project_upsets_factor(&t, i);
                let pu = quadratic_rep_operator(alg, &up).unwrap();
                let ps = quadratic_rep_operator(alg, &strict).unwrap();
                for a in 0..d {
                    for b in 0..d {
                        op.set(
                            a,
                            b,
                            op.get(a, b) + chi.get(i) * (pu.get(a, b) - ps.get(a, b)),
                        );
                    }
                }
            }
            op
        };
        let alg = chain_algebra(3);
        let chi = Multiplier::new(vec![1.0, 1.2, 1.6]);
        let fam = Family::new(&alg, chi.clone()).unwrap();
        let mut rng = draw_rng(66, 0);
        let theta = nice_dual(&alg, &mut rng);
        let closed = build(&alg, &chi, &theta);
        let exact = fam.hessian(&theta).unwrap();
        assert!(closed.max_abs_diff(&exact) / 1.0f64.max(exact.max_abs()) <= 1e-10);

        let alg = p4_algebra();
        let chi = Multiplier::new(vec![1.0, 1.0, 2.0, 1.0]);
        let fam = Family::new(&alg, chi.clone()).unwrap();
        let mut t = alg.tri_unit();
        t.low[alg.block_range(alg.pair_index(2, 0)).start] = 0.7;
        t.low[alg.block_range(alg.pair_index(2, 1)).start] = 0.5;
        let theta = alg.star_t_t(&t);
        let closed = build(&alg, &chi, &theta);
        let exact = fam.hessian(&theta).unwrap();
        let fd = fam.fd_cumulant_hessian(&theta).unwrap();
        assert!(exact.max_abs_diff(&fd) / 1.0f64.max(exact.max_abs()) <= 1e-5);
        assert!(
            closed.max_abs_diff(&exact) / 1.0f64.max(exact.max_abs()) > 1e-3,
            "projection formula should miss cross terms here"
        );
    }

    #[test]
    fn family_rejects_bad_multipliers() {
        let alg = p4_algebra();
        assert!(matches!(
            Family::new(&alg, Multiplier::new(vec![-1.0, 1.0, 2.0, 1.0])),
            Err(Error::NotInXi)
        ));
        // singular member with a zero anchor coordinate
        assert!(matches!(
            Family::new(&alg, Multiplier::new(vec![0.0, 0.0, 1.5, 0.0])),
            Err(Error::ZeroLambda(_))
        ));
    }

    #[test]
    fn orbit_signature_reexport_sanity() {
        // small guard that the signature type used by the samplers is the
        // one the familes see
        let alg = p4_algebra();
        let psi = OrbitSignature::all_on(4);
        assert_eq!(psi.diagonal(&alg), alg.unit());
    }
}
