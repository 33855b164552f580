//! Bases of matrix representation: Stone-vector bases built from
//! `η = exp(-αA²) g`, the `(t - i)^{-1}`-weighted f-basis, and finite
//! diagnostics for both.
//!
//! None of these operations produces a second Jacobi representation of a
//! nonselfadjoint operator. Stone constructions applied to the truncation
//! proxy of an indeterminate matrix represent the selfadjoint extension
//! behind the proxy, not the original operator.

use std::cmp::Ordering;

use rug::{Complex, Float, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Warning};
use crate::jacobi::{self, JacobiMatrix};
use crate::linalg::{self, Vectors};
use crate::measures::{self, Measure, MeasureKind, ResolvedJacobi};
use crate::num::{self, Field, PrecisionConfig};

/// Smallest damping exponent for which Stone vectors are known to be cyclic.
pub fn alpha_threshold() -> Rational {
    Rational::from((1, 2))
}

fn check_alpha(alpha: &Rational) -> Result<Vec<Warning>> {
    if alpha.cmp0() == Ordering::Less {
        return Err(Error::Malformed("alpha must be nonnegative".into()));
    }
    if *alpha < alpha_threshold() {
        let w = Warning::AlphaBelowThreshold { alpha: alpha.to_f64() };
        log::warn!("{w}");
        return Ok(vec![w]);
    }
    Ok(Vec::new())
}

/// `[J](α,g)`: recurrence coefficients of `exp(-2αt²) dμ_g`, normalized.
pub fn stone_jacobi_measure_route(mu_g: &Measure, alpha: &Rational, n: usize) -> Result<(JacobiMatrix, Vec<Warning>)> {
    let warnings = check_alpha(alpha)?;
    let damped = measures::gauss_damp(mu_g, alpha)?;
    Ok((measures::measure_to_jacobi(&damped, n)?, warnings))
}

/// As [`stone_jacobi_measure_route`], keeping only the prefix that survives
/// the two-precision comparison. Damping the far atoms of a quadrature
/// proxy leaves weights too small to contribute at working precision, and
/// the coefficients past them are not determined.
pub fn stone_jacobi_measure_route_resolved(
    mu_g: &Measure,
    alpha: &Rational,
    n: usize,
) -> Result<(ResolvedJacobi, Vec<Warning>)> {
    let warnings = check_alpha(alpha)?;
    let damped = measures::gauss_damp(mu_g, alpha)?;
    Ok((measures::measure_to_jacobi_resolved(&damped, n)?, warnings))
}

#[derive(Debug, Clone, PartialEq)]
pub enum BasisSource {
    Stone { alpha: Rational, generator: Vec<Rational> },
    FBasis { n: usize },
}

/// Leading coordinates of a basis in the canonical basis of `l2`.
#[derive(Debug, Clone)]
pub struct BasisAtTruncation {
    /// `vectors[k]` is the k-th basis vector, of length `truncation`.
    pub vectors: Vec<Vec<Float>>,
    pub source: BasisSource,
    pub truncation: usize,
}

impl BasisAtTruncation {
    /// `max |<v_j, v_k> - δ_jk|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst = 0f64;
        for (j, a) in self.vectors.iter().enumerate() {
            for (k, b) in self.vectors.iter().enumerate() {
                let d = dot(a, b).to_f64() - if j == k { 1.0 } else { 0.0 };
                worst = worst.max(d.abs());
            }
        }
        worst
    }

    pub fn to_json(&self) -> Vec<Vec<String>> {
        self.vectors.iter().map(|v| v.iter().map(num::format_float).collect()).collect()
    }
}

fn dot(a: &[Float], b: &[Float]) -> Float {
    let prec = a[0].prec();
    let terms: Vec<Float> = a.iter().zip(b).map(|(x, y)| Float::with_val(prec, x * y)).collect();
    num::pairwise_sum(prec, &terms)
}

fn tridiagonal_apply(q: &[Float], b: &[Float], v: &[Float]) -> Vec<Float> {
    let n = v.len();
    let prec = v[0].prec();
    (0..n)
        .map(|i| {
            let mut s = Float::with_val(prec, &q[i] * &v[i]);
            if i > 0 {
                s += Float::with_val(prec, &b[i - 1] * &v[i - 1]);
            }
            if i + 1 < n {
                s += Float::with_val(prec, &b[i] * &v[i + 1]);
            }
            s
        })
        .collect()
}

/// Largest output size the operator route accepts for a truncation `n_trunc`.
pub fn max_operator_route_size(n_trunc: usize) -> usize {
    n_trunc / 4
}

/// `[J](α,g)` computed inside the truncation `T` of `J`: `η = exp(-αT²) g`
/// through the spectral decomposition of `T`, then Lanczos (Gram–Schmidt on
/// `T^{k-1} η`, reorthogonalized twice) for `n` steps.
///
/// The result is checked against the measure route applied to the spectral
/// measure of `(T, g)`; disagreement beyond `rel_tol` is reported as
/// [`Error::TruncationTooSmall`].
pub fn stone_jacobi_operator_route(
    j: &JacobiMatrix,
    alpha: &Rational,
    g: &[Rational],
    n_trunc: usize,
    n: usize,
) -> Result<(JacobiMatrix, BasisAtTruncation, Vec<Warning>)> {
    let warnings = check_alpha(alpha)?;
    if n == 0 || n_trunc == 0 {
        return Err(Error::Malformed("sizes must be positive".into()));
    }
    if g.len() > n_trunc {
        return Err(Error::Malformed(format!("generator has {} coordinates, truncation is {n_trunc}", g.len())));
    }
    if g.iter().all(|x| x.cmp0() == Ordering::Equal) {
        return Err(Error::Malformed("generator must be nonzero".into()));
    }
    if n > max_operator_route_size(n_trunc) {
        return Err(Error::TruncationTooSmall(format!(
            "n={n} exceeds N/4={} for truncation N={n_trunc}",
            max_operator_route_size(n_trunc)
        )));
    }
    let cfg = *j.precision();
    let bits = cfg.bits();
    let prec = 2 * bits;
    let (q, b) = j.stored_or_generated(n_trunc, prec)?;
    let (qf, bf) = (num::floats(prec, &q), num::floats(prec, &b));
    let eig = linalg::tridiagonal_eigen(&qf, &bf, prec, Vectors::Full)?;
    let vecs = eig.vectors.as_ref().expect("full vectors");

    let mut gf: Vec<Float> = num::floats(prec, g);
    gf.resize(n_trunc, Float::new(prec));
    // spectral coordinates of g and of η
    let alpha_f = num::float(prec, alpha);
    let coords: Vec<Float> = vecs.iter().map(|v| dot(v, &gf)).collect();
    let damped: Vec<Float> = coords
        .iter()
        .zip(&eig.values)
        .map(|(c, lam)| {
            let e = (Float::with_val(prec, lam.square_ref()) * &alpha_f * -1i32).exp();
            Float::with_val(prec, c * &e)
        })
        .collect();
    let mut eta = vec![Float::new(prec); n_trunc];
    for (v, c) in vecs.iter().zip(&damped) {
        for (e, x) in eta.iter_mut().zip(v) {
            *e += Float::with_val(prec, c * x);
        }
    }

    let norm = dot(&eta, &eta).sqrt();
    if norm.is_zero() {
        return Err(Error::NonFinite("exp(-αT²)g vanishes at working precision".into()));
    }
    let mut basis: Vec<Vec<Float>> = vec![eta.iter().map(|x| Float::with_val(prec, x / &norm)).collect()];
    let mut aq = Vec::with_capacity(n);
    let mut ab = Vec::with_capacity(n.saturating_sub(1));
    for k in 0..n {
        let mut w = tridiagonal_apply(&qf, &bf, &basis[k]);
        aq.push(dot(&basis[k], &w));
        if k + 1 == n {
            break;
        }
        for _ in 0..2 {
            for v in &basis {
                let c = dot(v, &w);
                for (wi, vi) in w.iter_mut().zip(v) {
                    *wi -= Float::with_val(prec, &c * vi);
                }
            }
        }
        let nb = dot(&w, &w).sqrt();
        if nb.is_zero() {
            return Err(Error::FiniteSupport { requested: n, support: k + 1 });
        }
        basis.push(w.iter().map(|x| Float::with_val(prec, x / &nb)).collect());
        ab.push(nb);
    }

    // measure route on the spectral measure of (T, g)
    let gnorm2 = dot(&gf, &gf);
    let mut atoms: Vec<(Float, Float)> = eig
        .values
        .iter()
        .zip(&coords)
        .filter(|(_, c)| !c.is_zero())
        .map(|(l, c)| (Float::with_val(prec, l), Float::with_val(prec, c.square_ref()) / &gnorm2))
        .collect();
    atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));
    let (pts, wts): (Vec<Float>, Vec<Float>) = atoms.into_iter().unzip();
    let spectral = Measure::atomic_floats(&pts, &wts, cfg.with_bits(prec))?;
    let check = measures::measure_to_jacobi(&measures::gauss_damp(&spectral, alpha)?, n)?;
    let qc = num::floats(prec, check.q());
    let bc = num::floats(prec, check.b());
    let (qa, ba) = jacobi::coefficient_agreement_split(&aq, &ab, &qc, &bc);
    let need = -cfg.rel_tol.log2();
    if let Some(worst) = qa.iter().chain(&ba).cloned().reduce(f64::min) {
        if worst < need {
            return Err(Error::TruncationTooSmall(format!(
                "operator and measure routes agree to {worst:.1} bits, {need:.1} required"
            )));
        }
    }

    let round = |v: &[Float]| -> Vec<Float> { v.iter().map(|x| Float::with_val(bits, x)).collect() };
    let jm = JacobiMatrix::from_floats(&round(&aq), &round(&ab), cfg)?;
    let basis = BasisAtTruncation {
        vectors: basis.iter().map(|v| round(v)).collect(),
        source: BasisSource::Stone { alpha: alpha.clone(), generator: g.to_vec() },
        truncation: n_trunc,
    };
    Ok((jm, basis, warnings))
}

/// `[Ĵ]`: recurrence coefficients of `ν₁ = (1+t²)^{-1} dμ / C`, together
/// with `C = ∫ (1+t²)^{-1} dμ`.
pub fn f_basis_jacobi(mu: &Measure, n: usize) -> Result<(JacobiMatrix, Rational)> {
    let (nu, c) = measures::power_reweight(mu, -1)?;
    Ok((measures::measure_to_jacobi(&nu, n)?, c))
}

/// Gram matrix `<f_j, f_k>` in `L2(μ)`, real and imaginary parts.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    pub re: Vec<Vec<Rational>>,
    pub im: Vec<Vec<Rational>>,
    /// True when computed in exact rational arithmetic.
    pub exact: bool,
}

impl GramMatrix {
    /// `max |Re G - I|`.
    pub fn identity_defect(&self) -> f64 {
        let mut worst = 0f64;
        for (j, row) in self.re.iter().enumerate() {
            for (k, x) in row.iter().enumerate() {
                let d = if j == k { Rational::from(x - 1u32) } else { x.clone() };
                worst = worst.max(d.to_f64().abs());
            }
        }
        worst
    }

    /// `max |Im G|`.
    pub fn max_imaginary(&self) -> f64 {
        self.im.iter().flatten().map(|x| x.to_f64().abs()).fold(0.0, f64::max)
    }

    pub fn to_json(&self, cfg: &PrecisionConfig) -> GramJson {
        let fmt = |m: &Vec<Vec<Rational>>| -> Vec<Vec<String>> {
            m.iter().map(|r| r.iter().map(|x| num::format_rational(x, cfg)).collect()).collect()
        };
        GramJson {
            re: fmt(&self.re),
            im: fmt(&self.im),
            exact: self.exact,
            identity_defect: format!("{:e}", self.identity_defect()),
            max_imaginary: format!("{:e}", self.max_imaginary()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramJson {
    pub re: Vec<Vec<String>>,
    pub im: Vec<Vec<String>>,
    pub exact: bool,
    pub identity_defect: String,
    pub max_imaginary: String,
}

/// `Σ_i w_i conj(g_j(t_i)) g_k(t_i) / C` with `g_k = R_k / (t - i)` split
/// into real and imaginary parts, `R_k` from the recurrence of `ĵ`.
fn gram_sums<F: Field>(t: &[F], w: &[F], q: &[F], b: &[F], c: &F) -> (Vec<Vec<F>>, Vec<Vec<F>>) {
    let n = q.len();
    let one = c.one();
    let m = t.len();
    // real and imaginary parts of g_k at each node: R_k (t + i) / (1 + t^2)
    let mut gre = vec![Vec::with_capacity(m); n];
    let mut gim = vec![Vec::with_capacity(m); n];
    for i in 0..m {
        let den = one.add(&t[i].mul(&t[i]));
        let mut r_prev = c.zero();
        let mut r = one.clone();
        for k in 0..n {
            gre[k].push(r.mul(&t[i]).div(&den));
            gim[k].push(r.div(&den));
            if k + 1 < n {
                let mut next = t[i].sub(&q[k]).mul(&r);
                if k > 0 {
                    next = next.sub(&b[k - 1].mul(&r_prev));
                }
                r_prev = std::mem::replace(&mut r, next.div(&b[k]));
            }
        }
    }
    let mut re = vec![vec![c.zero(); n]; n];
    let mut im = vec![vec![c.zero(); n]; n];
    for j in 0..n {
        for k in 0..n {
            let mut sr = c.zero();
            let mut si = c.zero();
            for i in 0..m {
                let rr = gre[j][i].mul(&gre[k][i]).add(&gim[j][i].mul(&gim[k][i]));
                let ii = gre[j][i].mul(&gim[k][i]).sub(&gim[j][i].mul(&gre[k][i]));
                sr = sr.add(&w[i].mul(&rr));
                si = si.add(&w[i].mul(&ii));
            }
            re[j][k] = sr.div(c);
            im[j][k] = si.div(c);
        }
    }
    (re, im)
}

/// Gram matrix of `f_0, ..., f_{n-1}`, `f_k = R_k / (sqrt(C) (t - i))`, in
/// `L2(μ)`. Exact for atomic measures in rational mode; otherwise complex
/// floating-point sums at the measure's precision.
pub fn f_basis_gram(mu: &Measure, n: usize) -> Result<GramMatrix> {
    let (jh, c) = f_basis_jacobi(mu, n)?;
    if let Some((t, w)) = mu.exact_atoms() {
        let (re, im) = gram_sums(&t, &w, jh.q(), jh.b(), &c);
        return Ok(GramMatrix { re, im, exact: true });
    }
    let bits = mu.precision().bits();
    let prec = 2 * bits;
    let d = match mu.kind() {
        MeasureKind::Atomic { .. } => mu.discretize(prec)?,
        MeasureKind::Density { .. } => measures::stieltjes_nodes(mu, n, prec)?.1,
    };
    let q = num::floats(prec, jh.q());
    let b = num::floats(prec, jh.b());
    let cf = num::float(prec, &c);
    let (re, im) = gram_sums(&d.points, &d.weights, &q, &b, &cf);
    let conv = |m: Vec<Vec<Float>>| -> Result<Vec<Vec<Rational>>> {
        m.into_iter().map(|r| r.iter().map(|x| num::to_rational(&Float::with_val(bits, x))).collect()).collect()
    };
    Ok(GramMatrix { re: conv(re)?, im: conv(im)?, exact: false })
}

/// Smallest singular value of the column-normalized `N x n` matrix with
/// columns `(T - iI) T^{k-1} δ`, `T` the `N x N` truncation of `J`.
///
/// A conditioning heuristic only: values bounded away from zero as `N`
/// grows are consistent with `δ` generating a basis of representation, but
/// no finite truncation certifies the density condition.
pub fn representation_diagnostic(j: &JacobiMatrix, delta: &[Rational], n_trunc: usize, n: usize) -> Result<Float> {
    if n == 0 || n > n_trunc {
        return Err(Error::Malformed(format!("probe size must satisfy 1 <= n <= N (n={n}, N={n_trunc})")));
    }
    if delta.len() > n_trunc {
        return Err(Error::Malformed(format!("δ has {} coordinates, truncation is {n_trunc}", delta.len())));
    }
    if delta.iter().all(|x| x.cmp0() == Ordering::Equal) {
        return Err(Error::Malformed("δ must be nonzero".into()));
    }
    let bits = j.precision().bits();
    let prec = 2 * bits;
    let (q, b) = j.stored_or_generated(n_trunc, prec)?;
    let (qf, bf) = (num::floats(prec, &q), num::floats(prec, &b));
    let mut v = num::floats(prec, delta);
    v.resize(n_trunc, Float::new(prec));
    // columns as (real, imaginary) coordinate vectors
    let mut cols: Vec<Vec<Complex>> = Vec::with_capacity(n);
    for _ in 0..n {
        let tv = tridiagonal_apply(&qf, &bf, &v);
        let col: Vec<Complex> =
            tv.iter().zip(&v).map(|(a, x)| Complex::with_val(prec, (a, Float::with_val(prec, -x)))).collect();
        let norm =
            num::pairwise_sum(prec, &col.iter().map(|z| Float::with_val(prec, z.norm_ref())).collect::<Vec<_>>())
                .sqrt();
        if norm.is_zero() {
            return Ok(Float::new(bits));
        }
        cols.push(col.into_iter().map(|z| z / &norm).collect());
        // rescale the Krylov vector to keep magnitudes bounded
        let vn = dot(&tv, &tv).sqrt();
        v = tv.into_iter().map(|x| x / &vn).collect();
    }
    // A^H A as a Hermitian matrix, then its 2n x 2n real embedding
    let mut h_re = vec![vec![Float::new(prec); n]; n];
    let mut h_im = vec![vec![Float::new(prec); n]; n];
    for a in 0..n {
        for c in 0..n {
            let terms: Vec<Complex> =
                cols[a].iter().zip(&cols[c]).map(|(x, y)| Complex::with_val(prec, x.conj_ref()) * y).collect();
            let s = num::pairwise_sum_complex(prec, &terms);
            let (r, i) = s.into_real_imag();
            h_re[a][c] = r;
            h_im[a][c] = i;
        }
    }
    let mut emb = vec![vec![Float::new(prec); 2 * n]; 2 * n];
    for a in 0..n {
        for c in 0..n {
            emb[a][c] = h_re[a][c].clone();
            emb[a + n][c + n] = h_re[a][c].clone();
            emb[a][c + n] = Float::with_val(prec, -&h_im[a][c]);
            emb[a + n][c] = h_im[a][c].clone();
        }
    }
    let (values, _) = linalg::symmetric_eigen(&emb, prec)?;
    let lo = values.iter().fold(values[0].clone(), |m, x| m.min(x)).max(&Float::new(prec));
    Ok(Float::with_val(bits, lo.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jacobi::Family;

    fn r(x: i64) -> Rational {
        Rational::from(x)
    }

    fn cfg() -> PrecisionConfig {
        PrecisionConfig::default()
    }

    #[test]
    fn zero_alpha_reproduces_the_matrix() {
        let j = JacobiMatrix::from_family(Family::HermiteLike, cfg());
        let (out, basis, warnings) = stone_jacobi_operator_route(&j, &r(0), &[r(1)], 32, 8).unwrap();
        assert_eq!(warnings.len(), 1);
        for (k, b) in out.b().iter().enumerate() {
            let expect = Float::with_val(256, (k + 1) as f64 / 2.0).sqrt();
            assert!(Float::with_val(256, Float::with_val(256, b) - &expect).abs() < 1e-60);
        }
        for (k, v) in basis.vectors.iter().enumerate() {
            for (i, x) in v.iter().enumerate() {
                let e = if i == k { 1.0 } else { 0.0 };
                assert!(Float::with_val(256, x - e).abs() < 1e-60);
            }
        }
        assert!(basis.orthonormality_defect() < 1e-60);
    }

    #[test]
    fn operator_route_rejects_bad_input() {
        let j = JacobiMatrix::from_family(Family::HermiteLike, cfg());
        let half = alpha_threshold();
        assert!(matches!(stone_jacobi_operator_route(&j, &half, &[r(0), r(0)], 32, 4), Err(Error::Malformed(_))));
        assert!(matches!(stone_jacobi_operator_route(&j, &half, &[r(1)], 32, 9), Err(Error::TruncationTooSmall(_))));
        assert!(matches!(stone_jacobi_operator_route(&j, &r(-1), &[r(1)], 32, 4), Err(Error::Malformed(_))));
    }

    #[test]
    fn damping_preserves_support_size() {
        let mu = Measure::atomic(vec![r(-1), r(0), r(2)], vec![r(1), r(1), r(1)], cfg()).unwrap();
        assert_eq!(
            stone_jacobi_measure_route(&mu, &alpha_threshold(), 5).unwrap_err(),
            Error::FiniteSupport { requested: 5, support: 3 }
        );
    }

    #[test]
    fn symmetric_pair_f_basis() {
        let half = Rational::from((1, 2));
        let mu =
            Measure::atomic(vec![r(-1), r(1)], vec![half.clone(), half.clone()], PrecisionConfig::rational()).unwrap();
        let (jh, c) = f_basis_jacobi(&mu, 2).unwrap();
        assert_eq!(c, half);
        assert_eq!(jh.q(), &[r(0), r(0)]);
        assert_eq!(jh.b(), &[r(1)]);
        let g = f_basis_gram(&mu, 2).unwrap();
        assert!(g.exact);
        assert_eq!(g.re, vec![vec![r(1), r(0)], vec![r(0), r(1)]]);
        assert_eq!(g.im, vec![vec![r(0), r(0)], vec![r(0), r(0)]]);
        assert!(matches!(f_basis_jacobi(&mu, 3), Err(Error::FiniteSupport { .. })));
    }

    #[test]
    fn first_f_vector_has_unit_norm() {
        let mu = Measure::atomic(
            vec![r(-3), r(0), r(5)],
            vec![Rational::from((1, 6)), Rational::from((1, 2)), Rational::from((1, 3))],
            cfg(),
        )
        .unwrap();
        let g = f_basis_gram(&mu, 1).unwrap();
        assert!((g.re[0][0].to_f64() - 1.0).abs() < 1e-60);
        assert_eq!(g.im[0][0], 0);
    }

    #[test]
    fn diagnostic_single_column_is_one() {
        let j = JacobiMatrix::from_family(Family::HermiteLike, cfg());
        let s = representation_diagnostic(&j, &[r(1)], 20, 1).unwrap();
        assert!(Float::with_val(256, s - 1u32).abs() < 1e-60);
        assert!(matches!(representation_diagnostic(&j, &[r(0)], 20, 1), Err(Error::Malformed(_))));
        assert!(matches!(representation_diagnostic(&j, &[r(1)], 4, 5), Err(Error::Malformed(_))));
    }
}
