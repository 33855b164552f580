//! Moment sequences, Hankel positivity, and conversion between moments and
//! Jacobi recurrence coefficients.
//!
//! The conversion uses the classical determinantal formulae. With
//! `D_k = det(s_{i+j})_{0<=i,j<=k}` and `Δ_k` the same determinant with its
//! last column replaced by `(s_{k+1}, ..., s_{2k+1})`,
//!
//! ```text
//! q_{k+1} = Δ_k / D_k - Δ_{k-1} / D_{k-1}        (Δ_{-1} = 0, D_{-1} = 1)
//! b_k^2   = D_{k-2} D_k / D_{k-1}^2
//! ```
//!
//! All `D_k` and `Δ_k` come out of a single Gaussian elimination of the
//! rectangular Hankel array `(s_{i+j})`: after `k` elimination steps the
//! pivot is `D_k / D_{k-1}` and its right neighbour is `Δ_k / D_{k-1}`.

use std::cmp::Ordering;

use rug::{Float, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jacobi::{coefficient_agreement, JacobiMatrix};
use crate::num::{self, Field, PrecisionConfig, PrecisionJson};

/// Bits that must agree between the two precision runs before a result is
/// trusted.
pub const MIN_AGREEING_BITS: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub struct MomentSequence {
    values: Vec<Rational>,
    precision: PrecisionConfig,
}

impl MomentSequence {
    pub fn new(values: Vec<Rational>, precision: PrecisionConfig) -> Result<Self> {
        precision.validate()?;
        if values.is_empty() {
            return Err(Error::Malformed("moment sequence is empty".into()));
        }
        Ok(MomentSequence { values, precision })
    }

    pub fn from_floats(values: &[Float], precision: PrecisionConfig) -> Result<Self> {
        let values = values.iter().map(num::to_rational).collect::<Result<Vec<_>>>()?;
        Self::new(values, precision)
    }

    /// Parses decimal strings (or `p/q` fractions) exactly.
    pub fn from_strs<S: AsRef<str>>(values: &[S], precision: PrecisionConfig) -> Result<Self> {
        let values = values.iter().map(|s| num::parse_decimal(s.as_ref())).collect::<Result<Vec<_>>>()?;
        Self::new(values, precision)
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn precision(&self) -> &PrecisionConfig {
        &self.precision
    }

    pub fn with_precision(mut self, precision: PrecisionConfig) -> Self {
        self.precision = precision;
        self
    }

    /// True when `s_0 = 1`.
    pub fn is_normalized(&self) -> bool {
        self.values[0] == 1
    }

    /// Divides every moment by `s_0`.
    pub fn normalized(&self) -> Result<Self> {
        if self.values[0].cmp0() != Ordering::Greater {
            return Err(Error::ZeroMass);
        }
        let s0 = self.values[0].clone();
        let values = self.values.iter().map(|v| Rational::from(v / &s0)).collect();
        Ok(MomentSequence { values, precision: self.precision })
    }

    pub fn to_json(&self) -> MomentSequenceJson {
        MomentSequenceJson {
            values: self.values.iter().map(|v| num::format_rational(v, &self.precision)).collect(),
            precision: Some(self.precision.to_json()),
        }
    }

    pub fn from_json(json: &MomentSequenceJson) -> Result<Self> {
        let precision = match &json.precision {
            Some(p) => PrecisionConfig::from_json(p)?,
            None => PrecisionConfig::default(),
        };
        Self::from_strs(&json.values, precision)
    }
}

/// Wire form: `{"values": [decimal strings], "precision": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSequenceJson {
    pub values: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<PrecisionJson>,
}

/// Forward elimination of the Hankel array with rows `0..rows` and columns
/// `0..cols`. Returns the pivots `U[k][k]` and, where the array is wide
/// enough, `U[k][k+1]`. Stops at the first zero pivot.
struct HankelElimination<F> {
    pivots: Vec<F>,
    right: Vec<F>,
    zero_pivot: Option<usize>,
}

fn eliminate<F: Field>(s: &[F], rows: usize, cols: usize) -> HankelElimination<F> {
    let mut h: Vec<Vec<F>> = (0..rows).map(|i| (0..cols).map(|j| s[i + j].clone()).collect()).collect();
    let mut pivots = Vec::with_capacity(rows);
    let mut right = Vec::with_capacity(rows);
    for k in 0..rows {
        let pivot = h[k][k].clone();
        pivots.push(pivot.clone());
        if k + 1 < cols {
            right.push(h[k][k + 1].clone());
        }
        if pivot.is_zero() {
            return HankelElimination { pivots, right, zero_pivot: Some(k) };
        }
        for i in (k + 1)..rows {
            let factor = h[i][k].div(&pivot);
            if factor.is_zero() {
                continue;
            }
            for j in k..cols {
                let t = factor.mul(&h[k][j]);
                h[i][j] = h[i][j].sub(&t);
            }
        }
    }
    HankelElimination { pivots, right, zero_pivot: None }
}

/// Determinant with row pivoting (largest magnitude for floats, first
/// nonzero for rationals).
fn determinant<F: Field>(mut a: Vec<Vec<F>>, magnitude: impl Fn(&F) -> Float) -> F {
    let n = a.len();
    let mut det = a[0][0].one();
    for k in 0..n {
        let mut best = k;
        let mut best_mag = magnitude(&a[k][k]);
        for (i, row) in a.iter().enumerate().skip(k + 1) {
            let m = magnitude(&row[k]);
            if m > best_mag {
                best = i;
                best_mag = m;
            }
        }
        if a[best][k].is_zero() {
            return det.zero();
        }
        if best != k {
            a.swap(best, k);
            det = det.zero().sub(&det);
        }
        let pivot = a[k][k].clone();
        det = det.mul(&pivot);
        for i in (k + 1)..n {
            let factor = a[i][k].div(&pivot);
            for j in k..n {
                let t = factor.mul(&a[k][j]);
                a[i][j] = a[i][j].sub(&t);
            }
        }
    }
    det
}

fn determinants_in<F: Field>(s: &[F], k_max: usize, magnitude: impl Fn(&F) -> Float + Copy) -> Vec<F> {
    let elim = eliminate(s, k_max + 1, k_max + 1);
    let mut out = Vec::with_capacity(k_max + 1);
    let mut acc = s[0].one();
    for p in &elim.pivots {
        acc = acc.mul(p);
        out.push(acc.clone());
    }
    if let Some(k0) = elim.zero_pivot {
        for k in (k0 + 1)..=k_max {
            let m: Vec<Vec<F>> = (0..=k).map(|i| (0..=k).map(|j| s[i + j].clone()).collect()).collect();
            out.push(determinant(m, magnitude));
        }
    }
    out
}

fn check_length(s: &MomentSequence, needed: usize) -> Result<()> {
    if s.len() < needed {
        return Err(Error::InsufficientMoments { needed, available: s.len() });
    }
    Ok(())
}

/// `D_0, ..., D_{k_max}`, the leading principal minors of the Hankel matrix.
///
/// Exact in `ExactRational` mode. Otherwise the elimination runs with four
/// times the configured mantissa and the results are rounded back.
pub fn hankel_determinants(s: &MomentSequence, k_max: usize) -> Result<Vec<Rational>> {
    check_length(s, 2 * k_max + 1)?;
    let cfg = s.precision();
    if cfg.is_exact() {
        return Ok(determinants_in(&s.values()[..2 * k_max + 1], k_max, |x: &Rational| Float::with_val(64, x).abs()));
    }
    let bits = cfg.bits();
    let work = 4 * bits;
    let fs = num::floats(work, &s.values()[..2 * k_max + 1]);
    determinants_in(&fs, k_max, |x: &Float| x.clone().abs())
        .iter()
        .map(|d| num::to_rational(&Float::with_val(bits, d)))
        .collect()
}

/// True iff `D_k > 0` for every `k <= k_max`: exactly in `ExactRational`
/// mode, otherwise `D_k > abs_tol`.
pub fn validate_positive(s: &MomentSequence, k_max: usize) -> Result<bool> {
    let dets = hankel_determinants(s, k_max)?;
    let cfg = s.precision();
    let tol = Rational::from_f64(cfg.abs_tol).unwrap_or_default();
    Ok(dets.iter().all(|d| {
        if cfg.is_exact() {
            d.cmp0() == Ordering::Greater
        } else {
            d.cmp0() == Ordering::Greater && *d > tol
        }
    }))
}

/// Monic recurrence data `(q_1..q_n, b_1^2..b_{n-1}^2)` from the moments.
fn recurrence_from_moments<F: Field>(s: &[F], n: usize) -> Result<(Vec<F>, Vec<F>)> {
    // with 2n+1 moments the elimination also reaches D_n
    let rows = if s.len() > 2 * n { n + 1 } else { n };
    let elim = eliminate(s, rows, n + 1);
    for (k, p) in elim.pivots.iter().enumerate() {
        if p.sign() != Ordering::Greater {
            return Err(Error::DegenerateHankel { index: k });
        }
    }
    let mut q = Vec::with_capacity(n);
    let mut beta = Vec::with_capacity(n.saturating_sub(1));
    let mut prev_ratio = s[0].zero();
    for k in 0..n {
        let ratio = elim.right[k].div(&elim.pivots[k]);
        q.push(ratio.sub(&prev_ratio));
        prev_ratio = ratio;
        if k >= 1 {
            beta.push(elim.pivots[k].div(&elim.pivots[k - 1]));
        }
    }
    Ok((q, beta))
}

/// Jacobi matrix (`n` diagonal entries) of the measure with moments `s`.
///
/// Needs `s_0..s_{2n-1}`. When `s_{2n}` is also present the positivity of
/// `D_n` is checked as well, so finite-support inputs with exactly `n` atoms
/// are rejected.
pub fn moments_to_jacobi(s: &MomentSequence, n: usize) -> Result<JacobiMatrix> {
    if n == 0 {
        return Err(Error::Malformed("n must be positive".into()));
    }
    check_length(s, 2 * n)?;
    let cfg = *s.precision();
    let used = &s.values()[..s.len().min(2 * n + 1)];
    let bits = cfg.bits();
    if cfg.is_exact() {
        let (q, beta) = recurrence_from_moments(used, n)?;
        let b = beta.iter().map(|x| num::sqrt_rational(x, bits)).collect();
        return JacobiMatrix::new(q, b, cfg);
    }
    let run = |prec: u32| -> Result<(Vec<Float>, Vec<Float>)> {
        let fs = num::floats(prec, used);
        let (q, beta) = recurrence_from_moments(&fs, n)?;
        Ok((q, beta.into_iter().map(|x| x.sqrt()).collect()))
    };
    let (q_lo, b_lo) = run(bits)?;
    let (q_hi, b_hi) = run(2 * bits)?;
    let agree = coefficient_agreement(&q_lo, &b_lo, &q_hi, &b_hi);
    let worst = agree.iter().cloned().fold(f64::INFINITY, f64::min);
    if worst < MIN_AGREEING_BITS {
        return Err(Error::PrecisionLoss { agreeing_bits: worst, bits, doubled: 2 * bits });
    }
    let q = q_hi.iter().map(|x| num::to_rational(&Float::with_val(bits, x))).collect::<Result<Vec<_>>>()?;
    let b = b_hi.iter().map(|x| num::to_rational(&Float::with_val(bits, x))).collect::<Result<Vec<_>>>()?;
    JacobiMatrix::new(q, b, cfg)
}

/// Moments `s_0..s_m` of the spectral measure at the first basis vector,
/// `s_k = <δ_1, J^k δ_1>`.
///
/// Uses the similar nonsymmetric tridiagonal matrix with unit superdiagonal
/// and `b_k^2` on the subdiagonal, so only squares of the off-diagonal
/// entries enter and rational inputs give exact moments. A truncation with
/// `floor(m/2) + 1` diagonal entries already reproduces `s_0..s_m` exactly.
pub fn jacobi_to_moments(j: &JacobiMatrix, m: usize) -> Result<MomentSequence> {
    let size = m / 2 + 1;
    let cfg = *j.precision();
    let (q, b) = j.stored_or_generated(size, cfg.bits()).map_err(|e| match e {
        Error::CoefficientExhausted { requested, available } => {
            Error::Malformed(format!("{m} moments need {requested} diagonal entries, the matrix has {available}"))
        }
        other => other,
    })?;
    let beta: Vec<Rational> = b[..size - 1].iter().map(|x| Rational::from(x * x)).collect();
    let q = &q[..size];
    let values = if cfg.is_exact() {
        power_moments(q, &beta, m, &Rational::new())
    } else {
        let bits = cfg.bits();
        let fq = num::floats(bits, q);
        let fb = num::floats(bits, &beta);
        power_moments(&fq, &fb, m, &Float::new(bits)).iter().map(num::to_rational).collect::<Result<Vec<_>>>()?
    };
    MomentSequence::new(values, cfg)
}

fn power_moments<F: Field>(q: &[F], beta: &[F], m: usize, proto: &F) -> Vec<F> {
    let size = q.len();
    let mut v: Vec<F> = vec![proto.zero(); size];
    v[0] = proto.one();
    let mut out = vec![proto.one()];
    for _ in 0..m {
        let mut next = Vec::with_capacity(size);
        for r in 0..size {
            let mut acc = q[r].mul(&v[r]);
            if r > 0 {
                acc = acc.add(&beta[r - 1].mul(&v[r - 1]));
            }
            if r + 1 < size {
                acc = acc.add(&v[r + 1]);
            }
            next.push(acc);
        }
        v = next;
        out.push(v[0].clone());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| Rational::from(x)).collect()
    }

    fn exact(v: &[i64]) -> MomentSequence {
        MomentSequence::new(rat(v), PrecisionConfig::rational()).unwrap()
    }

    #[test]
    fn determinants_of_standard_normal_moments() {
        let s = exact(&[1, 0, 1, 0, 3]);
        assert_eq!(hankel_determinants(&s, 2).unwrap(), rat(&[1, 1, 2]));
        assert!(validate_positive(&s, 2).unwrap());
    }

    #[test]
    fn single_moment() {
        let s = exact(&[1]);
        assert_eq!(hankel_determinants(&s, 0).unwrap(), rat(&[1]));
        assert!(validate_positive(&s, 0).unwrap());
    }

    #[test]
    fn degenerate_sequence_is_not_positive() {
        let s = exact(&[1, 0, 0]);
        assert_eq!(hankel_determinants(&s, 1).unwrap(), rat(&[1, 0]));
        assert!(!validate_positive(&s, 1).unwrap());
    }

    #[test]
    fn determinants_continue_past_a_zero_pivot() {
        // D_1 = 0 but D_2 = det[[1,0,1],[0,0,1],[1,1,0]] = -1
        let s = exact(&[1, 0, 0, 1, 0]);
        assert_eq!(hankel_determinants(&s, 2).unwrap(), rat(&[1, 0, -1]));
        let f = s.clone().with_precision(PrecisionConfig::default());
        assert_eq!(hankel_determinants(&f, 2).unwrap(), rat(&[1, 0, -1]));
    }

    #[test]
    fn insufficient_moments() {
        let s = exact(&[1, 0, 1]);
        assert_eq!(hankel_determinants(&s, 2), Err(Error::InsufficientMoments { needed: 5, available: 3 }));
        assert!(matches!(moments_to_jacobi(&s, 2), Err(Error::InsufficientMoments { .. })));
    }

    #[test]
    fn standard_normal_recurrence_is_exact() {
        // weight exp(-t^2/2)/sqrt(2 pi): q_k = 0, b_k = sqrt(k)
        let s = exact(&[1, 0, 1, 0, 3, 0, 15]);
        let j = moments_to_jacobi(&s, 3).unwrap();
        assert!(j.q().iter().all(|x| *x == 0));
        assert_eq!(j.b()[0], 1);
        let b2 = Float::with_val(256, &j.b()[1]);
        assert!((b2.square() - 2u32).abs() < 1e-70);
    }

    #[test]
    fn half_variance_gaussian_recurrence() {
        // weight exp(-t^2)/sqrt(pi): moments (2m-1)!!/2^m, b_k = sqrt(k/2)
        let vals: Vec<Rational> =
            ["1", "0", "1/2", "0", "3/4", "0", "15/8"].iter().map(|s| num::parse_decimal(s).unwrap()).collect();
        let s = MomentSequence::new(vals, PrecisionConfig::rational()).unwrap();
        let j = moments_to_jacobi(&s, 3).unwrap();
        assert!(j.q().iter().all(|x| *x == 0));
        let half = Float::with_val(256, &j.b()[0]);
        assert!((half.square() - 0.5f64).abs() < 1e-70);
        assert_eq!(j.b()[1], 1);
    }

    #[test]
    fn first_coefficients_identities() {
        let s = MomentSequence::from_strs(&["1", "0.3", "2.5", "-1", "9"], PrecisionConfig::rational()).unwrap();
        let j = moments_to_jacobi(&s, 2).unwrap();
        assert_eq!(j.q()[0], num::parse_decimal("0.3").unwrap());
        let b1 = Float::with_val(256, &j.b()[0]);
        let expect = Float::with_val(256, 2.5f64) - Float::with_val(256, Float::parse("0.09").unwrap());
        assert!((b1.square() - expect).abs() < 1e-70);
    }

    #[test]
    fn two_atom_measure_is_degenerate() {
        let s = exact(&[1, 0, 1, 0, 1]);
        assert_eq!(moments_to_jacobi(&s, 2), Err(Error::DegenerateHankel { index: 2 }));
        let f = s.clone().with_precision(PrecisionConfig::default());
        assert_eq!(moments_to_jacobi(&f, 2), Err(Error::DegenerateHankel { index: 2 }));
        // with only s_0..s_3 the two-atom Jacobi matrix is well defined
        let short = exact(&[1, 0, 1, 0]);
        let j = moments_to_jacobi(&short, 2).unwrap();
        assert_eq!(j.b()[0], 1);
    }

    #[test]
    fn jacobi_to_moments_inverts_the_half_variance_gaussian() {
        let q = vec![Rational::new(); 3];
        let b = vec![num::sqrt_rational(&Rational::from((1, 2)), 256), Rational::from(1)];
        let j = JacobiMatrix::new(q, b, PrecisionConfig::default()).unwrap();
        let s = jacobi_to_moments(&j, 4).unwrap();
        let expect = [1.0, 0.0, 0.5, 0.0, 0.75];
        for (v, e) in s.values().iter().zip(expect) {
            assert!(Float::with_val(256, Float::with_val(256, v) - e).abs() < 1e-60);
        }
    }

    #[test]
    fn jacobi_to_moments_bandedness_bound() {
        let j = JacobiMatrix::new(vec![Rational::from(3)], vec![], PrecisionConfig::rational()).unwrap();
        assert_eq!(jacobi_to_moments(&j, 0).unwrap().values(), &rat(&[1])[..]);
        assert_eq!(jacobi_to_moments(&j, 1).unwrap().values(), &rat(&[1, 3])[..]);
        assert!(matches!(jacobi_to_moments(&j, 2), Err(Error::Malformed(_))));
    }

    #[test]
    fn exact_round_trip_with_rational_entries() {
        let q = rat(&[1, -2, 0, 3]);
        let b = vec![Rational::from((1, 2)), Rational::from(2), Rational::from((3, 7))];
        let j = JacobiMatrix::new(q.clone(), b.clone(), PrecisionConfig::rational()).unwrap();
        let s = jacobi_to_moments(&j, 7).unwrap();
        let back = moments_to_jacobi(&s, 4).unwrap();
        assert_eq!(back.q(), &q[..]);
        assert_eq!(back.b(), &b[..]);
    }
}
