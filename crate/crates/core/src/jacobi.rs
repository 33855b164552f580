//! Jacobi matrices, polynomials of the first kind, Weyl circle radii and the
//! limit point / limit circle classifier.

use std::cmp::Ordering;
use std::fmt;

use rug::{Complex, Float, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Vectors};
use crate::measures::Measure;
use crate::moments::{self, MomentSequence};
use crate::num::{self, PrecisionConfig, PrecisionJson};

/// Precision used to generate the lognormal family, whatever the caller asks
/// for below it.
pub const LOGNORMAL_MIN_BITS: u32 = 512;

/// Upper bound on the precision growth of the π recurrence.
const MAX_PRECISION_DOUBLINGS: u32 = 4;

/// Closed-form or moment-generated families that can supply any number of
/// coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// `q_k = 0`, `b_k = sqrt(k/2)`: orthonormal polynomials of `exp(-t^2)`.
    HermiteLike,
    /// Coefficients of the moment sequence `s_k = exp(k^2/2)` (the lognormal
    /// distribution), obtained through the determinantal formulae.
    Lognormal,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::HermiteLike => "hermite_like",
            Family::Lognormal => "lognormal",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "hermite_like" => Ok(Family::HermiteLike),
            "lognormal" => Ok(Family::Lognormal),
            other => Err(Error::Malformed(format!("unknown family {other:?} (known: hermite_like, lognormal)"))),
        }
    }

    /// First `n` diagonal and `n - 1` off-diagonal entries.
    pub fn coefficients(&self, n: usize, bits: u32) -> Result<(Vec<Rational>, Vec<Rational>)> {
        match self {
            Family::HermiteLike => {
                let q = vec![Rational::new(); n];
                let b = (1..n).map(|k| num::sqrt_rational(&Rational::from((k as u64, 2u64)), bits)).collect();
                Ok((q, b))
            }
            Family::Lognormal => {
                let bits = bits.max(LOGNORMAL_MIN_BITS);
                let s = lognormal_moments(2 * n, bits)?;
                let j = moments::moments_to_jacobi(&s, n)?;
                Ok((j.q().to_vec(), j.b().to_vec()))
            }
        }
    }
}

/// `s_k = exp(k^2/2)` for `k = 0..=max_order`, rounded to `bits`.
pub fn lognormal_moments(max_order: usize, bits: u32) -> Result<MomentSequence> {
    let values = (0..=max_order)
        .map(|k| {
            let e = Float::with_val(bits, (k * k) as u64) / 2u32;
            num::to_rational(&e.exp())
        })
        .collect::<Result<Vec<_>>>()?;
    MomentSequence::new(values, PrecisionConfig::bigfloat(bits)?)
}

#[derive(Clone, PartialEq)]
pub struct JacobiMatrix {
    q: Vec<Rational>,
    b: Vec<Rational>,
    family: Option<Family>,
    precision: PrecisionConfig,
}

impl fmt::Debug for JacobiMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |v: &[Rational]| -> Vec<f64> { v.iter().map(|x| x.to_f64()).collect() };
        f.debug_struct("JacobiMatrix")
            .field("q", &show(&self.q))
            .field("b", &show(&self.b))
            .field("family", &self.family)
            .finish()
    }
}

impl JacobiMatrix {
    /// Stored truncation: `b.len() == q.len() - 1`, every `b_k > 0`.
    pub fn new(q: Vec<Rational>, b: Vec<Rational>, precision: PrecisionConfig) -> Result<Self> {
        precision.validate()?;
        if q.is_empty() {
            return Err(Error::Malformed("Jacobi matrix needs at least one diagonal entry".into()));
        }
        if b.len() + 1 != q.len() {
            return Err(Error::Malformed(format!(
                "expected {} off-diagonal entries for {} diagonal entries, got {}",
                q.len() - 1,
                q.len(),
                b.len()
            )));
        }
        if let Some(k) = b.iter().position(|x| x.cmp0() != Ordering::Greater) {
            return Err(Error::Malformed(format!("off-diagonal entry b_{} is not positive", k + 1)));
        }
        Ok(JacobiMatrix { q, b, family: None, precision })
    }

    pub fn from_floats(q: &[Float], b: &[Float], precision: PrecisionConfig) -> Result<Self> {
        let q = q.iter().map(num::to_rational).collect::<Result<Vec<_>>>()?;
        let b = b.iter().map(num::to_rational).collect::<Result<Vec<_>>>()?;
        Self::new(q, b, precision)
    }

    /// Matrix backed by a generator; no entries are stored up front.
    pub fn from_family(family: Family, precision: PrecisionConfig) -> Self {
        JacobiMatrix { q: Vec::new(), b: Vec::new(), family: Some(family), precision }
    }

    /// Stored truncation of a family with `n` diagonal entries.
    pub fn family_truncation(family: Family, n: usize, precision: PrecisionConfig) -> Result<Self> {
        let (q, b) = family.coefficients(n, precision.bits())?;
        let mut j = Self::new(q, b, precision)?;
        j.family = Some(family);
        Ok(j)
    }

    pub fn q(&self) -> &[Rational] {
        &self.q
    }

    pub fn b(&self) -> &[Rational] {
        &self.b
    }

    pub fn family(&self) -> Option<Family> {
        self.family
    }

    /// Number of stored diagonal entries.
    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    pub fn precision(&self) -> &PrecisionConfig {
        &self.precision
    }

    pub fn with_precision(mut self, precision: PrecisionConfig) -> Self {
        self.precision = precision;
        self
    }

    /// True when any number of coefficients can be produced.
    pub fn is_unbounded(&self) -> bool {
        self.family.is_some()
    }

    /// First `n` diagonal and `n - 1` off-diagonal entries, from storage when
    /// possible and otherwise from the generating family.
    pub fn stored_or_generated(&self, n: usize, bits: u32) -> Result<(Vec<Rational>, Vec<Rational>)> {
        if n == 0 {
            return Err(Error::Malformed("at least one coefficient must be requested".into()));
        }
        if n <= self.q.len() {
            return Ok((self.q[..n].to_vec(), self.b[..n - 1].to_vec()));
        }
        match self.family {
            Some(f) => f.coefficients(n, bits),
            None => Err(Error::CoefficientExhausted { requested: n, available: self.q.len() }),
        }
    }

    fn float_coefficients(&self, n: usize, bits: u32) -> Result<(Vec<Float>, Vec<Float>)> {
        let (q, b) = self.stored_or_generated(n, bits)?;
        Ok((num::floats(bits, &q), num::floats(bits, &b)))
    }

    /// Leading `n x n` block as a stored matrix.
    pub fn truncated(&self, n: usize) -> Result<Self> {
        let (q, b) = self.stored_or_generated(n, self.precision.bits())?;
        let mut j = Self::new(q, b, self.precision)?;
        j.family = self.family;
        Ok(j)
    }

    pub fn to_json(&self) -> JacobiMatrixJson {
        JacobiMatrixJson {
            q: self.q.iter().map(|x| num::format_rational(x, &self.precision)).collect(),
            b: self.b.iter().map(|x| num::format_rational(x, &self.precision)).collect(),
            family: self.family.map(|f| f.name().to_string()),
            precision: Some(self.precision.to_json()),
        }
    }

    /// Builds from the wire form. A `family` with no entries gives a
    /// generator-backed matrix; with entries, the entries are used as stored
    /// and the family only extends them.
    pub fn from_json(json: &JacobiMatrixJson, fallback: PrecisionConfig) -> Result<Self> {
        let precision = match &json.precision {
            Some(p) => PrecisionConfig::from_json(p)?,
            None => fallback,
        };
        let family = json.family.as_deref().map(Family::from_name).transpose()?;
        if json.q.is_empty() && json.b.is_empty() {
            return match family {
                Some(f) => Ok(Self::from_family(f, precision)),
                None => Err(Error::Malformed("Jacobi matrix has neither entries nor family".into())),
            };
        }
        let q = json.q.iter().map(|s| num::parse_decimal(s)).collect::<Result<Vec<_>>>()?;
        let b = json.b.iter().map(|s| num::parse_decimal(s)).collect::<Result<Vec<_>>>()?;
        let mut j = Self::new(q, b, precision)?;
        j.family = family;
        Ok(j)
    }
}

/// Wire form: `{"q": [...], "b": [...], "family": "hermite_like" | "lognormal"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JacobiMatrixJson {
    #[serde(default)]
    pub q: Vec<String>,
    #[serde(default)]
    pub b: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<PrecisionJson>,
}

/// Per-entry agreement (in bits) between two computations of the same
/// coefficients, each entry measured against the size of its row
/// (`max(|q_k|, b_{k-1}, b_k)`), so entries that vanish in exact arithmetic
/// do not read as disagreements.
pub(crate) fn coefficient_agreement(q_lo: &[Float], b_lo: &[Float], q_hi: &[Float], b_hi: &[Float]) -> Vec<f64> {
    let (q_bits, b_bits) = coefficient_agreement_split(q_lo, b_lo, q_hi, b_hi);
    q_bits.into_iter().chain(b_bits).collect()
}

pub(crate) fn coefficient_agreement_split(
    q_lo: &[Float],
    b_lo: &[Float],
    q_hi: &[Float],
    b_hi: &[Float],
) -> (Vec<f64>, Vec<f64>) {
    let n = q_hi.len();
    let prec = q_hi.first().map(|x| x.prec()).unwrap_or(64);
    let row_scale = |k: usize| -> Float {
        let mut s = Float::with_val(prec, q_hi[k].abs_ref());
        if k > 0 && k - 1 < b_hi.len() {
            s = s.max(&Float::with_val(prec, b_hi[k - 1].abs_ref()));
        }
        if k < b_hi.len() {
            s = s.max(&Float::with_val(prec, b_hi[k].abs_ref()));
        }
        s
    };
    let q_bits = (0..n).map(|k| num::agreeing_bits(&q_lo[k], &q_hi[k], &row_scale(k))).collect();
    let b_bits = (0..b_hi.len())
        .map(|k| {
            let scale = row_scale(k).max(&row_scale(k + 1));
            num::agreeing_bits(&b_lo[k], &b_hi[k], &scale)
        })
        .collect();
    (q_bits, b_bits)
}

/// Longest prefix length `L` such that `q_0..q_{L-1}` and `b_0..b_{L-2}` all
/// reach `threshold` agreeing bits.
pub(crate) fn resolved_prefix(q_bits: &[f64], b_bits: &[f64], threshold: f64) -> usize {
    let mut len = 0;
    for k in 0..q_bits.len() {
        if q_bits[k] < threshold {
            break;
        }
        if k > 0 && b_bits[k - 1] < threshold {
            break;
        }
        len = k + 1;
    }
    len
}

enum PiFailure {
    NeedsPrecision,
    Fatal(Error),
}

impl From<Error> for PiFailure {
    fn from(e: Error) -> Self {
        PiFailure::Fatal(e)
    }
}

/// Incremental evaluation of `π_1(z), π_2(z), ...` with the running sum
/// `Σ |π_k|^2`.
struct PiRecurrence {
    prec: u32,
    z: Complex,
    monitor: bool,
    prev: Complex,
    cur: Complex,
    /// index of `cur` (1-based)
    k: usize,
    sum: Float,
}

impl PiRecurrence {
    fn new(z: &Complex, prec: u32) -> Self {
        let one = Complex::with_val(prec, (1, 0));
        PiRecurrence {
            prec,
            z: Complex::with_val(prec, z),
            monitor: !z.imag().is_zero(),
            prev: Complex::new(prec),
            cur: one,
            k: 1,
            sum: Float::with_val(prec, 1),
        }
    }

    /// Advances to `π_{k+1}` using `q_k`, `b_{k-1}`, `b_k` (1-based).
    fn step(&mut self, q: &[Float], b: &[Float]) -> Result<(), PiFailure> {
        let p = self.prec;
        let k = self.k;
        let shifted = Complex::with_val(p, &self.z - &q[k - 1]);
        let t1 = Complex::with_val(p, &shifted * &self.cur);
        let mut r = t1.clone();
        let mut t2_norm = Float::new(p);
        if k >= 2 {
            let t2 = Complex::with_val(p, &self.prev * &b[k - 2]);
            t2_norm = Float::with_val(p, t2.norm_ref());
            r -= &t2;
        }
        if self.monitor {
            // bits lost to cancellation in this step
            let big = Float::with_val(p, t1.norm_ref()).max(&t2_norm);
            let res = Float::with_val(p, r.norm_ref());
            if res.is_zero() {
                if !big.is_zero() {
                    return Err(PiFailure::NeedsPrecision);
                }
            } else {
                let lost = Float::with_val(p, &big / &res).log2().to_f64() / 2.0;
                if lost > f64::from(p) / 2.0 {
                    return Err(PiFailure::NeedsPrecision);
                }
            }
        }
        let next = Complex::with_val(p, &r / &b[k - 1]);
        self.sum += Float::with_val(p, next.norm_ref());
        self.prev = std::mem::replace(&mut self.cur, next);
        self.k += 1;
        if !self.sum.is_finite() {
            return Err(PiFailure::Fatal(Error::NonFinite("Σ|π_k|² overflowed".into())));
        }
        Ok(())
    }
}

fn run_with_doubling<T>(bits: u32, mut f: impl FnMut(u32) -> Result<T, PiFailure>) -> Result<T> {
    let mut prec = bits;
    for _ in 0..=MAX_PRECISION_DOUBLINGS {
        match f(prec) {
            Ok(v) => return Ok(v),
            Err(PiFailure::Fatal(e)) => return Err(e),
            Err(PiFailure::NeedsPrecision) => prec *= 2,
        }
    }
    Err(Error::PrecisionLoss { agreeing_bits: 0.0, bits: prec / 2, doubled: prec })
}

/// `π_1(z), ..., π_n(z)`: the solution of the difference equation with
/// `π_1 = 1`, `π_{k+1} = ((z - q_k) π_k - b_{k-1} π_{k-1}) / b_k`.
pub fn pi_eval(j: &JacobiMatrix, z: &Complex, n: usize) -> Result<Vec<Complex>> {
    if n == 0 {
        return Err(Error::Malformed("n must be positive".into()));
    }
    let bits = j.precision().bits().max(z.prec().0);
    run_with_doubling(bits, |prec| {
        let (q, b) = j.float_coefficients(n, prec)?;
        let mut rec = PiRecurrence::new(z, prec);
        let mut out = vec![rec.cur.clone()];
        while rec.k < n {
            rec.step(&q, &b)?;
            out.push(rec.cur.clone());
        }
        Ok(out)
    })
}

fn check_nonreal(z: &Complex) -> Result<()> {
    if z.imag().is_zero() {
        return Err(Error::RealPoint);
    }
    Ok(())
}

fn radius(z: &Complex, sum: &Float) -> Float {
    let p = sum.prec();
    let width = Float::with_val(p, z.imag().abs_ref()) * 2u32;
    Float::with_val(p, &width * sum).recip()
}

/// Radius of the `n`-th Weyl circle at `z`: `(|z - z̄| Σ_{k<=n} |π_k(z)|^2)^{-1}`.
pub fn weyl_radius(j: &JacobiMatrix, z: &Complex, n: usize) -> Result<Float> {
    Ok(weyl_radii(j, z, &[n])?.pop().expect("one radius"))
}

/// Weyl radii at each of the (increasing) orders in `orders`.
pub fn weyl_radii(j: &JacobiMatrix, z: &Complex, orders: &[usize]) -> Result<Vec<Float>> {
    check_nonreal(z)?;
    if orders.is_empty() || orders[0] == 0 || orders.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Malformed("orders must be positive and strictly increasing".into()));
    }
    let n = *orders.last().unwrap();
    let bits = j.precision().bits().max(z.prec().0);
    let out = run_with_doubling(bits, |prec| {
        let (q, b) = j.float_coefficients(n, prec)?;
        let mut rec = PiRecurrence::new(z, prec);
        let mut out = Vec::with_capacity(orders.len());
        for &c in orders {
            while rec.k < c {
                rec.step(&q, &b)?;
            }
            out.push(radius(&rec.z, &rec.sum));
        }
        Ok(out)
    })?;
    Ok(out.into_iter().map(|r| Float::with_val(bits, r)).collect())
}

/// `a+bi` with both parts written exactly.
pub fn format_point(z: &(Rational, Rational)) -> String {
    let sign = if z.1.cmp0() == Ordering::Less { "-" } else { "+" };
    format!("{}{}{}i", num::format_exact(&z.0), sign, num::format_exact(&Rational::from(z.1.abs_ref())))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifyPolicy {
    /// Evaluation point (real, imaginary).
    pub z: (Rational, Rational),
    pub n_max: usize,
    pub eps_zero: f64,
    pub eps_stable: f64,
    /// Number of trailing checkpoints compared for stabilization.
    pub window: usize,
    pub first_checkpoint: usize,
}

impl Default for ClassifyPolicy {
    fn default() -> Self {
        ClassifyPolicy {
            z: (Rational::new(), Rational::from(1)),
            n_max: 100_000,
            eps_zero: 1e-3,
            eps_stable: 1e-6,
            window: 3,
            first_checkpoint: 8,
        }
    }
}

impl ClassifyPolicy {
    pub fn with_n_max(mut self, n_max: usize) -> Self {
        self.n_max = n_max;
        self
    }

    pub fn with_z(mut self, re: Rational, im: Rational) -> Self {
        self.z = (re, im);
        self
    }

    /// Geometric checkpoints `c, 2c, 4c, ...` below `n_max`, then `n_max`.
    pub fn checkpoints(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut c = self.first_checkpoint.max(1);
        while c < self.n_max {
            out.push(c);
            c *= 2;
        }
        out.push(self.n_max);
        out
    }

    fn validate(&self) -> Result<()> {
        if self.n_max == 0 {
            return Err(Error::Malformed("n_max must be positive".into()));
        }
        if self.window < 2 {
            return Err(Error::Malformed("window must be at least 2".into()));
        }
        if !(self.eps_zero > 0.0 && self.eps_stable > 0.0) {
            return Err(Error::Malformed("thresholds must be positive".into()));
        }
        if self.z.1 == 0 {
            return Err(Error::RealPoint);
        }
        Ok(())
    }

    pub fn to_json(&self) -> PolicyJson {
        PolicyJson {
            z: Some(format_point(&self.z)),
            n_max: Some(self.n_max),
            eps_zero: Some(format!("{:e}", self.eps_zero)),
            eps_stable: Some(format!("{:e}", self.eps_stable)),
            window: Some(self.window),
        }
    }

    pub fn from_json(json: &PolicyJson) -> Result<Self> {
        let mut p = ClassifyPolicy::default();
        if let Some(z) = &json.z {
            p.z = num::parse_complex(z)?;
        }
        if let Some(n) = json.n_max {
            p.n_max = n;
        }
        let parse = |s: &str| -> Result<f64> {
            s.trim().parse::<f64>().map_err(|_| Error::Malformed(format!("bad threshold {s:?}")))
        };
        if let Some(e) = &json.eps_zero {
            p.eps_zero = parse(e)?;
        }
        if let Some(e) = &json.eps_stable {
            p.eps_stable = parse(e)?;
        }
        if let Some(w) = json.window {
            p.window = w;
        }
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PolicyJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_zero: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_stable: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Determinate,
    Indeterminate,
    Inconclusive,
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Determinate => "determinate",
            Verdict::Indeterminate => "indeterminate",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeterminacyVerdict {
    pub verdict: Verdict,
    /// Orders at which radii were recorded.
    pub checkpoints: Vec<usize>,
    /// `r_n` at each checkpoint; non-increasing.
    pub radii: Vec<Float>,
    pub n_used: usize,
    pub z_used: (Rational, Rational),
}

impl DeterminacyVerdict {
    pub fn to_json(&self) -> VerdictJson {
        VerdictJson {
            verdict: self.verdict.name().to_string(),
            checkpoints: self.checkpoints.clone(),
            radii: self.radii.iter().map(num::format_float).collect(),
            n_used: self.n_used,
            z: format_point(&self.z_used),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictJson {
    pub verdict: String,
    pub checkpoints: Vec<usize>,
    pub radii: Vec<String>,
    pub n_used: usize,
    pub z: String,
}

/// Limit point (determinate) / limit circle (indeterminate) decision from
/// the Weyl radii at the policy's checkpoints.
///
/// Determinate as soon as a radius drops below `eps_zero`. Otherwise, after
/// the last checkpoint, Indeterminate when the trailing `window` radii vary
/// by less than `eps_stable` relative to the last one. Anything else is
/// Inconclusive.
pub fn classify(j: &JacobiMatrix, policy: &ClassifyPolicy) -> Result<DeterminacyVerdict> {
    policy.validate()?;
    if !j.is_unbounded() && j.len() < policy.n_max {
        return Err(Error::CoefficientExhausted { requested: policy.n_max, available: j.len() });
    }
    let bits = j.precision().bits();
    let z = num::complex(bits, &policy.z.0, &policy.z.1);
    let schedule = policy.checkpoints();
    let eps_zero = policy.eps_zero;

    let (checkpoints, radii) = run_with_doubling(bits, |prec| {
        let mut rec = PiRecurrence::new(&z, prec);
        let mut reached = Vec::new();
        let mut radii = Vec::new();
        let mut have = 0usize;
        let (mut q, mut b) = (Vec::new(), Vec::new());
        for &c in &schedule {
            if c > have {
                let (nq, nb) = j.float_coefficients(c, prec)?;
                q = nq;
                b = nb;
                have = c;
            }
            while rec.k < c {
                rec.step(&q, &b)?;
            }
            let r = radius(&rec.z, &rec.sum);
            let done = r < eps_zero;
            reached.push(c);
            radii.push(r);
            if done {
                break;
            }
        }
        Ok((reached, radii))
    })?;

    let last = radii.last().expect("at least one checkpoint");
    let verdict = if *last < policy.eps_zero {
        Verdict::Determinate
    } else if radii.len() >= policy.window {
        let tail = &radii[radii.len() - policy.window..];
        let hi = tail.iter().fold(tail[0].clone(), |m, x| m.max(x));
        let lo = tail.iter().fold(tail[0].clone(), |m, x| m.min(x));
        let rel = Float::with_val(bits, &hi - &lo) / &lo;
        if rel < policy.eps_stable {
            Verdict::Indeterminate
        } else {
            Verdict::Inconclusive
        }
    } else {
        Verdict::Inconclusive
    };
    Ok(DeterminacyVerdict {
        verdict,
        n_used: *checkpoints.last().unwrap(),
        checkpoints,
        radii: radii.into_iter().map(|r| Float::with_val(bits, r)).collect(),
        z_used: policy.z.clone(),
    })
}

/// Gauss quadrature measure of the `n x n` truncation: atoms at the
/// eigenvalues, weights equal to the squared first components of the
/// normalized eigenvectors. Its moments of order `<= 2n - 1` coincide with
/// those of the matrix.
///
/// For a matrix in the limit circle case this is the finite proxy used in
/// place of an extremal (von Neumann) solution.
pub fn truncation_spectrum(j: &JacobiMatrix, n: usize) -> Result<Measure> {
    let bits = j.precision().bits();
    let (q, b) = j.float_coefficients(n, bits)?;
    let eig = linalg::tridiagonal_eigen(&q, &b, bits, Vectors::FirstComponents)?;
    let weights: Vec<Float> = eig.first.iter().map(|x| Float::with_val(bits, x.square_ref())).collect();
    if eig.values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::NonFinite("eigenvalues not separated at working precision".into()));
    }
    if weights.iter().any(|w| w.is_zero()) {
        return Err(Error::NonFinite("zero quadrature weight at working precision".into()));
    }
    Measure::atomic_floats(&eig.values, &weights, *j.precision())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::ops::Pow;

    fn cfg() -> PrecisionConfig {
        PrecisionConfig::default()
    }

    fn zc(re: f64, im: f64) -> Complex {
        Complex::with_val(256, (re, im))
    }

    #[test]
    fn pi_first_term_is_one() {
        let j = JacobiMatrix::from_family(Family::HermiteLike, cfg());
        let p = pi_eval(&j, &zc(0.3, 1.0), 1).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p[0], Complex::with_val(256, (1, 0)));
    }

    #[test]
    fn pi_vanishes_at_first_diagonal_entry() {
        let j = JacobiMatrix::new(vec![Rational::from(5), Rational::new()], vec![Rational::from(3)], cfg()).unwrap();
        let p = pi_eval(&j, &zc(5.0, 0.0), 2).unwrap();
        assert!(p[1].is_zero());
    }

    #[test]
    fn pi_second_term_and_conjugate() {
        let j = JacobiMatrix::new(vec![Rational::from(1), Rational::new()], vec![Rational::from(2)], cfg()).unwrap();
        let p = pi_eval(&j, &zc(0.0, 1.0), 2).unwrap();
        assert_eq!(p[1], Complex::with_val(256, (-0.5, 0.5)));
        let pc = pi_eval(&j, &zc(0.0, -1.0), 2).unwrap();
        assert_eq!(pc[1], Complex::with_val(256, (-0.5, -0.5)));
    }

    #[test]
    fn pi_needs_enough_coefficients() {
        let j = JacobiMatrix::new(vec![Rational::new(); 3], vec![Rational::from(1); 2], cfg()).unwrap();
        assert!(pi_eval(&j, &zc(0.0, 1.0), 3).is_ok());
        assert_eq!(
            pi_eval(&j, &zc(0.0, 1.0), 4).unwrap_err(),
            Error::CoefficientExhausted { requested: 4, available: 3 }
        );
    }

    #[test]
    fn first_radius_is_one_over_two_im() {
        let j = JacobiMatrix::from_family(Family::HermiteLike, cfg());
        assert_eq!(weyl_radius(&j, &zc(0.0, 1.0), 1).unwrap(), 0.5);
        assert_eq!(weyl_radius(&j, &zc(3.0, 2.0), 1).unwrap(), 0.25);
        assert_eq!(weyl_radius(&j, &zc(1.0, 0.0), 1).unwrap_err(), Error::RealPoint);
    }

    #[test]
    fn hermite_radii_decrease() {
        let j = JacobiMatrix::from_family(Family::HermiteLike, cfg());
        let orders: Vec<usize> = (1..=200).collect();
        let r = weyl_radii(&j, &zc(0.0, 1.0), &orders).unwrap();
        assert!(r.windows(2).all(|w| w[1] < w[0]));
        assert!(r[199] < r[49]);
    }

    #[test]
    fn checkpoint_schedule() {
        let p = ClassifyPolicy::default().with_n_max(60);
        assert_eq!(p.checkpoints(), vec![8, 16, 32, 60]);
        let p = ClassifyPolicy::default().with_n_max(64);
        assert_eq!(p.checkpoints(), vec![8, 16, 32, 64]);
        let p = ClassifyPolicy::default().with_n_max(5);
        assert_eq!(p.checkpoints(), vec![5]);
    }

    #[test]
    fn classify_rejects_short_matrices() {
        let j = JacobiMatrix::new(vec![Rational::new(); 5], vec![Rational::from(1); 4], cfg()).unwrap();
        let policy = ClassifyPolicy::default().with_n_max(10_000);
        assert_eq!(classify(&j, &policy).unwrap_err(), Error::CoefficientExhausted { requested: 10_000, available: 5 });
    }

    #[test]
    fn classify_hermite_determinate() {
        let j = JacobiMatrix::from_family(Family::HermiteLike, cfg());
        let v = classify(&j, &ClassifyPolicy::default()).unwrap();
        assert_eq!(v.verdict, Verdict::Determinate);
        assert!(v.radii.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn spectrum_of_small_matrices() {
        let one = JacobiMatrix::new(vec![Rational::from(7)], vec![], cfg()).unwrap();
        let m = truncation_spectrum(&one, 1).unwrap();
        let atoms = m.atoms().unwrap();
        assert_eq!(atoms.0, vec![Rational::from(7)]);
        assert_eq!(atoms.1, vec![Rational::from(1)]);

        let two = JacobiMatrix::new(vec![Rational::new(); 2], vec![Rational::from(1)], cfg()).unwrap();
        let m = truncation_spectrum(&two, 2).unwrap();
        let (pts, wts) = m.atoms().unwrap();
        assert!((Float::with_val(256, &pts[0]) + 1u32).abs() < 1e-70);
        assert!((Float::with_val(256, &pts[1]) - 1u32).abs() < 1e-70);
        for w in wts {
            assert!((Float::with_val(256, w) - 0.5f64).abs() < 1e-70);
        }
    }

    #[test]
    fn lognormal_closed_form() {
        // q_{k+1} = e^{k-1/2}(e^{k+1}+e^k-1), b_k^2 = e^{3k-2}(e^k-1)
        let bits = 512;
        let (q, b) = Family::Lognormal.coefficients(12, bits).unwrap();
        let e = Float::with_val(bits, 1).exp();
        for (k, qk) in q.iter().enumerate() {
            let ek = e.clone().pow(k as u32);
            let expect = Float::with_val(bits, Float::with_val(bits, k as f64 - 0.5).exp())
                * (Float::with_val(bits, &ek * &e) + &ek - 1u32);
            let got = Float::with_val(bits, qk);
            assert!(((got - &expect) / &expect).abs() < 1e-140, "q_{}", k + 1);
        }
        for (i, bk) in b.iter().enumerate() {
            let k = (i + 1) as u32;
            let expect =
                Float::with_val(bits, Float::with_val(bits, 3 * k as i32 - 2).exp()) * (e.clone().pow(k) - 1u32);
            let got = Float::with_val(bits, bk).square();
            assert!(((got - &expect) / &expect).abs() < 1e-140, "b_{k}");
        }
    }
}
