//! Numeric plumbing: precision configuration, decimal-string conversion and
//! the small field abstraction shared by the elimination and recurrence
//! kernels.
//!
//! Stored quantities (moments, recurrence coefficients, atoms, weights) are
//! kept as [`Rational`]s. Values that came out of a floating-point
//! computation are dyadic rationals, so nothing is lost by storing them this
//! way, and values that were entered as decimals stay exact for the
//! `ExactRational` arithmetic mode.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rug::ops::Pow;
use rug::{Complex, Float, Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default mantissa size for big-float work.
pub const DEFAULT_BITS: u32 = 256;

/// Arithmetic used by an operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Exact rational arithmetic; irrational outputs (square roots,
    /// exponentials) are rounded to `output_bits`.
    ExactRational { output_bits: u32 },
    /// MPFR floats with the given mantissa size (at least 53 bits).
    BigFloat { mantissa_bits: u32 },
    /// 53-bit mantissa.
    Double,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrecisionConfig {
    pub mode: Mode,
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl Default for PrecisionConfig {
    fn default() -> Self {
        PrecisionConfig { mode: Mode::BigFloat { mantissa_bits: DEFAULT_BITS }, abs_tol: 1e-30, rel_tol: 1e-10 }
    }
}

impl PrecisionConfig {
    pub fn bigfloat(bits: u32) -> Result<Self> {
        if bits < 53 {
            return Err(Error::Malformed(format!("mantissa_bits must be at least 53, got {bits}")));
        }
        Ok(PrecisionConfig { mode: Mode::BigFloat { mantissa_bits: bits }, ..Default::default() })
    }

    pub fn rational() -> Self {
        PrecisionConfig { mode: Mode::ExactRational { output_bits: DEFAULT_BITS }, ..Default::default() }
    }

    pub fn double() -> Self {
        PrecisionConfig { mode: Mode::Double, abs_tol: 1e-12, rel_tol: 1e-8 }
    }

    pub fn with_tolerances(mut self, abs_tol: f64, rel_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self.rel_tol = rel_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if let Mode::BigFloat { mantissa_bits } = self.mode {
            if mantissa_bits < 53 {
                return Err(Error::Malformed(format!("mantissa_bits must be at least 53, got {mantissa_bits}")));
            }
        }
        if !(self.abs_tol >= 0.0 && self.rel_tol >= 0.0) {
            return Err(Error::Malformed("tolerances must be nonnegative".into()));
        }
        Ok(())
    }

    /// Mantissa size used for floating-point work (and for rounding the
    /// irrational outputs of exact computations).
    pub fn bits(&self) -> u32 {
        match self.mode {
            Mode::ExactRational { output_bits } => output_bits,
            Mode::BigFloat { mantissa_bits } => mantissa_bits,
            Mode::Double => 53,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.mode, Mode::ExactRational { .. })
    }

    /// Same mode family with a different mantissa size.
    pub fn with_bits(mut self, bits: u32) -> Self {
        self.mode = match self.mode {
            Mode::ExactRational { .. } => Mode::ExactRational { output_bits: bits },
            Mode::BigFloat { .. } | Mode::Double => Mode::BigFloat { mantissa_bits: bits.max(53) },
        };
        self
    }

    pub fn mode_name(&self) -> &'static str {
        match self.mode {
            Mode::ExactRational { .. } => "rational",
            Mode::BigFloat { .. } => "bigfloat",
            Mode::Double => "double",
        }
    }

    pub fn to_json(&self) -> PrecisionJson {
        PrecisionJson {
            mode: self.mode_name().to_string(),
            bits: Some(self.bits()),
            abs_tol: Some(format!("{:e}", self.abs_tol)),
            rel_tol: Some(format!("{:e}", self.rel_tol)),
        }
    }

    pub fn from_json(json: &PrecisionJson) -> Result<Self> {
        let bits = json.bits.unwrap_or(DEFAULT_BITS);
        let mut cfg = match json.mode.as_str() {
            "rational" => PrecisionConfig::rational().with_bits(bits),
            "bigfloat" => PrecisionConfig::bigfloat(bits)?,
            "double" => PrecisionConfig::double(),
            other => return Err(Error::Malformed(format!("unknown precision mode {other:?}"))),
        };
        if let Some(t) = &json.abs_tol {
            cfg.abs_tol = parse_tolerance(t)?;
        }
        if let Some(t) = &json.rel_tol {
            cfg.rel_tol = parse_tolerance(t)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Wire form of [`PrecisionConfig`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrecisionJson {
    pub mode: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bits: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abs_tol: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<String>,
}

fn parse_tolerance(s: &str) -> Result<f64> {
    let v = f64::from_str(s.trim()).map_err(|_| Error::Malformed(format!("bad tolerance {s:?}")))?;
    if !v.is_finite() || v < 0.0 {
        return Err(Error::Malformed(format!("tolerance must be finite and nonnegative: {s:?}")));
    }
    Ok(v)
}

/// Parses a decimal string (`-1.25e-3`, `42`, `.5`) or a fraction (`-3/7`)
/// into an exact rational.
pub fn parse_decimal(s: &str) -> Result<Rational> {
    let bad = || Error::Malformed(format!("not a decimal number: {s:?}"));
    let t = s.trim();
    if t.is_empty() {
        return Err(bad());
    }
    if let Some((n, d)) = t.split_once('/') {
        let n = Integer::from_str(n.trim()).map_err(|_| bad())?;
        let d = Integer::from_str(d.trim()).map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(Rational::from((n, d)));
    }
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(pos) => {
            let e = i64::from_str(&t[pos + 1..]).map_err(|_| bad())?;
            (&t[..pos], e)
        }
        None => (t, 0),
    };
    let (negative, digits) = match mantissa.as_bytes().first() {
        Some(b'-') => (true, &mantissa[1..]),
        Some(b'+') => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    if exp.unsigned_abs() > 1_000_000 {
        return Err(bad());
    }
    let all: String = format!("{int_part}{frac_part}");
    let mut value = Rational::from(Integer::from_str(if all.is_empty() { "0" } else { &all }).map_err(|_| bad())?);
    let scale = exp - frac_part.len() as i64;
    let ten = Integer::from(10);
    if scale >= 0 {
        value *= ten.pow(scale as u32);
    } else {
        value /= ten.pow((-scale) as u32);
    }
    if negative {
        value = -value;
    }
    Ok(value)
}

/// Parses a complex number written as `a+bi`, `a-bi`, `bi`, `i` or `a`.
pub fn parse_complex(s: &str) -> Result<(Rational, Rational)> {
    let bad = || Error::Malformed(format!("not a complex number: {s:?}"));
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Err(bad());
    }
    if !t.ends_with('i') {
        return Ok((parse_decimal(&t)?, Rational::new()));
    }
    let body = &t[..t.len() - 1];
    // split at the last sign that is not part of an exponent
    let bytes = body.as_bytes();
    let mut split = None;
    for idx in (1..bytes.len()).rev() {
        if (bytes[idx] == b'+' || bytes[idx] == b'-') && !matches!(bytes[idx - 1], b'e' | b'E') {
            split = Some(idx);
            break;
        }
    }
    let imag_of = |txt: &str| -> Result<Rational> {
        match txt {
            "" | "+" => Ok(Rational::from(1)),
            "-" => Ok(Rational::from(-1)),
            other => parse_decimal(other),
        }
    };
    match split {
        Some(idx) => Ok((parse_decimal(&body[..idx])?, imag_of(&body[idx..])?)),
        None => Ok((Rational::new(), imag_of(body)?)),
    }
}

/// Decimal string that parses back to the same float at the same precision.
pub fn format_float(x: &Float) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    x.to_string_radix(10, None)
}

/// Formats a stored value for output under `cfg`: exact rationals stay exact
/// (terminating decimal or `p/q`), everything else is printed at the
/// configured mantissa size.
pub fn format_rational(r: &Rational, cfg: &PrecisionConfig) -> String {
    if cfg.is_exact() {
        format_exact(r)
    } else {
        format_float(&Float::with_val(cfg.bits(), r))
    }
}

pub fn format_exact(r: &Rational) -> String {
    if *r.denom() == 1 {
        return r.numer().to_string();
    }
    // terminating decimal iff the denominator is 2^a 5^b
    let mut d = r.denom().clone();
    let twos = d.find_one(0).unwrap_or(0);
    d >>= twos;
    let mut fives = 0u32;
    while d.is_divisible_u(5) {
        d /= 5u32;
        fives += 1;
    }
    if d == 1 {
        let digits = twos.max(fives);
        let scaled = Rational::from(r * Integer::from(Integer::u_pow_u(10, digits)));
        let n = scaled.numer().clone();
        let neg = n < 0;
        let mut s = n.abs().to_string();
        while s.len() <= digits as usize {
            s.insert(0, '0');
        }
        let split = s.len() - digits as usize;
        let out = format!("{}{}.{}", if neg { "-" } else { "" }, &s[..split], &s[split..]);
        return out;
    }
    format!("{}/{}", r.numer(), r.denom())
}

pub fn format_complex(re: &Float, im: &Float) -> String {
    let sign = if im.is_sign_negative() { "-" } else { "+" };
    let abs_im = Float::with_val(im.prec(), im.abs_ref());
    format!("{}{}{}i", format_float(re), sign, format_float(&abs_im))
}

/// Converts a float into the stored representation; non-finite values are
/// rejected.
pub fn to_rational(x: &Float) -> Result<Rational> {
    x.to_rational().ok_or_else(|| Error::NonFinite(format!("value {x} is not finite")))
}

pub fn float(bits: u32, r: &Rational) -> Float {
    Float::with_val(bits, r)
}

pub fn floats(bits: u32, rs: &[Rational]) -> Vec<Float> {
    rs.iter().map(|r| Float::with_val(bits, r)).collect()
}

pub fn complex(bits: u32, re: &Rational, im: &Rational) -> Complex {
    Complex::with_val(bits, (re, im))
}

/// Square root of a nonnegative rational: exact when the argument is the
/// square of a rational, otherwise rounded to `bits`.
pub fn sqrt_rational(r: &Rational, bits: u32) -> Rational {
    if r.cmp0() != Ordering::Less {
        let (n, d) = (r.numer(), r.denom());
        if n.is_perfect_square() && d.is_perfect_square() {
            return Rational::from((Integer::from(n.sqrt_ref()), Integer::from(d.sqrt_ref())));
        }
    }
    let f = Float::with_val(bits, r).sqrt();
    f.to_rational().unwrap_or_default()
}

/// Number of leading bits on which `a` and `b` agree, measured against
/// `scale` (pass `|b|` for a plain relative comparison).
pub fn agreeing_bits(a: &Float, b: &Float, scale: &Float) -> f64 {
    let prec = a.prec().max(b.prec());
    let diff = Float::with_val(prec, a - b).abs();
    if diff.is_zero() {
        return f64::INFINITY;
    }
    if scale.is_zero() {
        return 0.0;
    }
    let ratio = Float::with_val(prec, &diff / scale);
    let lg = ratio.log2();
    (-lg.to_f64()).max(0.0)
}

/// Sum with a fixed pairwise order, so results do not depend on how the
/// terms were produced.
pub fn pairwise_sum(prec: u32, terms: &[Float]) -> Float {
    match terms.len() {
        0 => Float::new(prec),
        1 => Float::with_val(prec, &terms[0]),
        n => {
            let (l, r) = terms.split_at(n / 2);
            let a = pairwise_sum(prec, l);
            let b = pairwise_sum(prec, r);
            Float::with_val(prec, &a + &b)
        }
    }
}

pub fn pairwise_sum_complex(prec: u32, terms: &[Complex]) -> Complex {
    match terms.len() {
        0 => Complex::new(prec),
        1 => Complex::with_val(prec, &terms[0]),
        n => {
            let (l, r) = terms.split_at(n / 2);
            let a = pairwise_sum_complex(prec, l);
            let b = pairwise_sum_complex(prec, r);
            Complex::with_val(prec, &a + &b)
        }
    }
}

/// Arithmetic needed by the elimination and recurrence kernels, implemented
/// for exact rationals and for MPFR floats (which keep their own precision).
pub trait Field: Clone + fmt::Debug {
    /// Converts a stored rational into this arithmetic, using `self` only
    /// for its precision.
    fn lift(&self, r: &Rational) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn div(&self, other: &Self) -> Self;
    fn sign(&self) -> Ordering;
    fn to_rat(&self) -> Result<Rational>;
    fn to_float(&self, bits: u32) -> Float;

    fn zero(&self) -> Self {
        self.lift(&Rational::new())
    }
    fn one(&self) -> Self {
        self.lift(&Rational::from(1))
    }
    fn is_zero(&self) -> bool {
        self.sign() == Ordering::Equal
    }
}

impl Field for Rational {
    fn lift(&self, r: &Rational) -> Self {
        r.clone()
    }
    fn add(&self, o: &Self) -> Self {
        Rational::from(self + o)
    }
    fn sub(&self, o: &Self) -> Self {
        Rational::from(self - o)
    }
    fn mul(&self, o: &Self) -> Self {
        Rational::from(self * o)
    }
    fn div(&self, o: &Self) -> Self {
        Rational::from(self / o)
    }
    fn sign(&self) -> Ordering {
        self.cmp0()
    }
    fn to_rat(&self) -> Result<Rational> {
        Ok(self.clone())
    }
    fn to_float(&self, bits: u32) -> Float {
        Float::with_val(bits, self)
    }
}

impl Field for Float {
    fn lift(&self, r: &Rational) -> Self {
        Float::with_val(self.prec(), r)
    }
    fn add(&self, o: &Self) -> Self {
        Float::with_val(self.prec(), self + o)
    }
    fn sub(&self, o: &Self) -> Self {
        Float::with_val(self.prec(), self - o)
    }
    fn mul(&self, o: &Self) -> Self {
        Float::with_val(self.prec(), self * o)
    }
    fn div(&self, o: &Self) -> Self {
        Float::with_val(self.prec(), self / o)
    }
    fn sign(&self) -> Ordering {
        self.cmp0().unwrap_or(Ordering::Equal)
    }
    fn to_rat(&self) -> Result<Rational> {
        to_rational(self)
    }
    fn to_float(&self, bits: u32) -> Float {
        Float::with_val(bits, self)
    }
}
