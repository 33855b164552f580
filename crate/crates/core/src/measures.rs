//! Measures on the real line, integration against them, the Gaussian
//! damping and `(1+t^2)^n` reweighting transformations, and conversion to
//! recurrence coefficients by the discretized Stieltjes procedure.
//!
//! Transformations are kept symbolic: a measure carries its base
//! representation plus a stack of multipliers, and the product
//! `scale * exp(-2 A t^2) * (1+t^2)^P` (with `A` the summed damping
//! exponents and `P` the summed powers) is applied at evaluation points.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use rug::ops::Pow;
use rug::{Float, Rational};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::jacobi::{self, coefficient_agreement_split, resolved_prefix, Family, JacobiMatrix, JacobiMatrixJson};
use crate::linalg::{self, Vectors};
use crate::moments::{MomentSequence, MIN_AGREEING_BITS};
use crate::num::{self, Field, PrecisionConfig, PrecisionJson};

/// Gauss–Legendre order used on each panel of the interval rules.
const PANEL_ORDER: usize = 20;
/// Panels of the first composite discretization tried for a density.
const FIRST_PANELS: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub enum Multiplier {
    /// `exp(-2 alpha t^2)`, `alpha >= 0`.
    GaussDamp(Rational),
    /// `(1 + t^2)^n`; negative `n` divides.
    PowerLift(i32),
}

pub type WeightFn = Arc<dyn Fn(&Float) -> Float + Send + Sync>;

#[derive(Clone)]
pub enum WeightFunction {
    /// `exp(-t^2) / sqrt(pi)`.
    Gaussian,
    /// `exp(-t^2/2) / sqrt(2 pi)`.
    StandardNormal,
    /// `exp(-(ln t)^2/2) / (t sqrt(2 pi))` on `t > 0`; moments `exp(k^2/2)`.
    LognormalDensity,
    /// Piecewise linear through `(points[i], values[i])`, zero outside.
    Tabulated { points: Vec<Rational>, values: Vec<Rational> },
    /// Library-only weight; cannot be serialized.
    Custom { name: String, f: WeightFn },
}

impl fmt::Debug for WeightFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightFunction::Custom { name, .. } => write!(f, "Custom({name})"),
            other => f.write_str(other.name()),
        }
    }
}

impl PartialEq for WeightFunction {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (
                WeightFunction::Tabulated { points: a, values: b },
                WeightFunction::Tabulated { points: c, values: d },
            ) => a == c && b == d,
            (WeightFunction::Custom { f: a, .. }, WeightFunction::Custom { f: b, .. }) => Arc::ptr_eq(a, b),
            (a, b) => std::mem::discriminant(a) == std::mem::discriminant(b),
        }
    }
}

impl WeightFunction {
    pub fn name(&self) -> &str {
        match self {
            WeightFunction::Gaussian => "gaussian",
            WeightFunction::StandardNormal => "standard_normal",
            WeightFunction::LognormalDensity => "lognormal",
            WeightFunction::Tabulated { .. } => "tabulated",
            WeightFunction::Custom { name, .. } => name,
        }
    }

    pub fn custom(name: &str, f: impl Fn(&Float) -> Float + Send + Sync + 'static) -> Self {
        WeightFunction::Custom { name: name.to_string(), f: Arc::new(f) }
    }

    /// Support the registry weights live on.
    pub fn natural_support(&self) -> Support {
        match self {
            WeightFunction::LognormalDensity => Support::HalfLine(Rational::new()),
            WeightFunction::Tabulated { points, .. } if points.len() >= 2 => {
                Support::Interval(points[0].clone(), points[points.len() - 1].clone())
            }
            _ => Support::RealLine,
        }
    }

    pub fn eval(&self, t: &Float) -> Float {
        let p = t.prec();
        match self {
            WeightFunction::Gaussian => {
                let e = Float::with_val(p, -Float::with_val(p, t.square_ref())).exp();
                e / Float::with_val(p, rug::float::Constant::Pi).sqrt()
            }
            WeightFunction::StandardNormal => {
                let e = (Float::with_val(p, t.square_ref()) / -2i32).exp();
                let two_pi = Float::with_val(p, rug::float::Constant::Pi) * 2u32;
                e / two_pi.sqrt()
            }
            WeightFunction::LognormalDensity => {
                if t.cmp0() != Some(Ordering::Greater) {
                    return Float::new(p);
                }
                let l = Float::with_val(p, t.ln_ref());
                let e = (l.square() / -2i32).exp();
                let two_pi = Float::with_val(p, rug::float::Constant::Pi) * 2u32;
                e / (two_pi.sqrt() * t)
            }
            WeightFunction::Tabulated { points, values } => {
                let k = points.iter().position(|x| Float::with_val(p, x) > *t);
                match k {
                    Some(k) if k > 0 => {
                        let (x0, x1) = (num::float(p, &points[k - 1]), num::float(p, &points[k]));
                        let (y0, y1) = (num::float(p, &values[k - 1]), num::float(p, &values[k]));
                        let s = Float::with_val(p, t - &x0) / Float::with_val(p, &x1 - &x0);
                        Float::with_val(p, &y1 - &y0) * s + y0
                    }
                    None if points.last().map(|x| Float::with_val(p, x) == *t).unwrap_or(false) => {
                        num::float(p, values.last().unwrap())
                    }
                    _ => Float::new(p),
                }
            }
            WeightFunction::Custom { f, .. } => Float::with_val(p, f(t)),
        }
    }

    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::String(s) => match s.as_str() {
                "gaussian" => Ok(WeightFunction::Gaussian),
                "standard_normal" => Ok(WeightFunction::StandardNormal),
                "lognormal" | "lognormal_density" => Ok(WeightFunction::LognormalDensity),
                other => Err(Error::Malformed(format!(
                    "unknown weight {other:?} (known: gaussian, standard_normal, lognormal, tabulated)"
                ))),
            },
            Value::Object(o) => {
                let t = o
                    .get("tabulated")
                    .ok_or_else(|| Error::Malformed("weight object must be {\"tabulated\": ...}".into()))?;
                let points = string_list(t.get("points"), "tabulated points")?;
                let values = string_list(t.get("values"), "tabulated values")?;
                if points.len() < 2 || points.len() != values.len() {
                    return Err(Error::Malformed("tabulated weight needs matching points and values".into()));
                }
                if points.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::Malformed("tabulated points must increase".into()));
                }
                if values.iter().any(|v| v.cmp0() == Ordering::Less) {
                    return Err(Error::Malformed("tabulated values must be nonnegative".into()));
                }
                Ok(WeightFunction::Tabulated { points, values })
            }
            _ => Err(Error::Malformed("weight must be a name or a tabulated object".into())),
        }
    }

    fn to_json(&self) -> Result<Value> {
        Ok(match self {
            WeightFunction::Tabulated { points, values } => serde_json::json!({
                "tabulated": {
                    "points": points.iter().map(num::format_exact).collect::<Vec<_>>(),
                    "values": values.iter().map(num::format_exact).collect::<Vec<_>>(),
                }
            }),
            WeightFunction::Custom { name, .. } => {
                return Err(Error::Malformed(format!("custom weight {name:?} cannot be serialized")))
            }
            other => Value::String(other.name().to_string()),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Support {
    RealLine,
    /// `[a, inf)`
    HalfLine(Rational),
    /// `[a, b]`
    Interval(Rational, Rational),
}

impl Support {
    /// Point and Jacobian of the map from `u in (-1, 1)` onto the support.
    /// Unbounded supports go through `x = u/(1-u^2)` and then `t = sinh x`
    /// (real line) or `t = a + e^x` (half line), which keeps both Gaussian
    /// and log-normal tails inside a modest number of panels.
    fn map(&self, u: &Float) -> (Float, Float) {
        let p = u.prec();
        match self {
            Support::Interval(a, b) => {
                let half = Float::with_val(p, num::float(p, b) - num::float(p, a)) / 2u32;
                let mid = Float::with_val(p, num::float(p, a) + num::float(p, b)) / 2u32;
                (Float::with_val(p, &half * u) + mid, half)
            }
            _ => {
                let u2 = Float::with_val(p, u.square_ref());
                let one_minus = Float::with_val(p, 1 - &u2);
                let x = Float::with_val(p, u / &one_minus);
                let dx = Float::with_val(p, 1 + &u2) / Float::with_val(p, one_minus.square_ref());
                match self {
                    Support::RealLine => {
                        let (s, c) = x.sinh_cosh(Float::new(p));
                        (s, c * dx)
                    }
                    Support::HalfLine(a) => {
                        let e = x.exp();
                        (Float::with_val(p, &e + a), e * dx)
                    }
                    Support::Interval(..) => unreachable!(),
                }
            }
        }
    }

    fn is_bounded(&self) -> bool {
        matches!(self, Support::Interval(..))
    }

    fn to_json(&self) -> Value {
        match self {
            Support::RealLine => Value::String("real_line".into()),
            Support::HalfLine(a) => serde_json::json!([num::format_exact(a), "inf"]),
            Support::Interval(a, b) => serde_json::json!([num::format_exact(a), num::format_exact(b)]),
        }
    }

    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::String(s) if s == "real_line" => Ok(Support::RealLine),
            Value::Array(a) if a.len() == 2 => {
                let lo = a[0].as_str().ok_or_else(|| Error::Malformed("support bounds are strings".into()))?;
                let hi = a[1].as_str().ok_or_else(|| Error::Malformed("support bounds are strings".into()))?;
                let lo_inf = matches!(lo.trim(), "-inf" | "-infinity");
                let hi_inf = matches!(hi.trim(), "inf" | "+inf" | "infinity");
                match (lo_inf, hi_inf) {
                    (true, true) => Ok(Support::RealLine),
                    (false, true) => Ok(Support::HalfLine(num::parse_decimal(lo)?)),
                    (false, false) => {
                        let (a, b) = (num::parse_decimal(lo)?, num::parse_decimal(hi)?);
                        if a >= b {
                            return Err(Error::Malformed("support interval must have a < b".into()));
                        }
                        Ok(Support::Interval(a, b))
                    }
                    (true, false) => Err(Error::Malformed("supports (-inf, b] are not supported".into())),
                }
            }
            _ => Err(Error::Malformed("support must be \"real_line\" or [a, b]".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum QuadratureSpec {
    /// Gauss rule of the `n x n` truncation of `reference`, which is taken
    /// to be the Jacobi matrix of the (normalized) weight itself.
    GaussFromJacobi { reference: JacobiMatrix, n: usize },
    /// Composite Gauss–Legendre on the mapped support; `integrate` bisects
    /// panels adaptively, the Stieltjes procedure doubles uniform panels.
    AdaptiveInterval { max_subdiv: usize, tol: f64 },
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec::AdaptiveInterval { max_subdiv: 4096, tol: 1e-20 }
    }
}

impl QuadratureSpec {
    fn validate(&self) -> Result<()> {
        match self {
            QuadratureSpec::GaussFromJacobi { n, .. } if *n == 0 => {
                Err(Error::Malformed("Gauss rule needs at least one node".into()))
            }
            QuadratureSpec::AdaptiveInterval { max_subdiv, tol } if *max_subdiv == 0 || tol.is_nan() || *tol <= 0.0 => {
                Err(Error::Malformed("adaptive rule needs max_subdiv >= 1 and tol > 0".into()))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MeasureKind {
    /// Strictly increasing points, strictly positive weights.
    Atomic {
        points: Vec<Rational>,
        weights: Vec<Rational>,
    },
    Density {
        weight: WeightFunction,
        support: Support,
        quadrature: QuadratureSpec,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Measure {
    kind: MeasureKind,
    transforms: Vec<Multiplier>,
    /// Constant factor accumulated by normalization.
    scale: Rational,
    precision: PrecisionConfig,
}

/// Nodes and effective weights of a discretization, zero weights removed.
#[derive(Debug, Clone)]
pub(crate) struct Discretization {
    pub points: Vec<Float>,
    pub weights: Vec<Float>,
}

impl Measure {
    pub fn atomic(points: Vec<Rational>, weights: Vec<Rational>, precision: PrecisionConfig) -> Result<Self> {
        precision.validate()?;
        if points.is_empty() || points.len() != weights.len() {
            return Err(Error::Malformed(format!(
                "atomic measure needs matching nonempty points and weights (got {} and {})",
                points.len(),
                weights.len()
            )));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Malformed("atom points must be strictly increasing".into()));
        }
        if weights.iter().any(|w| w.cmp0() != Ordering::Greater) {
            return Err(Error::Malformed("atom weights must be strictly positive".into()));
        }
        Ok(Measure {
            kind: MeasureKind::Atomic { points, weights },
            transforms: Vec::new(),
            scale: Rational::from(1),
            precision,
        })
    }

    pub fn atomic_floats(points: &[Float], weights: &[Float], precision: PrecisionConfig) -> Result<Self> {
        let p = points.iter().map(num::to_rational).collect::<Result<Vec<_>>>()?;
        let w = weights.iter().map(num::to_rational).collect::<Result<Vec<_>>>()?;
        Self::atomic(p, w, precision)
    }

    pub fn density(
        weight: WeightFunction,
        support: Support,
        quadrature: QuadratureSpec,
        precision: PrecisionConfig,
    ) -> Result<Self> {
        precision.validate()?;
        quadrature.validate()?;
        Ok(Measure {
            kind: MeasureKind::Density { weight, support, quadrature },
            transforms: Vec::new(),
            scale: Rational::from(1),
            precision,
        })
    }

    /// `exp(-t^2)/sqrt(pi)` with the default adaptive rule.
    pub fn gaussian(precision: PrecisionConfig) -> Self {
        Self::density(WeightFunction::Gaussian, Support::RealLine, QuadratureSpec::default(), precision)
            .expect("valid registry measure")
    }

    /// `exp(-t^2/2)/sqrt(2 pi)` with the default adaptive rule.
    pub fn standard_normal(precision: PrecisionConfig) -> Self {
        Self::density(WeightFunction::StandardNormal, Support::RealLine, QuadratureSpec::default(), precision)
            .expect("valid registry measure")
    }

    pub fn kind(&self) -> &MeasureKind {
        &self.kind
    }

    pub fn transforms(&self) -> &[Multiplier] {
        &self.transforms
    }

    pub fn precision(&self) -> &PrecisionConfig {
        &self.precision
    }

    pub fn with_precision(mut self, precision: PrecisionConfig) -> Self {
        self.precision = precision;
        self
    }

    /// Summed damping exponent of the transform stack.
    pub fn total_alpha(&self) -> Rational {
        let mut a = Rational::new();
        for m in &self.transforms {
            if let Multiplier::GaussDamp(x) = m {
                a += x;
            }
        }
        a
    }

    /// Summed power of the transform stack.
    pub fn total_power(&self) -> i32 {
        self.transforms
            .iter()
            .map(|m| match m {
                Multiplier::PowerLift(n) => *n,
                Multiplier::GaussDamp(_) => 0,
            })
            .sum()
    }

    /// Number of atoms, or `None` for densities.
    pub fn atom_count(&self) -> Option<usize> {
        match &self.kind {
            MeasureKind::Atomic { points, .. } => Some(points.len()),
            MeasureKind::Density { .. } => None,
        }
    }

    fn exact_multiplier_available(&self) -> bool {
        self.precision.is_exact() && self.total_alpha() == 0
    }

    fn multiplier_exact(&self, t: &Rational, power: i32) -> Rational {
        let base = Rational::from(1) + Rational::from(t.square_ref());
        &self.scale * base.pow(power)
    }

    fn multiplier(&self, t: &Float, alpha: &Rational, power: i32) -> Float {
        let p = t.prec();
        let t2 = Float::with_val(p, t.square_ref());
        let mut m = num::float(p, &self.scale);
        if *alpha != 0 {
            let e = Float::with_val(p, &t2 * alpha) * -2i32;
            m *= e.exp();
        }
        if power != 0 {
            m *= Float::with_val(p, 1 + &t2).pow(power);
        }
        m
    }

    /// Points and effective weights of an atomic measure, exact when the
    /// arithmetic mode and the transform stack allow it.
    pub fn atoms(&self) -> Result<(Vec<Rational>, Vec<Rational>)> {
        let MeasureKind::Atomic { points, weights } = &self.kind else {
            return Err(Error::Malformed("measure is not atomic".into()));
        };
        if self.exact_multiplier_available() {
            let power = self.total_power();
            let w = points.iter().zip(weights).map(|(t, w)| w * self.multiplier_exact(t, power)).collect();
            return Ok((points.clone(), w));
        }
        let d = self.discretize(self.precision.bits())?;
        let mut pts = Vec::new();
        let mut wts = Vec::new();
        for (t, w) in d.points.iter().zip(&d.weights) {
            pts.push(num::to_rational(t)?);
            wts.push(num::to_rational(w)?);
        }
        Ok((pts, wts))
    }

    /// Exact effective atoms in rational mode without damping.
    pub(crate) fn exact_atoms(&self) -> Option<(Vec<Rational>, Vec<Rational>)> {
        if matches!(self.kind, MeasureKind::Atomic { .. }) && self.exact_multiplier_available() {
            self.atoms().ok()
        } else {
            None
        }
    }

    /// Atoms, or quadrature nodes for a density (with `panels` uniform
    /// panels for the interval rule), at precision `prec`.
    fn discretize_with(&self, prec: u32, panels: usize) -> Result<Discretization> {
        let alpha = self.total_alpha();
        let power = self.total_power();
        let (pts, base): (Vec<Float>, Vec<Float>) = match &self.kind {
            MeasureKind::Atomic { points, weights } => (num::floats(prec, points), num::floats(prec, weights)),
            MeasureKind::Density { weight, support, quadrature } => match quadrature {
                QuadratureSpec::GaussFromJacobi { reference, n } => {
                    let r = reference.clone().with_precision(PrecisionConfig::bigfloat(prec.max(53))?);
                    let g = jacobi::truncation_spectrum(&r, *n)?;
                    let (p, w) = g.atoms()?;
                    // registry weights are probability densities, matching the
                    // normalized reference matrix
                    let _ = weight;
                    let w = num::floats(prec, &w);
                    (num::floats(prec, &p), w)
                }
                QuadratureSpec::AdaptiveInterval { .. } => {
                    let (u, gw) = gauss_legendre(PANEL_ORDER, prec)?;
                    let mut pts = Vec::with_capacity(panels * PANEL_ORDER);
                    let mut wts = Vec::with_capacity(panels * PANEL_ORDER);
                    for i in 0..panels {
                        let (a, b) = panel_bounds(i, panels, prec);
                        let half = Float::with_val(prec, &b - &a) / 2u32;
                        let mid = Float::with_val(prec, &a + &b) / 2u32;
                        for (uk, wk) in u.iter().zip(&gw) {
                            let uu = Float::with_val(prec, &half * uk) + &mid;
                            let (t, jac) = support.map(&uu);
                            let w = weight.eval(&t) * jac * wk * &half;
                            pts.push(t);
                            wts.push(w);
                        }
                    }
                    (pts, wts)
                }
            },
        };
        let mut out = Discretization { points: Vec::new(), weights: Vec::new() };
        for (t, w) in pts.into_iter().zip(base) {
            let w = self.multiplier(&t, &alpha, power) * w;
            if !w.is_finite() || !t.is_finite() {
                if w.is_zero() {
                    continue;
                }
                return Err(Error::NonFinite(format!("weight at t={t} is not finite")));
            }
            if w.cmp0() == Some(Ordering::Less) {
                return Err(Error::NonFinite(format!("negative weight at t={t}")));
            }
            // underflowed weights lie outside the numerical support
            if !w.is_zero() {
                out.points.push(t);
                out.weights.push(w);
            }
        }
        Ok(out)
    }

    pub(crate) fn discretize(&self, prec: u32) -> Result<Discretization> {
        self.discretize_with(prec, FIRST_PANELS)
    }

    fn adaptive_params(&self) -> Option<(usize, f64)> {
        match &self.kind {
            MeasureKind::Density { quadrature: QuadratureSpec::AdaptiveInterval { max_subdiv, tol }, .. } => {
                let floor = 2f64.powi(8 - self.precision.bits() as i32);
                Some((*max_subdiv, tol.max(floor)))
            }
            _ => None,
        }
    }

    /// Checks that `w(t) m(t) |t|` decays between `2^20` and `2^40` in every
    /// unbounded direction of a density.
    fn check_tails(&self) -> Result<()> {
        let MeasureKind::Density { weight, support, .. } = &self.kind else {
            return Ok(());
        };
        if support.is_bounded() {
            return Ok(());
        }
        let p = self.precision.bits().max(64);
        let alpha = self.total_alpha();
        let power = self.total_power();
        let dirs: &[i32] = match support {
            Support::RealLine => &[1, -1],
            _ => &[1],
        };
        for &s in dirs {
            let probe = |e: u32| -> Float {
                let t = Float::with_val(p, Float::i_exp(s, e as i32));
                let h = weight.eval(&t) * self.multiplier(&t, &alpha, power);
                h * Float::with_val(p, t.abs_ref())
            };
            let (near, far) = (probe(20), probe(40));
            if !far.is_finite() || (!far.is_zero() && far >= near) {
                return Err(Error::InfiniteMass(format!(
                    "weight times multiplier does not decay faster than 1/|t| (power {power})"
                )));
            }
        }
        Ok(())
    }

    /// `∫ f dμ` with the transform stack applied pointwise.
    pub fn integrate(&self, f: impl Fn(&Float) -> Float) -> Result<Float> {
        let prec = self.precision.bits();
        match &self.kind {
            MeasureKind::Atomic { .. } => {
                let d = self.discretize(prec)?;
                let terms: Vec<Float> = d.points.iter().zip(&d.weights).map(|(t, w)| f(t) * w).collect();
                let s = num::pairwise_sum(prec, &terms);
                finite(s)
            }
            MeasureKind::Density { quadrature: QuadratureSpec::GaussFromJacobi { n, .. }, .. } => {
                self.check_tails()?;
                let whole = self.integrate_rule(&f, prec)?;
                if *n > 1 {
                    let coarse = self.with_gauss_nodes(*n - 1).integrate_rule(&f, prec)?;
                    let est = Float::with_val(prec, &whole - &coarse).abs().to_f64();
                    let tol = self.precision.abs_tol.max(self.precision.rel_tol * whole.to_f64().abs());
                    if est > tol {
                        return Err(Error::QuadratureFailure(format!(
                            "Gauss rules with {n} and {} nodes differ by {est:e}",
                            n - 1
                        )));
                    }
                }
                Ok(whole)
            }
            MeasureKind::Density { .. } => {
                self.check_tails()?;
                self.integrate_adaptive(&f)
            }
        }
    }

    fn with_gauss_nodes(&self, m: usize) -> Measure {
        let mut out = self.clone();
        if let MeasureKind::Density { quadrature: QuadratureSpec::GaussFromJacobi { n, .. }, .. } = &mut out.kind {
            *n = m;
        }
        out
    }

    fn integrate_rule(&self, f: &impl Fn(&Float) -> Float, prec: u32) -> Result<Float> {
        let d = self.discretize(prec)?;
        let terms: Vec<Float> = d.points.iter().zip(&d.weights).map(|(t, w)| f(t) * w).collect();
        finite(num::pairwise_sum(prec, &terms))
    }

    fn integrate_adaptive(&self, f: &impl Fn(&Float) -> Float) -> Result<Float> {
        let MeasureKind::Density { weight, support, .. } = &self.kind else { unreachable!() };
        let (max_subdiv, tol) = self.adaptive_params().expect("adaptive rule");
        let prec = self.precision.bits();
        let (u, gw) = gauss_legendre(PANEL_ORDER, prec)?;
        let alpha = self.total_alpha();
        let power = self.total_power();
        let panel = |a: &Float, b: &Float| -> Result<Float> {
            let half = Float::with_val(prec, b - a) / 2u32;
            let mid = Float::with_val(prec, a + b) / 2u32;
            let mut terms = Vec::with_capacity(u.len());
            for (uk, wk) in u.iter().zip(&gw) {
                let uu = Float::with_val(prec, &half * uk) + &mid;
                let (t, jac) = support.map(&uu);
                let w = weight.eval(&t) * self.multiplier(&t, &alpha, power);
                if w.is_zero() {
                    continue;
                }
                let v = f(&t) * w * jac * wk;
                if !v.is_finite() {
                    return Err(Error::NonFinite(format!("integrand is not finite at t={t}")));
                }
                terms.push(v);
            }
            Ok(num::pairwise_sum(prec, &terms) * half)
        };
        struct Panel {
            a: Float,
            b: Float,
            value: Float,
            err: Float,
        }
        let evaluate = |a: Float, b: Float| -> Result<Panel> {
            let m = Float::with_val(prec, &a + &b) / 2u32;
            let whole = panel(&a, &b)?;
            let split = panel(&a, &m)? + panel(&m, &b)?;
            let err = Float::with_val(prec, &split - &whole).abs();
            Ok(Panel { a, b, value: split, err })
        };
        let mut panels = Vec::new();
        for i in 0..FIRST_PANELS {
            let (a, b) = panel_bounds(i, FIRST_PANELS, prec);
            panels.push(evaluate(a, b)?);
        }
        loop {
            let total = num::pairwise_sum(prec, &panels.iter().map(|p| p.value.clone()).collect::<Vec<_>>());
            let err = num::pairwise_sum(prec, &panels.iter().map(|p| p.err.clone()).collect::<Vec<_>>());
            let target = tol * total.to_f64().abs().max(1.0);
            if err.to_f64() <= target {
                return finite(total);
            }
            if panels.len() >= max_subdiv {
                return Err(Error::QuadratureFailure(format!(
                    "error estimate {:e} above {target:e} after {} panels",
                    err.to_f64(),
                    panels.len()
                )));
            }
            let worst = (0..panels.len())
                .max_by(|&i, &j| panels[i].err.partial_cmp(&panels[j].err).unwrap_or(Ordering::Equal))
                .unwrap();
            let p = panels.swap_remove(worst);
            let m = Float::with_val(prec, &p.a + &p.b) / 2u32;
            panels.push(evaluate(p.a, m.clone())?);
            panels.push(evaluate(m, p.b)?);
        }
    }

    /// Total mass, exact for atomic measures in rational mode.
    pub fn mass(&self) -> Result<Rational> {
        if let Some((_, w)) = self.exact_atoms() {
            return Ok(w.iter().sum());
        }
        let m = self.integrate(|t| Float::with_val(t.prec(), 1))?;
        num::to_rational(&m)
    }

    /// Moments `s_0..=s_m`, exact for atomic measures in rational mode.
    pub fn moments(&self, m: usize) -> Result<MomentSequence> {
        if let Some((p, w)) = self.exact_atoms() {
            let values = (0..=m).map(|k| p.iter().zip(&w).map(|(t, w)| w * t.clone().pow(k as i32)).sum()).collect();
            return MomentSequence::new(values, self.precision);
        }
        let values = (0..=m)
            .map(|k| {
                let v = self.integrate(|t| t.clone().pow(k as u32))?;
                num::to_rational(&v)
            })
            .collect::<Result<Vec<_>>>()?;
        MomentSequence::new(values, self.precision)
    }

    fn push(&self, m: Multiplier) -> Measure {
        let mut out = self.clone();
        out.transforms.push(m);
        out
    }

    pub fn to_json(&self) -> Result<MeasureJson> {
        let cfg = &self.precision;
        let transforms = self
            .transforms
            .iter()
            .map(|m| match m {
                Multiplier::GaussDamp(a) => serde_json::json!({ "gauss_damp": num::format_exact(a) }),
                Multiplier::PowerLift(n) => serde_json::json!({ "power_lift": n }),
            })
            .collect();
        let scale = (self.scale != 1).then(|| num::format_exact(&self.scale));
        let mut json = MeasureJson {
            kind: String::new(),
            points: None,
            weights: None,
            weight: None,
            support: None,
            quadrature: None,
            transforms,
            scale,
            precision: Some(cfg.to_json()),
        };
        match &self.kind {
            MeasureKind::Atomic { points, weights } => {
                json.kind = "atomic".into();
                json.points = Some(points.iter().map(|x| num::format_rational(x, cfg)).collect());
                json.weights = Some(weights.iter().map(|x| num::format_rational(x, cfg)).collect());
            }
            MeasureKind::Density { weight, support, quadrature } => {
                json.kind = "density".into();
                json.weight = Some(weight.to_json()?);
                json.support = Some(support.to_json());
                json.quadrature = Some(match quadrature {
                    QuadratureSpec::GaussFromJacobi { reference, n } => QuadratureJson {
                        rule: "gauss_from_jacobi".into(),
                        reference: Some(reference.to_json()),
                        n: Some(*n),
                        max_subdiv: None,
                        tol: None,
                    },
                    QuadratureSpec::AdaptiveInterval { max_subdiv, tol } => QuadratureJson {
                        rule: "adaptive".into(),
                        reference: None,
                        n: None,
                        max_subdiv: Some(*max_subdiv),
                        tol: Some(format!("{tol:e}")),
                    },
                });
            }
        }
        Ok(json)
    }

    pub fn from_json(json: &MeasureJson, fallback: PrecisionConfig) -> Result<Self> {
        let precision = match &json.precision {
            Some(p) => PrecisionConfig::from_json(p)?,
            None => fallback,
        };
        let mut m = match json.kind.as_str() {
            "atomic" => {
                let points = string_items(json.points.as_deref(), "points")?;
                let weights = string_items(json.weights.as_deref(), "weights")?;
                Measure::atomic(points, weights, precision)?
            }
            "density" => {
                let weight = WeightFunction::from_json(
                    json.weight.as_ref().ok_or_else(|| Error::Malformed("density needs a weight".into()))?,
                )?;
                let support = match &json.support {
                    Some(s) => Support::from_json(s)?,
                    None => weight.natural_support(),
                };
                let quadrature = match &json.quadrature {
                    None => QuadratureSpec::default(),
                    Some(q) => q.to_spec(precision)?,
                };
                Measure::density(weight, support, quadrature, precision)?
            }
            other => return Err(Error::Malformed(format!("unknown measure kind {other:?}"))),
        };
        for t in &json.transforms {
            let o = t
                .as_object()
                .filter(|o| o.len() == 1)
                .ok_or_else(|| Error::Malformed("transforms are {\"gauss_damp\": a} or {\"power_lift\": n}".into()))?;
            if let Some(a) = o.get("gauss_damp") {
                let a = match a {
                    Value::String(s) => num::parse_decimal(s)?,
                    Value::Number(n) => num::parse_decimal(&n.to_string())?,
                    _ => return Err(Error::Malformed("gauss_damp takes a decimal".into())),
                };
                if a.cmp0() == Ordering::Less {
                    return Err(Error::Malformed("gauss_damp alpha must be nonnegative".into()));
                }
                m.transforms.push(Multiplier::GaussDamp(a));
            } else if let Some(n) = o.get("power_lift") {
                let n = n
                    .as_i64()
                    .and_then(|n| i32::try_from(n).ok())
                    .ok_or_else(|| Error::Malformed("power_lift takes an integer".into()))?;
                m.transforms.push(Multiplier::PowerLift(n));
            } else {
                return Err(Error::Malformed("unknown transform".into()));
            }
        }
        if let Some(s) = &json.scale {
            let s = num::parse_decimal(s)?;
            if s.cmp0() != Ordering::Greater {
                return Err(Error::Malformed("scale must be positive".into()));
            }
            m.scale = s;
        }
        Ok(m)
    }
}

fn finite(x: Float) -> Result<Float> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::NonFinite("integral is not finite at working precision".into()))
    }
}

fn panel_bounds(i: usize, panels: usize, prec: u32) -> (Float, Float) {
    let edge = |k: usize| Float::with_val(prec, 2 * k as i64 - panels as i64) / panels as u32;
    (edge(i), edge(i + 1))
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Golub–Welsch.
pub fn gauss_legendre(order: usize, prec: u32) -> Result<(Vec<Float>, Vec<Float>)> {
    let diag = vec![Float::new(prec); order];
    let off: Vec<Float> = (1..order)
        .map(|k| {
            let k = k as u64;
            Float::with_val(prec, k) / Float::with_val(prec, 4 * k * k - 1).sqrt()
        })
        .collect();
    let e = linalg::tridiagonal_eigen(&diag, &off, prec, Vectors::FirstComponents)?;
    let w = e.first.iter().map(|x| Float::with_val(prec, x.square_ref()) * 2u32).collect();
    Ok((e.values, w))
}

fn string_items(v: Option<&[String]>, what: &str) -> Result<Vec<Rational>> {
    v.ok_or_else(|| Error::Malformed(format!("atomic measure needs {what}")))?
        .iter()
        .map(|s| num::parse_decimal(s))
        .collect()
}

fn string_list(v: Option<&Value>, what: &str) -> Result<Vec<Rational>> {
    let arr = v.and_then(|v| v.as_array()).ok_or_else(|| Error::Malformed(format!("{what} must be an array")))?;
    arr.iter()
        .map(|x| match x {
            Value::String(s) => num::parse_decimal(s),
            Value::Number(n) => num::parse_decimal(&n.to_string()),
            _ => Err(Error::Malformed(format!("{what} entries must be decimals"))),
        })
        .collect()
}

/// Wire form of a measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureJson {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature: Option<QuadratureJson>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub transforms: Vec<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<PrecisionJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureJson {
    pub rule: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<JacobiMatrixJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_subdiv: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<String>,
}

impl QuadratureJson {
    fn to_spec(&self, precision: PrecisionConfig) -> Result<QuadratureSpec> {
        let spec = match self.rule.as_str() {
            "gauss_from_jacobi" => {
                let reference = self
                    .reference
                    .as_ref()
                    .ok_or_else(|| Error::Malformed("gauss_from_jacobi needs a reference matrix".into()))?;
                QuadratureSpec::GaussFromJacobi {
                    reference: JacobiMatrix::from_json(reference, precision)?,
                    n: self.n.ok_or_else(|| Error::Malformed("gauss_from_jacobi needs n".into()))?,
                }
            }
            "adaptive" => {
                let QuadratureSpec::AdaptiveInterval { max_subdiv, tol } = QuadratureSpec::default() else {
                    unreachable!()
                };
                let tol = match &self.tol {
                    Some(t) => t.trim().parse::<f64>().map_err(|_| Error::Malformed(format!("bad tol {t:?}")))?,
                    None => tol,
                };
                QuadratureSpec::AdaptiveInterval { max_subdiv: self.max_subdiv.unwrap_or(max_subdiv), tol }
            }
            other => return Err(Error::Malformed(format!("unknown quadrature rule {other:?}"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Rescales to unit mass. Returns the normalized measure and the mass `C`
/// it had before.
pub fn normalize(mu: &Measure) -> Result<(Measure, Rational)> {
    let c = mu.mass()?;
    match c.cmp0() {
        Ordering::Greater => {}
        _ => return Err(Error::ZeroMass),
    }
    let mut out = mu.clone();
    if c == 1 {
        return Ok((out, c));
    }
    // a float mass within rounding of 1 leaves the measure alone
    if !mu.precision.is_exact() || mu.exact_atoms().is_none() {
        let bits = mu.precision.bits();
        let dev = (Float::with_val(bits, &c) - 1u32).abs();
        if dev < Float::with_val(64, Float::i_exp(1, 6 - bits as i32)) {
            return Ok((out, Rational::from(1)));
        }
    }
    out.scale = Rational::from(&mu.scale / &c);
    Ok((out, c))
}

/// Multiplies by `exp(-2 alpha t^2)` and normalizes.
pub fn gauss_damp(mu: &Measure, alpha: &Rational) -> Result<Measure> {
    if alpha.cmp0() == Ordering::Less {
        return Err(Error::Malformed("alpha must be nonnegative".into()));
    }
    if *alpha == 0 {
        return Ok(normalize(mu)?.0);
    }
    Ok(normalize(&mu.push(Multiplier::GaussDamp(alpha.clone())))?.0)
}

/// Multiplies by `(1 + t^2)^n` and normalizes; returns the normalization
/// constant `C = ∫ (1+t^2)^n dμ`.
pub fn power_reweight(mu: &Measure, n: i32) -> Result<(Measure, Rational)> {
    if n == 0 {
        return normalize(mu);
    }
    normalize(&mu.push(Multiplier::PowerLift(n)))
}

/// `n`-node Gauss measure of the lognormal Jacobi matrix, computed at no
/// less than 512 bits: a finite stand-in for the solutions of the
/// indeterminate lognormal moment problem.
pub fn lognormal_proxy(nodes: usize, precision: PrecisionConfig) -> Result<Measure> {
    let bits = precision.bits().max(jacobi::LOGNORMAL_MIN_BITS);
    let cfg = PrecisionConfig::bigfloat(bits)?.with_tolerances(precision.abs_tol, precision.rel_tol);
    let j = JacobiMatrix::from_family(Family::Lognormal, cfg);
    jacobi::truncation_spectrum(&j, nodes)
}

/// Outcome of the Stieltjes recurrence: monic coefficients `alpha_k`,
/// `beta_k` and the index at which the norm stopped being positive, if it
/// did.
struct Stieltjes<F> {
    alpha: Vec<F>,
    beta: Vec<F>,
    stopped_at: Option<usize>,
}

/// Discretized Stieltjes procedure on nodes `x` with weights `w`: monic
/// orthogonal polynomials by `p_{k+1} = (x - alpha_k) p_k - beta_k p_{k-1}`
/// with `alpha_k = <x p_k, p_k>/<p_k, p_k>` and
/// `beta_k = <p_k, p_k>/<p_{k-1}, p_{k-1}>`.
fn stieltjes<F: Field>(x: &[F], w: &[F], n: usize) -> Stieltjes<F> {
    let m = x.len();
    let zero = w[0].zero();
    let mut p_prev = vec![zero.clone(); m];
    let mut p = vec![zero.one(); m];
    let mut norm_prev = zero.one();
    let mut out = Stieltjes { alpha: Vec::new(), beta: Vec::new(), stopped_at: None };
    for k in 0..n {
        let mut norm = zero.clone();
        let mut xn = zero.clone();
        for i in 0..m {
            let wp2 = w[i].mul(&p[i]).mul(&p[i]);
            xn = xn.add(&wp2.mul(&x[i]));
            norm = norm.add(&wp2);
        }
        if norm.sign() != Ordering::Greater {
            out.stopped_at = Some(k);
            return out;
        }
        if k > 0 {
            out.beta.push(norm.div(&norm_prev));
        }
        let a = xn.div(&norm);
        if k + 1 < n {
            let next: Vec<F> = (0..m)
                .map(|i| {
                    let mut v = x[i].sub(&a).mul(&p[i]);
                    if k > 0 {
                        v = v.sub(&out.beta[k - 1].mul(&p_prev[i]));
                    }
                    v
                })
                .collect();
            p_prev = std::mem::replace(&mut p, next);
        }
        out.alpha.push(a);
        norm_prev = norm;
    }
    out
}

fn float_stieltjes(d: &Discretization, n: usize, prec: u32) -> (Vec<Float>, Vec<Float>, Option<usize>) {
    let s = stieltjes(&d.points, &d.weights, n);
    let b = s.beta.iter().map(|x| Float::with_val(prec, x.sqrt_ref())).collect();
    (s.alpha, b, s.stopped_at)
}

/// Result of [`measure_to_jacobi_resolved`].
#[derive(Debug, Clone)]
pub struct ResolvedJacobi {
    /// Coefficients that agree between the two precision runs.
    pub jacobi: JacobiMatrix,
    /// Bits used for the lower of the two runs.
    pub bits: u32,
    /// Worst agreement (in bits) over the returned coefficients.
    pub agreeing_bits: f64,
}

fn support_size(d: &Discretization, mu: &Measure) -> Option<usize> {
    mu.atom_count().map(|_| d.points.len())
}

/// Discretization for the Stieltjes procedure. For the interval rule the
/// number of panels is doubled until the first `n` coefficients settle to
/// the rule's tolerance.
pub(crate) fn stieltjes_nodes(mu: &Measure, n: usize, prec: u32) -> Result<(usize, Discretization)> {
    match &mu.kind {
        MeasureKind::Density { quadrature: QuadratureSpec::GaussFromJacobi { n: nodes, .. }, .. } => {
            if *nodes < 2 * n {
                return Err(Error::QuadratureFailure(format!(
                    "{n} coefficients need at least {} Gauss nodes, rule has {nodes}",
                    2 * n
                )));
            }
            mu.check_tails()?;
            Ok((0, mu.discretize(prec)?))
        }
        MeasureKind::Density { .. } => {
            mu.check_tails()?;
            let (max_subdiv, tol) = mu.adaptive_params().unwrap();
            let mut panels = FIRST_PANELS;
            let mut prev = mu.discretize_with(prec, panels)?;
            let (mut q0, mut b0, _) = float_stieltjes(&prev, n, prec);
            while panels * 2 <= max_subdiv {
                panels *= 2;
                let d = mu.discretize_with(prec, panels)?;
                let (q1, b1, stop) = float_stieltjes(&d, n, prec);
                if stop.is_none() && q0.len() == n && b0.len() + 1 == n {
                    let (qa, ba) = coefficient_agreement_split(&q0, &b0, &q1, &b1);
                    let need = -tol.log2();
                    if qa.iter().chain(&ba).all(|&x| x >= need) {
                        return Ok((panels, d));
                    }
                }
                prev = d;
                q0 = q1;
                b0 = b1;
            }
            let _ = prev;
            Err(Error::QuadratureFailure(format!("recurrence coefficients did not settle within {max_subdiv} panels")))
        }
        MeasureKind::Atomic { .. } => Ok((0, mu.discretize(prec)?)),
    }
}

/// Longest prefix (up to `n`) of the recurrence coefficients that survives
/// the comparison of a `P`-bit and a `2P`-bit run. Exact atomic measures in
/// rational mode are converted exactly. For atomic measures `n` is first
/// capped at the number of atoms whose effective weight is nonzero at
/// working precision.
pub fn measure_to_jacobi_resolved(mu: &Measure, n: usize) -> Result<ResolvedJacobi> {
    resolved(mu, n, true)
}

fn resolved(mu: &Measure, n: usize, clamp: bool) -> Result<ResolvedJacobi> {
    if n == 0 {
        return Err(Error::Malformed("n must be positive".into()));
    }
    let cfg = mu.precision;
    let bits = cfg.bits();
    if let Some((p, w)) = mu.exact_atoms() {
        if n > p.len() {
            return Err(Error::FiniteSupport { requested: n, support: p.len() });
        }
        let s = stieltjes(&p, &w, n);
        if let Some(k) = s.stopped_at {
            return Err(Error::FiniteSupport { requested: n, support: k });
        }
        let b = s.beta.iter().map(|x| num::sqrt_rational(x, bits)).collect();
        return Ok(ResolvedJacobi { jacobi: JacobiMatrix::new(s.alpha, b, cfg)?, bits, agreeing_bits: f64::INFINITY });
    }
    let (panels, lo_nodes) = stieltjes_nodes(mu, n, bits)?;
    let mut n = n;
    if let Some(s) = support_size(&lo_nodes, mu) {
        if clamp && s > 0 {
            n = n.min(s);
        }
        if n > s {
            return Err(Error::FiniteSupport { requested: n, support: s });
        }
    }
    let hi_nodes = match panels {
        0 => mu.discretize(2 * bits)?,
        p => mu.discretize_with(2 * bits, p)?,
    };
    let (q_lo, b_lo, stop_lo) = float_stieltjes(&lo_nodes, n, bits);
    let (q_hi, b_hi, stop_hi) = float_stieltjes(&hi_nodes, n, 2 * bits);
    let avail = q_lo.len().min(q_hi.len()).min(b_lo.len() + 1).min(b_hi.len() + 1);
    if avail == 0 {
        return Err(Error::FiniteSupport { requested: n, support: 0 });
    }
    let (qa, ba) = coefficient_agreement_split(&q_lo[..avail], &b_lo[..avail - 1], &q_hi[..avail], &b_hi[..avail - 1]);
    let len = resolved_prefix(&qa, &ba, MIN_AGREEING_BITS);
    if len == 0 {
        return Err(Error::PrecisionLoss { agreeing_bits: qa[0], bits, doubled: 2 * bits });
    }
    if len == avail && avail < n {
        if let Some(k) = stop_hi.or(stop_lo) {
            return Err(Error::FiniteSupport { requested: n, support: k });
        }
    }
    let worst = qa[..len].iter().chain(&ba[..len - 1]).cloned().fold(f64::INFINITY, f64::min);
    let q: Vec<Float> = q_hi[..len].iter().map(|x| Float::with_val(bits, x)).collect();
    let b: Vec<Float> = b_hi[..len - 1].iter().map(|x| Float::with_val(bits, x)).collect();
    Ok(ResolvedJacobi { jacobi: JacobiMatrix::from_floats(&q, &b, cfg)?, bits, agreeing_bits: worst })
}

/// First `n` diagonal and `n - 1` off-diagonal recurrence coefficients of
/// the orthonormal polynomials of `mu`, by the discretized Stieltjes
/// procedure.
pub fn measure_to_jacobi(mu: &Measure, n: usize) -> Result<JacobiMatrix> {
    let r = resolved(mu, n, false)?;
    if r.jacobi.len() < n {
        let bits = r.bits;
        return Err(Error::PrecisionLoss { agreeing_bits: 0.0, bits, doubled: 2 * bits });
    }
    Ok(r.jacobi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(x: i64) -> Rational {
        Rational::from(x)
    }

    fn half_pair(cfg: PrecisionConfig) -> Measure {
        Measure::atomic(vec![r(-1), r(1)], vec![Rational::from((1, 2)), Rational::from((1, 2))], cfg).unwrap()
    }

    fn close(a: &Float, b: f64, tol: f64) -> bool {
        (Float::with_val(a.prec(), a - b)).abs() < tol
    }

    #[test]
    fn atomic_integration_and_validation() {
        let mu = half_pair(PrecisionConfig::default());
        let v = mu.integrate(|t| Float::with_val(t.prec(), t.square_ref())).unwrap();
        assert_eq!(v, 1);
        assert!(Measure::atomic(vec![r(1), r(0)], vec![r(1), r(1)], PrecisionConfig::default()).is_err());
        assert!(Measure::atomic(vec![r(0)], vec![r(0)], PrecisionConfig::default()).is_err());
    }

    #[test]
    fn damping_a_point_mass_at_zero() {
        let mu = Measure::atomic(vec![r(0)], vec![r(1)], PrecisionConfig::default()).unwrap();
        let d = gauss_damp(&mu, &Rational::from((3, 2))).unwrap();
        assert_eq!(d.integrate(|t| Float::with_val(t.prec(), 1)).unwrap(), 1);
    }

    #[test]
    fn damping_multiplies_pointwise() {
        let mu = Measure::atomic(vec![r(1)], vec![r(3)], PrecisionConfig::default()).unwrap();
        let d = mu.push(Multiplier::GaussDamp(Rational::from((1, 2))));
        let (_, w) = d.atoms().unwrap();
        let expect = Float::with_val(256, -1).exp() * 3u32;
        assert!(close(&(Float::with_val(256, &w[0]) - expect), 0.0, 1e-70));
    }

    #[test]
    fn normalization_constant() {
        let mu = Measure::atomic(vec![r(0), r(1)], vec![r(2), r(2)], PrecisionConfig::rational()).unwrap();
        let (n, c) = normalize(&mu).unwrap();
        assert_eq!(c, 4);
        assert_eq!(n.atoms().unwrap().1, vec![Rational::from((1, 2)); 2]);
        let (again, c1) = normalize(&n).unwrap();
        assert_eq!(c1, 1);
        assert_eq!(again, n);
    }

    #[test]
    fn power_lift_of_origin_atom() {
        let mu = Measure::atomic(vec![r(0)], vec![r(1)], PrecisionConfig::rational()).unwrap();
        let (m, c) = power_reweight(&mu, 1).unwrap();
        assert_eq!(c, 1);
        assert_eq!(m.atoms().unwrap(), (vec![r(0)], vec![r(1)]));
    }

    #[test]
    fn power_lift_inverse_is_exact_in_rational_mode() {
        let pts: Vec<Rational> = (0..10).map(|k| Rational::from((k * 3 - 11, 4))).collect();
        let wts: Vec<Rational> = (0..10).map(|k| Rational::from((k + 1, 55))).collect();
        let mu = Measure::atomic(pts, wts.clone(), PrecisionConfig::rational()).unwrap();
        let (nu, c) = power_reweight(&mu, -1).unwrap();
        assert!(c < 1);
        let (back, _) = power_reweight(&nu, 1).unwrap();
        assert_eq!(back.atoms().unwrap().1, wts);
    }

    #[test]
    fn two_atom_recurrence_and_finite_support() {
        for cfg in [PrecisionConfig::rational(), PrecisionConfig::default()] {
            let mu = half_pair(cfg);
            let j = measure_to_jacobi(&mu, 2).unwrap();
            assert_eq!(j.q(), &[r(0), r(0)]);
            assert_eq!(j.b(), &[r(1)]);
            assert_eq!(measure_to_jacobi(&mu, 3).unwrap_err(), Error::FiniteSupport { requested: 3, support: 2 });
        }
    }

    #[test]
    fn standard_normal_second_moment() {
        let mu = Measure::standard_normal(PrecisionConfig::default());
        let v = mu.integrate(|t| Float::with_val(t.prec(), t.square_ref())).unwrap();
        assert!(close(&v, 1.0, 1e-14), "{v}");
        let m = mu.mass().unwrap();
        assert!(close(&Float::with_val(256, &m), 1.0, 1e-14));
    }

    #[test]
    fn gaussian_recurrence_from_adaptive_rule() {
        let mu = Measure::gaussian(PrecisionConfig::default());
        let j = measure_to_jacobi(&mu, 6).unwrap();
        for (k, q) in j.q().iter().enumerate() {
            assert!(close(&Float::with_val(256, q), 0.0, 1e-15), "q_{k}");
        }
        for (i, b) in j.b().iter().enumerate() {
            let expect = (((i + 1) as f64) / 2.0).sqrt();
            assert!(close(&Float::with_val(256, b), expect, 1e-14), "b_{}", i + 1);
        }
    }

    #[test]
    fn gaussian_recurrence_from_gauss_rule() {
        let cfg = PrecisionConfig::default();
        let reference = JacobiMatrix::from_family(Family::HermiteLike, cfg);
        let mu = Measure::density(
            WeightFunction::Gaussian,
            Support::RealLine,
            QuadratureSpec::GaussFromJacobi { reference, n: 40 },
            cfg,
        )
        .unwrap();
        let j = measure_to_jacobi(&mu, 10).unwrap();
        for (i, b) in j.b().iter().enumerate() {
            assert!(close(&Float::with_val(256, b), (((i + 1) as f64) / 2.0).sqrt(), 1e-10));
        }
        assert!(matches!(measure_to_jacobi(&mu, 21), Err(Error::QuadratureFailure(_))));
    }

    #[test]
    fn damped_gaussian_has_quarter_variance() {
        let mu = Measure::gaussian(PrecisionConfig::default());
        let d = gauss_damp(&mu, &Rational::from((1, 2))).unwrap();
        let j = measure_to_jacobi(&d, 5).unwrap();
        for (i, b) in j.b().iter().enumerate() {
            assert!(close(&Float::with_val(256, b), (((i + 1) as f64).sqrt()) / 2.0, 1e-12));
        }
    }

    #[test]
    fn heavy_tail_lift_is_infinite() {
        let cauchy = WeightFunction::custom("cauchy", |t| {
            let p = t.prec();
            let pi = Float::with_val(p, rug::float::Constant::Pi);
            (Float::with_val(p, t.square_ref()) + 1u32).recip() / pi
        });
        let mu =
            Measure::density(cauchy, Support::RealLine, QuadratureSpec::default(), PrecisionConfig::default()).unwrap();
        assert!(matches!(power_reweight(&mu, 1), Err(Error::InfiniteMass(_))));
        assert!(power_reweight(&mu, -1).is_ok());
    }

    #[test]
    fn spectrum_route_reproduces_hermite_coefficients() {
        let cfg = PrecisionConfig::default();
        let j = JacobiMatrix::from_family(Family::HermiteLike, cfg);
        let mu = jacobi::truncation_spectrum(&j, 20).unwrap();
        let back = measure_to_jacobi(&mu, 10).unwrap();
        for (i, b) in back.b().iter().enumerate() {
            assert!(close(&Float::with_val(256, b), (((i + 1) as f64) / 2.0).sqrt(), 1e-10));
        }
    }

    #[test]
    fn json_round_trip() {
        let mu = half_pair(PrecisionConfig::rational());
        let (nu, _) = power_reweight(&gauss_damp(&mu, &Rational::from((1, 4))).unwrap(), -2).unwrap();
        let json = nu.to_json().unwrap();
        let text = serde_json::to_string(&json).unwrap();
        let back = Measure::from_json(&serde_json::from_str(&text).unwrap(), PrecisionConfig::default()).unwrap();
        assert_eq!(back, nu);
    }
}
