//! Numeric carriers for probabilities: exact rationals or binary floats.
//!
//! Every measure engine in this crate is generic over [`Scalar`], so the
//! same formula runs either exactly (no rounding anywhere) or in `f64`.
//! The dynamic [`Prob`] enum carries a computed value across the API
//! boundary, e.g. into reports.

use std::fmt;
use std::ops::{Add, Div, Mul, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Value type for probabilities and measure masses.
///
/// Implemented by `f64` (float mode) and [`BigRational`] (exact mode,
/// no rounding anywhere).
pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialEq
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Zero
    + One
{
    /// True when arithmetic in this type is exact.
    const EXACT: bool;

    fn from_ratio(num: u64, den: u64) -> Self;

    fn to_f64(&self) -> f64;

    /// Nonnegative integer power by repeated squaring.
    fn powu(&self, exp: u32) -> Self {
        let mut acc = Self::one();
        let mut base = self.clone();
        let mut e = exp;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            base = base.clone() * base.clone();
            e >>= 1;
        }
        acc
    }

    fn into_prob(self) -> Prob;
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_ratio(num: u64, den: u64) -> Self {
        num as f64 / den as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn into_prob(self) -> Prob {
        Prob::Float(self)
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_ratio(num: u64, den: u64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn into_prob(self) -> Prob {
        Prob::Exact(self)
    }
}

/// A probability as produced by one of the engines: exact when the survival
/// parameter is rational, a float otherwise.
#[derive(Clone, Debug, PartialEq)]
pub enum Prob {
    Exact(BigRational),
    Float(f64),
}

impl Prob {
    pub fn to_f64(&self) -> f64 {
        match self {
            Prob::Exact(r) => Scalar::to_f64(r),
            Prob::Float(v) => *v,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Prob::Exact(_))
    }
}

impl fmt::Display for Prob {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            // BigRational prints in lowest terms, "1/2" style; integers
            // print without the denominator.
            Prob::Exact(r) => write!(f, "{r}"),
            Prob::Float(v) => write!(f, "{}", format_sig(*v, 15)),
        }
    }
}

impl Serialize for Prob {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Format with `sig` significant digits, plain decimal where reasonable,
/// scientific otherwise (the shape of C's `%.15g`).
pub fn format_sig(v: f64, sig: usize) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let exp = v.abs().log10().floor() as i32;
    if exp < -4 || exp >= sig as i32 {
        format!("{:.*e}", sig.saturating_sub(1), v)
    } else {
        let decimals = (sig as i32 - 1 - exp).max(0) as usize;
        format!("{:.*}", decimals, v)
    }
}

/// How gamma was supplied: symbolically as `log2(q/r)` (activating exact
/// rational mode with survival parameter p = r/q), or as a plain float.
#[derive(Clone, Debug, PartialEq)]
pub enum GammaSpec {
    /// gamma = log2(num/den), so p = 2^{-gamma} = den/num.
    Log2Ratio { num: u64, den: u64 },
    Float(f64),
}

impl GammaSpec {
    /// The real value of gamma.
    pub fn gamma(&self) -> f64 {
        match self {
            GammaSpec::Log2Ratio { num, den } => (*num as f64 / *den as f64).log2(),
            GammaSpec::Float(g) => *g,
        }
    }

    /// Survival parameter p = 2^{-gamma} as a float.
    pub fn p_f64(&self) -> f64 {
        match self {
            GammaSpec::Log2Ratio { num, den } => *den as f64 / *num as f64,
            GammaSpec::Float(g) => (-g).exp2(),
        }
    }

    /// Exact p = den/num, available only in the symbolic form.
    pub fn p_exact(&self) -> Result<BigRational> {
        match self {
            GammaSpec::Log2Ratio { num, den } => Ok(BigRational::new(
                BigInt::from(*den),
                BigInt::from(*num),
            )),
            GammaSpec::Float(_) => Err(Error::ExactModeUnavailable),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, GammaSpec::Log2Ratio { .. })
    }

    fn validate(self) -> Result<Self> {
        let g = self.gamma();
        if !(0.0..1.0).contains(&g) {
            return Err(Error::InvalidGamma { gamma: g });
        }
        Ok(self)
    }
}

impl FromStr for GammaSpec {
    type Err = Error;

    /// Accepts `log2(q/r)` (exact mode) or a float literal.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let bad = || Error::BadGammaSpec {
            input: s.to_string(),
        };
        if let Some(body) = t
            .strip_prefix("log2(")
            .and_then(|rest| rest.strip_suffix(')'))
        {
            let (q, r) = body.split_once('/').ok_or_else(bad)?;
            let num: u64 = q.trim().parse().map_err(|_| bad())?;
            let den: u64 = r.trim().parse().map_err(|_| bad())?;
            if num == 0 || den == 0 {
                return Err(bad());
            }
            GammaSpec::Log2Ratio { num, den }.validate()
        } else {
            let g: f64 = t.parse().map_err(|_| bad())?;
            GammaSpec::Float(g).validate()
        }
    }
}

impl fmt::Display for GammaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GammaSpec::Log2Ratio { num, den } => write!(f, "log2({num}/{den})"),
            GammaSpec::Float(g) => write!(f, "{g}"),
        }
    }
}
