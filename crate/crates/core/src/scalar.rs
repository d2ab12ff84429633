//! Scalar backends.
//!
//! Two interchangeable fields back every computation in the crate:
//!
//! * [`Exact`]: Gaussian rationals, `p/q + (r/s)i` with arbitrary-precision
//!   integers. Arithmetic is exact, so matrix identities can be checked as
//!   true equalities.
//! * [`Float`]: IEEE double complex numbers. Zero tests and equality go
//!   through a [`Tolerance`].
//!
//! Generic code is written against the [`Field`] trait. The [`Scalar`] enum is
//! the dynamically typed form used for text and JSON input/output.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use regex::Regex;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Gaussian rational.
pub type Exact = Complex<BigRational>;
/// Double-precision complex number.
pub type Float = Complex64;

/// Environment variable overriding the default float tolerance.
pub const EPS_ENV_VAR: &str = "TWINREP_EPS";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub eps: f64,
}

impl Tolerance {
    pub const DEFAULT_EPS: f64 = 1e-9;

    pub fn new(eps: f64) -> Result<Self> {
        if eps.is_finite() && eps > 0.0 {
            Ok(Self { eps })
        } else {
            Err(Error::Precondition(format!(
                "tolerance must be positive and finite, got {eps}"
            )))
        }
    }

    /// Default tolerance, overridden by `TWINREP_EPS` when it is set.
    pub fn from_env() -> Result<Self> {
        match std::env::var(EPS_ENV_VAR) {
            Ok(text) => {
                let eps: f64 = text.trim().parse().map_err(|_| {
                    Error::Precondition(format!("{EPS_ENV_VAR}={text:?} is not a number"))
                })?;
                Self::new(eps)
            }
            Err(_) => Ok(Self::default()),
        }
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            eps: Self::DEFAULT_EPS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Exact,
    Float,
}

impl Backend {
    pub fn as_str(self) -> &'static str {
        match self {
            Backend::Exact => "exact",
            Backend::Float => "float",
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Backend::Exact),
            "float" => Ok(Backend::Float),
            other => Err(Error::Precondition(format!("unknown backend {other:?}"))),
        }
    }
}

/// A complex field the linear algebra can run over.
///
/// Plain `/` is only used after the divisor has been checked against the
/// tolerance; use [`Field::checked_div`] when the divisor is unchecked.
pub trait Field:
    Clone
    + PartialEq
    + fmt::Debug
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const BACKEND: Backend;

    fn from_i64(v: i64) -> Self;
    fn from_bigint(v: &BigInt) -> Self;
    /// Exact mode takes the exact binary value of `v`.
    fn from_f64(v: f64) -> Self;
    fn i() -> Self;
    fn conj(&self) -> Self;

    /// Exact: `x == 0`. Float: `|x| <= eps`.
    fn is_zero_tol(&self, tol: Tolerance) -> bool;

    /// Exact: equality. Float: `|x - y| <= eps * max(1, |x|, |y|)`.
    fn approx_eq(&self, other: &Self, tol: Tolerance) -> bool;

    /// Modulus as a double (approximate for exact values).
    fn magnitude(&self) -> f64;

    fn to_complex64(&self) -> Complex64;
    fn to_scalar(&self) -> Scalar;
    fn from_scalar(s: &Scalar) -> Result<Self>;

    fn from_ratio(p: i64, q: i64) -> Self {
        assert!(q != 0, "zero denominator");
        Self::from_i64(p) / Self::from_i64(q)
    }

    fn checked_div(&self, rhs: &Self, tol: Tolerance) -> Result<Self> {
        if rhs.is_zero_tol(tol) {
            return Err(Error::DivisionByZero);
        }
        Ok(self.clone() / rhs.clone())
    }

    /// Integer power; a negative exponent inverts first.
    ///
    /// Panics in exact mode when `self` is zero and `e < 0`.
    fn powi(&self, e: i64) -> Self {
        let mut base = if e < 0 {
            Self::one() / self.clone()
        } else {
            self.clone()
        };
        let mut e = e.unsigned_abs();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            e >>= 1;
            if e > 0 {
                base = base.clone() * base;
            }
        }
        acc
    }
}

impl Field for Exact {
    const BACKEND: Backend = Backend::Exact;

    fn from_i64(v: i64) -> Self {
        Complex::new(BigRational::from_integer(BigInt::from(v)), BigRational::zero())
    }

    fn from_bigint(v: &BigInt) -> Self {
        Complex::new(BigRational::from_integer(v.clone()), BigRational::zero())
    }

    fn from_f64(v: f64) -> Self {
        let re = BigRational::from_float(v).expect("finite float");
        Complex::new(re, BigRational::zero())
    }

    fn i() -> Self {
        Complex::new(BigRational::zero(), BigRational::one())
    }

    fn conj(&self) -> Self {
        Complex::conj(self)
    }

    fn is_zero_tol(&self, _tol: Tolerance) -> bool {
        self.is_zero()
    }

    fn approx_eq(&self, other: &Self, _tol: Tolerance) -> bool {
        self == other
    }

    fn magnitude(&self) -> f64 {
        self.to_complex64().norm()
    }

    fn to_complex64(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }

    fn to_scalar(&self) -> Scalar {
        Scalar::Exact(self.clone())
    }

    fn from_scalar(s: &Scalar) -> Result<Self> {
        s.to_exact()
    }
}

impl Field for Float {
    const BACKEND: Backend = Backend::Float;

    fn from_i64(v: i64) -> Self {
        Complex64::new(v as f64, 0.0)
    }

    fn from_bigint(v: &BigInt) -> Self {
        Complex64::new(v.to_f64().unwrap_or(f64::NAN), 0.0)
    }

    fn from_f64(v: f64) -> Self {
        Complex64::new(v, 0.0)
    }

    fn i() -> Self {
        Complex64::new(0.0, 1.0)
    }

    fn conj(&self) -> Self {
        Complex::conj(self)
    }

    fn is_zero_tol(&self, tol: Tolerance) -> bool {
        self.norm() <= tol.eps
    }

    fn approx_eq(&self, other: &Self, tol: Tolerance) -> bool {
        let scale = 1f64.max(self.norm()).max(other.norm());
        (self - other).norm() <= tol.eps * scale
    }

    fn magnitude(&self) -> f64 {
        self.norm()
    }

    fn to_complex64(&self) -> Complex64 {
        *self
    }

    fn to_scalar(&self) -> Scalar {
        Scalar::Float(*self)
    }

    fn from_scalar(s: &Scalar) -> Result<Self> {
        Ok(s.to_float())
    }
}

/// A scalar of either backend, as read from text or JSON.
#[derive(Debug, Clone, PartialEq)]
pub enum Scalar {
    Exact(Exact),
    Float(Float),
}

fn exact_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"^\s*([+-]?\d+)/(\d+)\s*([+-])\s*([+-]?\d+)/(\d+)\*i\s*$").unwrap()
    })
}

fn float_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    const DEC: &str = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?";
    RE.get_or_init(|| {
        Regex::new(&format!(r"^\s*([+-]?{DEC})\s*([+-])\s*([+-]?{DEC})i\s*$")).unwrap()
    })
}

fn parse_ratio(num: &str, den: &str, text: &str) -> Result<BigRational> {
    let p: BigInt = num
        .parse()
        .map_err(|_| Error::MalformedScalar(text.to_string()))?;
    let q: BigInt = den
        .parse()
        .map_err(|_| Error::MalformedScalar(text.to_string()))?;
    if q.is_zero() {
        return Err(Error::ZeroDenominator(text.to_string()));
    }
    Ok(BigRational::new(p, q))
}

impl Scalar {
    /// Parses `p/q+r/s*i` (exact) or `x+yi` (float).
    pub fn parse(text: &str) -> Result<Self> {
        if let Some(c) = exact_re().captures(text) {
            let re = parse_ratio(&c[1], &c[2], text)?;
            let mut im = parse_ratio(&c[4], &c[5], text)?;
            if &c[3] == "-" {
                im = -im;
            }
            return Ok(Scalar::Exact(Complex::new(re, im)));
        }
        if let Some(c) = float_re().captures(text) {
            let re: f64 = c[1]
                .parse()
                .map_err(|_| Error::MalformedScalar(text.to_string()))?;
            let mut im: f64 = c[3]
                .parse()
                .map_err(|_| Error::MalformedScalar(text.to_string()))?;
            if &c[2] == "-" {
                im = -im;
            }
            return Ok(Scalar::Float(Complex64::new(re, im)));
        }
        Err(Error::MalformedScalar(text.to_string()))
    }

    pub fn backend(&self) -> Backend {
        match self {
            Scalar::Exact(_) => Backend::Exact,
            Scalar::Float(_) => Backend::Float,
        }
    }

    pub fn is_zero(&self, tol: Tolerance) -> bool {
        match self {
            Scalar::Exact(x) => x.is_zero_tol(tol),
            Scalar::Float(x) => x.is_zero_tol(tol),
        }
    }

    /// Exact value of the scalar; floats convert to their exact binary value.
    pub fn to_exact(&self) -> Result<Exact> {
        match self {
            Scalar::Exact(x) => Ok(x.clone()),
            Scalar::Float(x) => {
                let conv = |v: f64| {
                    BigRational::from_float(v).ok_or_else(|| {
                        Error::Precondition(format!("{v} has no exact rational value"))
                    })
                };
                Ok(Complex::new(conv(x.re)?, conv(x.im)?))
            }
        }
    }

    pub fn to_float(&self) -> Float {
        match self {
            Scalar::Exact(x) => x.to_complex64(),
            Scalar::Float(x) => *x,
        }
    }
}

impl FromStr for Scalar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scalar::parse(s)
    }
}

fn fmt_ratio(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(x) => {
                let sign = if x.im.is_negative() { '-' } else { '+' };
                write!(f, "{}{}{}*i", fmt_ratio(&x.re), sign, fmt_ratio(&x.im.abs()))
            }
            Scalar::Float(x) => {
                let sign = if x.im.is_sign_negative() { '-' } else { '+' };
                write!(f, "{}{}{}i", x.re, sign, x.im.abs())
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ScalarRepr {
    Exact { re: [String; 2], im: [String; 2] },
    Float { re: f64, im: f64 },
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let repr = match self {
            Scalar::Exact(x) => ScalarRepr::Exact {
                re: [x.re.numer().to_string(), x.re.denom().to_string()],
                im: [x.im.numer().to_string(), x.im.denom().to_string()],
            },
            Scalar::Float(x) => ScalarRepr::Float { re: x.re, im: x.im },
        };
        repr.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        match ScalarRepr::deserialize(deserializer)? {
            ScalarRepr::Exact { re, im } => {
                let text = format!("{}/{}+{}/{}*i", re[0], re[1], im[0], im[1]);
                let re = parse_ratio(&re[0], &re[1], &text).map_err(D::Error::custom)?;
                let im = parse_ratio(&im[0], &im[1], &text).map_err(D::Error::custom)?;
                Ok(Scalar::Exact(Complex::new(re, im)))
            }
            ScalarRepr::Float { re, im } => Ok(Scalar::Float(Complex64::new(re, im))),
        }
    }
}
