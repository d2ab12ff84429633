//! The cleared polynomial `P̂_n(t) = 2t(1+t)^{n-4} P(t)` with integer
//! coefficients, the rational function `P` itself, and a root finder.

use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{precondition, Error, Result};
use crate::scalar::{Field, Tolerance};

/// Dense polynomial over ℤ, coefficients in ascending degree, no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IntPoly {
    coeffs: Vec<BigInt>,
}

impl IntPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn constant(c: i64) -> Self {
        Self::from_i64(&[c])
    }

    /// The monomial `t`.
    pub fn t() -> Self {
        Self::from_i64(&[0, 1])
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut out = Self::constant(1);
        for _ in 0..e {
            out = &out * self;
        }
        out
    }

    /// Multiplicity of the root `t = 0`.
    pub fn zero_multiplicity(&self) -> usize {
        self.coeffs.iter().take_while(|c| c.is_zero()).count()
    }

    /// Divides by `t^m`; requires the low `m` coefficients to vanish.
    pub fn shift_down(&self, m: usize) -> Self {
        assert!(m <= self.zero_multiplicity(), "t^{m} does not divide");
        Self::new(self.coeffs[m..].to_vec())
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * BigInt::from(k))
                .collect(),
        )
    }

    pub fn eval<F: Field>(&self, x: &F) -> F {
        self.coeffs
            .iter()
            .rev()
            .fold(F::zero(), |acc, c| acc * x.clone() + F::from_bigint(c))
    }

    pub fn to_complex(&self) -> Vec<Complex64> {
        self.coeffs
            .iter()
            .map(|c| Complex64::new(c.to_f64().unwrap_or(f64::INFINITY), 0.0))
            .collect()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|c| c.abs().to_f64().unwrap_or(f64::INFINITY))
            .fold(0.0, f64::max)
    }
}

fn zip_with(a: &IntPoly, b: &IntPoly, f: impl Fn(&BigInt, &BigInt) -> BigInt) -> IntPoly {
    let zero = BigInt::zero();
    let len = a.coeffs.len().max(b.coeffs.len());
    IntPoly::new(
        (0..len)
            .map(|i| f(a.coeffs.get(i).unwrap_or(&zero), b.coeffs.get(i).unwrap_or(&zero)))
            .collect(),
    )
}

impl Add for &IntPoly {
    type Output = IntPoly;
    fn add(self, rhs: &IntPoly) -> IntPoly {
        zip_with(self, rhs, |x, y| x + y)
    }
}

impl Sub for &IntPoly {
    type Output = IntPoly;
    fn sub(self, rhs: &IntPoly) -> IntPoly {
        zip_with(self, rhs, |x, y| x - y)
    }
}

impl Neg for &IntPoly {
    type Output = IntPoly;
    fn neg(self) -> IntPoly {
        IntPoly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Mul for &IntPoly {
    type Output = IntPoly;
    fn mul(self, rhs: &IntPoly) -> IntPoly {
        if self.is_zero() || rhs.is_zero() {
            return IntPoly::default();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, x) in self.coeffs.iter().enumerate() {
            for (j, y) in rhs.coeffs.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        IntPoly::new(out)
    }
}

/// Horner evaluation of complex-coefficient polynomials.
fn horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(Complex64::zero(), |acc, &c| acc * z + c)
}

fn require_n(n: usize) -> Result<()> {
    if n < 4 {
        return Err(precondition(format!("the polynomial criterion needs n >= 4, got {n}")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClearedPoly {
    pub n: usize,
    pub poly: IntPoly,
    /// Roots introduced by clearing denominators; always `[0]`.
    pub spurious_roots: Vec<i64>,
}

/// `8t(1+t²)(1+t)^{n-4} + (1-t)⁴[(1+t)^{n-4} - (1-t)^{n-4}]`.
pub fn cleared_poly(n: usize) -> Result<ClearedPoly> {
    require_n(n)?;
    let e = (n - 4) as u32;
    let t = IntPoly::t();
    let one_plus = IntPoly::from_i64(&[1, 1]);
    let one_minus = IntPoly::from_i64(&[1, -1]);
    let one_plus_sq = IntPoly::from_i64(&[1, 0, 1]);

    let first = &(&(&IntPoly::constant(8) * &t) * &one_plus_sq) * &one_plus.pow(e);
    let bracket = &one_plus.pow(e) - &one_minus.pow(e);
    let second = &one_minus.pow(4) * &bracket;
    Ok(ClearedPoly {
        n,
        poly: &first + &second,
        spurious_roots: vec![0],
    })
}

/// `P(a) = 4(1+a²) + (1-a)⁴/(2a) (1 - ((1-a)/(1+a))^{n-4})`.
pub fn eval_p<F: Field>(n: usize, a: &F, tol: Tolerance) -> Result<F> {
    require_n(n)?;
    if a.is_zero_tol(tol) {
        return Err(precondition("P has a pole at a = 0"));
    }
    let one = F::one();
    if (a.clone() + one.clone()).is_zero_tol(tol) {
        return Err(precondition("P has a pole at a = -1"));
    }
    let oma = one.clone() - a.clone();
    let ratio = oma.clone() / (one.clone() + a.clone());
    Ok(F::from_i64(4) * (one.clone() + a.clone() * a.clone())
        + oma.powi(4) / (F::from_i64(2) * a.clone()) * (one - ratio.powi(n as i64 - 4)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Root {
    pub re: f64,
    pub im: f64,
    /// Backward error `|P̂_n(r)| / Σ|c_k||r|^k`.
    pub residual: f64,
    /// `|P̂_n(r)|`
    pub abs_value: f64,
}

impl Root {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

const DK_TARGET: f64 = 1e-13;
const DK_MAX_ITER: usize = 500;

/// Nonzero roots of `P̂_n`: Durand–Kerner on `P̂_n / t^m`, then Newton polishing
/// on `P̂_n`. Roots are returned sorted by `(re, im)`.
pub fn roots_of_p(n: usize, tol: Tolerance) -> Result<Vec<Root>> {
    let cp = cleared_poly(n)?;
    let m = cp.poly.zero_multiplicity();
    let reduced = cp.poly.shift_down(m);
    let full = cp.poly.to_complex();
    let full_d = cp.poly.derivative().to_complex();

    let mut zs = durand_kerner(&reduced.to_complex());
    for z in zs.iter_mut() {
        *z = newton_polish(&full, &full_d, *z);
    }
    let mut roots: Vec<Root> = zs
        .into_iter()
        .map(|z| Root {
            re: z.re,
            im: z.im,
            residual: relative_residual(&full, z),
            abs_value: horner(&full, z).norm(),
        })
        .collect();
    let worst = roots.iter().map(|r| r.residual).fold(0.0, f64::max);
    if !worst.is_finite() || worst > tol.eps {
        return Err(Error::NoConvergence { worst_residual: worst });
    }
    roots.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    Ok(roots)
}

/// Backward error of `z` as a root: `|p(z)| / Σ|c_k||z|^k`.
fn relative_residual(coeffs: &[Complex64], z: Complex64) -> f64 {
    let abs: Vec<Complex64> = coeffs.iter().map(|c| Complex64::new(c.norm(), 0.0)).collect();
    let denom = horner(&abs, Complex64::new(z.norm(), 0.0)).re;
    horner(coeffs, z).norm() / denom.max(f64::MIN_POSITIVE)
}

fn durand_kerner(coeffs: &[Complex64]) -> Vec<Complex64> {
    let d = coeffs.len().saturating_sub(1);
    if d == 0 {
        return Vec::new();
    }
    let lead = coeffs[d];
    let monic: Vec<Complex64> = coeffs.iter().map(|c| c / lead).collect();
    let radius = 1.0 + monic[..d].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut zs: Vec<Complex64> = (0..d)
        .map(|k| Complex64::from_polar(radius, std::f64::consts::TAU * k as f64 / d as f64 + 0.4))
        .collect();
    for _ in 0..DK_MAX_ITER {
        for i in 0..d {
            let denom = (0..d)
                .filter(|&j| j != i)
                .fold(Complex64::one(), |acc, j| acc * (zs[i] - zs[j]));
            if denom.norm() > 0.0 {
                let step = horner(&monic, zs[i]) / denom;
                zs[i] -= step;
            }
        }
        if zs.iter().all(|&z| relative_residual(&monic, z) <= DK_TARGET) {
            break;
        }
    }
    zs
}

fn newton_polish(p: &[Complex64], dp: &[Complex64], mut z: Complex64) -> Complex64 {
    let mut best = horner(p, z).norm();
    for _ in 0..8 {
        let d = horner(dp, z);
        if d.norm() == 0.0 {
            break;
        }
        let next = z - horner(p, z) / d;
        let r = horner(p, next).norm();
        if r >= best {
            break;
        }
        z = next;
        best = r;
    }
    z
}
