//! Basis-independent irreducibility tests.
//!
//! The unital algebra generated by `d×d` matrices over ℂ is all of `M_d(ℂ)`
//! exactly when they act irreducibly, so its dimension decides the question.
//! Invariant lines of a set of involutions are common eigenvectors, found by
//! intersecting eigenspaces.

use crate::error::{Error, Result};
use crate::irreducibility::{Diagnostics, Reason, Status, Verdict};
use crate::linalg::{Matrix, Subspace};
use crate::scalar::{Backend, Field, Scalar, Tolerance};

#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraBasis<F> {
    pub d: usize,
    pub basis: Vec<Matrix<F>>,
    pub closed: bool,
    /// Smallest accepted residual over largest rejected one; infinite when
    /// nothing was rejected or in exact arithmetic.
    pub rank_gap: f64,
}

impl<F> AlgebraBasis<F> {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// Echelon span of flattened matrices; each row has a unit pivot and is zero
/// at the pivots of all earlier rows.
struct ReducedSpan<F> {
    rows: Vec<(usize, Vec<F>)>,
    min_accepted: f64,
    max_rejected: f64,
}

impl<F: Field> ReducedSpan<F> {
    fn new() -> Self {
        Self {
            rows: Vec::new(),
            min_accepted: f64::INFINITY,
            max_rejected: 0.0,
        }
    }

    fn norm(v: &[F]) -> f64 {
        v.iter().map(F::magnitude).fold(0.0, f64::max)
    }

    /// Adds `v` if it is independent of the current span.
    fn insert(&mut self, mut v: Vec<F>, tol: Tolerance) -> bool {
        let scale = Self::norm(&v);
        if scale == 0.0 {
            return false;
        }
        for (p, row) in &self.rows {
            let f = v[*p].clone();
            if f.is_zero() {
                continue;
            }
            for (x, r) in v.iter_mut().zip(row) {
                *x = x.clone() - f.clone() * r.clone();
            }
        }
        let left = Self::norm(&v) / scale;
        let exact = F::BACKEND == Backend::Exact;
        let dependent = if exact { v.iter().all(F::is_zero) } else { left <= tol.eps };
        if dependent {
            if !exact {
                self.max_rejected = self.max_rejected.max(left);
            }
            return false;
        }
        let pivot = if exact {
            v.iter().position(|x| !x.is_zero()).expect("nonzero vector")
        } else {
            (0..v.len())
                .max_by(|&i, &j| v[i].magnitude().total_cmp(&v[j].magnitude()))
                .expect("nonempty vector")
        };
        let inv = F::one() / v[pivot].clone();
        for x in v.iter_mut() {
            *x = x.clone() * inv.clone();
        }
        v[pivot] = F::one();
        self.rows.push((pivot, v));
        if !exact {
            self.min_accepted = self.min_accepted.min(left);
        }
        true
    }

    fn gap(&self) -> f64 {
        if self.max_rejected > 0.0 {
            self.min_accepted / self.max_rejected
        } else {
            f64::INFINITY
        }
    }
}

fn flatten<F: Field>(m: &Matrix<F>) -> Vec<F> {
    (0..m.rows()).flat_map(|r| m.row(r).to_vec()).collect()
}

fn check_images<F: Field>(images: &[Matrix<F>]) -> Result<usize> {
    let first = images
        .first()
        .ok_or_else(|| Error::Precondition("no generator images".into()))?;
    let d = first.rows();
    for g in images {
        if !g.is_square() || g.rows() != d {
            return Err(Error::DimensionMismatch(format!(
                "expected {d}x{d} images, found {}x{}",
                g.rows(),
                g.cols()
            )));
        }
    }
    Ok(d)
}

/// Arithmetic in `𝔽_p` for a prime `p ≡ 1 (mod 4)`, with `ι² = -1`.
mod modp {
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::{ToPrimitive, Zero};

    use crate::scalar::Exact;

    pub const P: u64 = 4_611_686_018_427_387_817;
    const IOTA: u64 = 120_863_620_846_201_794;

    pub fn add(a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= P {
            s - P
        } else {
            s
        }
    }

    pub fn sub(a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + P - b
        }
    }

    pub fn mul(a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % P as u128) as u64
    }

    pub fn inv(a: u64) -> u64 {
        let (mut base, mut e, mut acc) = (a, P - 2, 1u64);
        while e > 0 {
            if e & 1 == 1 {
                acc = mul(acc, base);
            }
            base = mul(base, base);
            e >>= 1;
        }
        acc
    }

    fn from_bigint(x: &BigInt) -> u64 {
        let p = BigInt::from(P);
        (((x % &p) + &p) % &p).to_u64().expect("reduced below p")
    }

    fn from_rational(x: &BigRational) -> Option<u64> {
        let den = from_bigint(x.denom());
        if den.is_zero() {
            return None;
        }
        Some(mul(from_bigint(x.numer()), inv(den)))
    }

    /// Image under `i ↦ ι`; `None` when a denominator vanishes mod `p`.
    pub fn from_exact(x: &Exact) -> Option<u64> {
        Some(add(from_rational(&x.re)?, mul(IOTA, from_rational(&x.im)?)))
    }
}

fn matmul_modp(a: &[u64], b: &[u64], d: usize) -> Vec<u64> {
    let mut out = vec![0u64; d * d];
    for i in 0..d {
        for k in 0..d {
            let x = a[i * d + k];
            if x == 0 {
                continue;
            }
            for j in 0..d {
                out[i * d + j] = modp::add(out[i * d + j], modp::mul(x, b[k * d + j]));
            }
        }
    }
    out
}

/// Exact-mode shortcut: the closure reduced mod `p`. Words independent mod `p`
/// are independent over ℚ(i), so reaching `d²` there proves the full algebra.
/// Returns the accepted words only in that case.
fn full_closure_modp<F: Field>(images: &[Matrix<F>], d: usize) -> Option<Vec<Matrix<F>>> {
    let to_fp = |m: &Matrix<F>| -> Option<Vec<u64>> {
        flatten(m)
            .iter()
            .map(|x| match x.to_scalar() {
                Scalar::Exact(e) => modp::from_exact(&e),
                Scalar::Float(_) => None,
            })
            .collect()
    };
    let gens: Vec<Vec<u64>> = images.iter().map(to_fp).collect::<Option<_>>()?;
    let cap = d * d;
    let mut rows: Vec<(usize, Vec<u64>)> = Vec::new();
    let mut words: Vec<(Matrix<F>, Vec<u64>)> = Vec::new();

    let mut offer = |mut v: Vec<u64>, word: &dyn Fn() -> Matrix<F>, words: &mut Vec<(Matrix<F>, Vec<u64>)>| {
        let original = v.clone();
        for (p, row) in &rows {
            let f = v[*p];
            if f == 0 {
                continue;
            }
            for (x, r) in v.iter_mut().zip(row) {
                *x = modp::sub(*x, modp::mul(f, *r));
            }
        }
        let Some(pivot) = v.iter().position(|&x| x != 0) else {
            return;
        };
        let inv = modp::inv(v[pivot]);
        for x in v.iter_mut() {
            *x = modp::mul(*x, inv);
        }
        rows.push((pivot, v));
        words.push((word(), original));
    };

    offer(to_fp(&Matrix::identity(d))?, &|| Matrix::identity(d), &mut words);
    for (g, gf) in images.iter().zip(&gens) {
        offer(gf.clone(), &|| g.clone(), &mut words);
    }
    let mut next = 0;
    while next < words.len() && words.len() < cap {
        let (x, xf) = words[next].clone();
        for (g, gf) in images.iter().zip(&gens) {
            offer(matmul_modp(gf, &xf, d), &|| g * &x, &mut words);
            offer(matmul_modp(&xf, gf, d), &|| &x * g, &mut words);
        }
        next += 1;
    }
    (words.len() == cap).then(|| words.into_iter().map(|(w, _)| w).collect())
}

/// Closes `{I} ∪ images` under left and right multiplication by the images.
pub fn algebra_basis<F: Field>(images: &[Matrix<F>], tol: Tolerance) -> Result<AlgebraBasis<F>> {
    let d = check_images(images)?;
    if F::BACKEND == Backend::Exact {
        if let Some(basis) = full_closure_modp(images, d) {
            return Ok(AlgebraBasis {
                d,
                basis,
                closed: true,
                rank_gap: f64::INFINITY,
            });
        }
    }
    closure(images, d, tol)
}

fn closure<F: Field>(images: &[Matrix<F>], d: usize, tol: Tolerance) -> Result<AlgebraBasis<F>> {
    let cap = d * d;
    let mut span = ReducedSpan::new();
    let mut basis: Vec<Matrix<F>> = Vec::new();

    let offer = |m: Matrix<F>, span: &mut ReducedSpan<F>, basis: &mut Vec<Matrix<F>>| -> Result<()> {
        if span.insert(flatten(&m), tol) {
            basis.push(m);
            if basis.len() > cap {
                return Err(Error::ClosureOverflow(format!("basis exceeded {cap} elements")));
            }
        }
        Ok(())
    };

    offer(Matrix::identity(d), &mut span, &mut basis)?;
    for g in images {
        offer(g.clone(), &mut span, &mut basis)?;
    }
    let mut next = 0;
    while next < basis.len() && basis.len() < cap {
        let x = basis[next].clone();
        for g in images {
            offer(g * &x, &mut span, &mut basis)?;
            offer(&x * g, &mut span, &mut basis)?;
        }
        next += 1;
    }
    Ok(AlgebraBasis {
        d,
        basis,
        closed: true,
        rank_gap: span.gap(),
    })
}

pub fn algebra_dimension<F: Field>(images: &[Matrix<F>], tol: Tolerance) -> Result<usize> {
    Ok(algebra_basis(images, tol)?.dim())
}

pub fn is_irreducible_oracle<F: Field>(images: &[Matrix<F>], tol: Tolerance) -> Result<bool> {
    let alg = algebra_basis(images, tol)?;
    Ok(alg.dim() == alg.d * alg.d)
}

/// Simultaneous eigenspaces of a set of involutions, each nonzero.
pub fn common_eigenspaces<F: Field>(
    images: &[Matrix<F>],
    tol: Tolerance,
) -> Result<Vec<Subspace<F>>> {
    let d = check_images(images)?;
    let id = Matrix::identity(d);
    let mut candidates = vec![Subspace::full(d)];
    for g in images {
        if !(g * g).approx_eq(&id, tol) {
            return Err(Error::NotInvolution);
        }
        let plus = g.sub(&id)?.kernel(tol);
        let minus = g.add(&id)?.kernel(tol);
        let mut refined = Vec::new();
        for c in &candidates {
            for e in [&plus, &minus] {
                let s = c.intersect(e, tol)?;
                if s.dim() > 0 {
                    refined.push(s);
                }
            }
        }
        candidates = refined;
    }
    Ok(candidates)
}

/// All invariant lines of a set of involutions, without repeats.
///
/// Every line inside a common eigenspace is invariant; only 1-dimensional
/// eigenspaces give finitely many, and those are the ones returned.
pub fn common_eigenlines<F: Field>(
    images: &[Matrix<F>],
    tol: Tolerance,
) -> Result<Vec<Subspace<F>>> {
    let mut lines: Vec<Subspace<F>> = Vec::new();
    for s in common_eigenspaces(images, tol)? {
        if s.dim() != 1 {
            continue;
        }
        let mut seen = false;
        for l in &lines {
            if l.same_span(&s, tol)? {
                seen = true;
                break;
            }
        }
        if !seen {
            lines.push(s);
        }
    }
    Ok(lines)
}

/// Verdict from the algebra dimension alone; the witness, when present, is a
/// common eigenline.
pub fn oracle_verdict<F: Field>(images: &[Matrix<F>], tol: Tolerance) -> Result<Verdict<F>> {
    let alg = algebra_basis(images, tol)?;
    let irreducible = alg.dim() == alg.d * alg.d;
    let witness = if irreducible {
        None
    } else {
        common_eigenlines(images, tol).ok().and_then(|l| l.into_iter().next())
    };
    Ok(Verdict {
        status: if irreducible { Status::Irreducible } else { Status::Reducible },
        reason: Reason::OracleOnly,
        witness,
        diagnostics: Diagnostics {
            rank_gap: alg.rank_gap.is_finite().then_some(alg.rank_gap),
            residual: None,
        },
    })
}
