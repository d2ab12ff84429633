//! Irreducibility verdicts for the reduced first family, with invariant
//! subspaces as witnesses when the answer is "reducible".

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::chain::chain_closed_form;
use crate::error::{precondition, Error, Result};
use crate::linalg::{Matrix, Subspace};
use crate::poly::eval_p;
use crate::reduction::Family1;
use crate::rep::GeneratorImage;
use crate::scalar::{Field, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Status {
    Irreducible,
    Reducible,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Irreducible => "Irreducible",
            Status::Reducible => "Reducible",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Reason {
    #[serde(rename = "a=1")]
    AIsOne,
    #[serde(rename = "a=-1")]
    AIsMinusOne,
    #[serde(rename = "root-of-P")]
    RootOfP,
    #[serde(rename = "T3-special")]
    T3Special,
    #[serde(rename = "oracle-only")]
    OracleOnly,
    #[serde(rename = "a=0")]
    AIsZero,
    #[serde(rename = "not-a-root")]
    NotARoot,
    #[serde(rename = "T3-generic")]
    T3Generic,
}

impl Reason {
    pub fn as_str(&self) -> &'static str {
        match self {
            Reason::AIsOne => "a=1",
            Reason::AIsMinusOne => "a=-1",
            Reason::RootOfP => "root-of-P",
            Reason::T3Special => "T3-special",
            Reason::OracleOnly => "oracle-only",
            Reason::AIsZero => "a=0",
            Reason::NotARoot => "not-a-root",
            Reason::T3Generic => "T3-generic",
        }
    }
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Diagnostics {
    /// Smallest rank gap met while checking the witness (float only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank_gap: Option<f64>,
    /// `|P(a)|` on the polynomial branch.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
}

/// Reducible verdicts carry a proper, nonzero invariant witness in the
/// standard coordinates of the reduced representation.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict<F> {
    pub status: Status,
    pub reason: Reason,
    pub witness: Option<Subspace<F>>,
    pub diagnostics: Diagnostics,
}

/// Checks `g·x ∈ W` for every image `g` and basis vector `x`; returns the
/// outcome and the smallest rank gap seen.
pub fn witness_check_with_gap<F: Field>(
    images: &[Matrix<F>],
    w: &Subspace<F>,
    tol: Tolerance,
) -> Result<(bool, f64)> {
    let mut gap = f64::INFINITY;
    for g in images {
        if !g.is_square() || g.rows() != w.ambient_dim() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} image acting on a {}-dimensional space",
                g.rows(),
                g.cols(),
                w.ambient_dim()
            )));
        }
        for x in w.basis() {
            let (inside, g_gap) = w.contains_with_gap(&(g * x), tol)?;
            gap = gap.min(g_gap);
            if !inside {
                return Ok((false, gap));
            }
        }
    }
    Ok((true, gap))
}

pub fn witness_check<F: Field>(
    images: &[Matrix<F>],
    w: &Subspace<F>,
    tol: Tolerance,
) -> Result<bool> {
    Ok(witness_check_with_gap(images, w, tol)?.0)
}

pub fn image_matrices<F: Field>(images: &[GeneratorImage<F>]) -> Vec<Matrix<F>> {
    images.iter().map(|g| g.matrix.clone()).collect()
}

/// Decides irreducibility of the reduced representation for `n ≥ 3`.
pub fn decide<F: Field>(n: usize, a: F, b: F, tol: Tolerance) -> Result<Verdict<F>> {
    if n < 3 {
        return Err(precondition(format!("decide needs n >= 3, got {n}")));
    }
    let fam = Family1::new(n, a, b, tol)?;
    let mut verdict = if n == 3 { decide_t3(&fam)? } else { decide_general(&fam)? };

    if let Some(w) = &verdict.witness {
        let images = image_matrices(&fam.reduced_generators());
        let (ok, gap) = witness_check_with_gap(&images, w, tol)?;
        if !ok || !w.is_proper() {
            return Err(Error::WitnessRejected(format!(
                "{}-dimensional witness for reason {}",
                w.dim(),
                verdict.reason
            )));
        }
        if gap.is_finite() {
            verdict.diagnostics.rank_gap = Some(gap);
        }
    }
    Ok(verdict)
}

fn reducible<F>(reason: Reason, witness: Subspace<F>) -> Verdict<F> {
    Verdict {
        status: Status::Reducible,
        reason,
        witness: Some(witness),
        diagnostics: Diagnostics::default(),
    }
}

fn irreducible<F>(reason: Reason) -> Verdict<F> {
    Verdict {
        status: Status::Irreducible,
        reason,
        witness: None,
        diagnostics: Diagnostics::default(),
    }
}

fn line<F: Field>(v: Matrix<F>, tol: Tolerance) -> Result<Subspace<F>> {
    Subspace::from_basis(v.rows(), vec![v], tol)
}

/// `Σ_{k=1}^{n-1} (b/2)^{n-1-k} e_k`, invariant when `a = -1`.
fn minus_one_witness<F: Field>(fam: &Family1<F>) -> Matrix<F> {
    let d = fam.n() - 1;
    let half_b = fam.b().clone() / F::from_i64(2);
    Matrix::column((1..=d).map(|k| half_b.powi((d - k) as i64)).collect())
}

fn decide_t3<F: Field>(fam: &Family1<F>) -> Result<Verdict<F>> {
    let tol = fam.tol();
    let e1 = Matrix::unit(2, 0);
    if fam.a_is_one() {
        return Ok(reducible(Reason::AIsOne, line(e1, tol)?));
    }
    if fam.a_is_minus_one() {
        return Ok(reducible(Reason::AIsMinusOne, line(minus_one_witness(fam), tol)?));
    }
    let a = fam.a().clone();
    if (a.clone() * a + F::from_i64(3)).is_zero_tol(tol) {
        let w = fam.eigvec_w()?;
        return Ok(reducible(Reason::T3Special, line(w, tol)?));
    }
    Ok(irreducible(Reason::T3Generic))
}

fn decide_general<F: Field>(fam: &Family1<F>) -> Result<Verdict<F>> {
    let tol = fam.tol();
    let d = fam.n() - 1;
    if fam.a_is_one() {
        return Ok(reducible(Reason::AIsOne, line(Matrix::unit(d, 0), tol)?));
    }
    if fam.a_is_minus_one() {
        return Ok(reducible(Reason::AIsMinusOne, line(minus_one_witness(fam), tol)?));
    }
    if fam.a().is_zero_tol(tol) {
        return Ok(irreducible(Reason::AIsZero));
    }
    let p_value = eval_p(fam.n(), fam.a(), tol)?;
    let residual = p_value.magnitude();
    let mut verdict = if p_value.is_zero_tol(tol) {
        let (p, _) = fam.basis_change_b()?;
        let mut vectors = vec![p.col(0)];
        for k in 1..=fam.n() - 3 {
            vectors.push(&p * &chain_closed_form(fam, k)?);
        }
        reducible(Reason::RootOfP, Subspace::span(d, vectors, tol)?)
    } else {
        irreducible(Reason::NotARoot)
    };
    verdict.diagnostics.residual = Some(residual);
    Ok(verdict)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rep::RepSpec;
    use crate::scalar::{Exact, Float};

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn decide_examples() {
        let v = decide(3, Exact::from_i64(2), Exact::from_i64(1), tol()).unwrap();
        assert_eq!(v.status, Status::Irreducible);

        let v = decide(4, Float::new(0.0, 1.0), Float::new(1.0, 0.0), tol()).unwrap();
        assert_eq!((v.status, v.reason), (Status::Reducible, Reason::RootOfP));
        assert_eq!(v.witness.unwrap().dim(), 2);

        let v = decide(4, Exact::i(), Exact::from_i64(1), tol()).unwrap();
        assert_eq!((v.status, v.reason), (Status::Reducible, Reason::RootOfP));

        let v = decide(6, Exact::from_i64(1), Exact::from_i64(3), tol()).unwrap();
        assert_eq!((v.status, v.reason), (Status::Reducible, Reason::AIsOne));
        let w = v.witness.unwrap();
        assert!(w.same_span(&Subspace::span(5, vec![Matrix::unit(5, 0)], tol()).unwrap(), tol()).unwrap());

        let v = decide(7, Exact::from_i64(0), Exact::from_i64(3), tol()).unwrap();
        assert_eq!((v.status, v.reason), (Status::Irreducible, Reason::AIsZero));

        assert!(decide(2, Exact::from_i64(2), Exact::from_i64(1), tol()).is_err());
        assert!(decide(4, Exact::from_i64(2), Exact::from_i64(0), tol()).is_err());
    }

    #[test]
    fn t3_cases() {
        let s3 = 3f64.sqrt();
        for (a, reason) in [
            (Float::new(1.0, 0.0), Reason::AIsOne),
            (Float::new(-1.0, 0.0), Reason::AIsMinusOne),
            (Float::new(0.0, s3), Reason::T3Special),
            (Float::new(0.0, -s3), Reason::T3Special),
        ] {
            let v = decide(3, a, Float::new(1.0, 0.0), tol()).unwrap();
            assert_eq!((v.status, v.reason), (Status::Reducible, reason));
            assert_eq!(v.witness.unwrap().dim(), 1);
        }
        let v = decide(3, Float::new(0.0, s3 + 1e-3), Float::new(1.0, 0.0), tol()).unwrap();
        assert_eq!(v.status, Status::Irreducible);
    }

    #[test]
    fn witness_check_examples() {
        let fam = Family1::new(5, Exact::from_i64(3), Exact::from_ratio(1, 2), tol()).unwrap();
        let full = image_matrices(&fam.spec().generators());
        let line = Subspace::span(5, vec![fam.invariant_vector()], tol()).unwrap();
        assert!(witness_check(&full, &line, tol()).unwrap());

        let fam = Family1::new(5, Exact::from_i64(2), Exact::from_i64(1), tol()).unwrap();
        let reduced = image_matrices(&fam.reduced_generators());
        let e1 = Subspace::span(4, vec![Matrix::unit(4, 0)], tol()).unwrap();
        assert!(!witness_check(&reduced, &e1, tol()).unwrap());
        assert!(witness_check(&reduced, &Subspace::full(4), tol()).unwrap());
        assert!(witness_check(&full, &e1, tol()).is_err());
    }

    #[test]
    fn family_two_and_three_witnesses() {
        for n in 3..9 {
            for sign in [1, -1] {
                let spec = RepSpec::family2(n, Exact::from_ratio(5, 3), crate::rep::Sign::from_i64(sign).unwrap()).unwrap();
                let images = image_matrices(&spec.generators());
                let en = Subspace::span(n, vec![Matrix::unit(n, n - 1)], tol()).unwrap();
                assert!(witness_check(&images, &en, tol()).unwrap());
            }
            let images = image_matrices(&RepSpec::<Exact>::family3(n).unwrap().generators());
            for k in 0..n {
                let ek = Subspace::span(n, vec![Matrix::unit(n, k)], tol()).unwrap();
                assert!(witness_check(&images, &ek, tol()).unwrap());
            }
        }
    }

    #[test]
    fn b_does_not_change_status() {
        for b in [1, -3, 7] {
            for a in [2, 5, -4] {
                let v = decide(6, Exact::from_i64(a), Exact::from_i64(b), tol()).unwrap();
                assert_eq!(v.status, Status::Irreducible);
            }
        }
    }
}
