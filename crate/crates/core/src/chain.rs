//! Chain vectors in basis B and the determinant `Δ` that decides whether the
//! candidate invariant subspace `W = span(e₁, v₁, …, v_{n-3})` absorbs `S₂e₁`.

use std::fmt;

use crate::error::{precondition, Result};
use crate::linalg::{Matrix, Subspace};
use crate::reduction::Family1;
use crate::scalar::Field;

#[derive(Debug, Clone, PartialEq)]
pub struct ChainBundle<F> {
    pub family: Family1<F>,
    /// `S₂e₁ - ½(a²+1)e₁`
    pub f: Matrix<F>,
    /// `v₁ … v_{n-3}`
    pub v_chain: Vec<Matrix<F>>,
    pub w: Subspace<F>,
}

fn require_chain<F: Field>(fam: &Family1<F>) -> Result<()> {
    if fam.n() < 4 {
        return Err(precondition(format!("chain needs n >= 4, got {}", fam.n())));
    }
    fam.require_generic()
}

/// `v_k = -b e_{k+1} + (1+a) e_{k+2}`, 1-based `k`.
pub fn chain_closed_form<F: Field>(fam: &Family1<F>, k: usize) -> Result<Matrix<F>> {
    require_chain(fam)?;
    if k == 0 || k > fam.n() - 3 {
        return Err(precondition(format!("chain index {k} outside 1..={}", fam.n() - 3)));
    }
    let mut v = Matrix::zeros(fam.n() - 1, 1);
    v.set(k, 0, -fam.b().clone());
    v.set(k + 1, 0, F::one() + fam.a().clone());
    Ok(v)
}

/// Builds the chain by the recurrence
/// `v₁ = (1-a)^{n-3}/(b^{n-4}(1+a)²) (S₃f - f)`,
/// `v_{k+1} = b/((1-a)(1+a)) (S_{k+3}v_k - v_k)`.
pub fn chain_vectors<F: Field>(fam: &Family1<F>) -> Result<ChainBundle<F>> {
    require_chain(fam)?;
    let n = fam.n() as i64;
    let (a, b) = (fam.a().clone(), fam.b().clone());
    let one = F::one();
    let oma = one.clone() - a.clone();
    let opa = one.clone() + a.clone();
    let e1 = Matrix::unit(fam.n() - 1, 0);

    let s2 = fam.s_matrix(2)?;
    let half = (one.clone() + a.clone() * a.clone()) / F::from_i64(2);
    let f = (&s2 * &e1).sub(&e1.scale(&half))?;

    let c1 = oma.powi(n - 3) / (b.powi(n - 4) * opa.clone() * opa.clone());
    let s3 = fam.s_matrix(3)?;
    let mut v_chain = vec![(&s3 * &f).sub(&f)?.scale(&c1)];
    let step = b / (oma * opa);
    for k in 1..fam.n() - 3 {
        let s = fam.s_matrix(k + 3)?;
        let prev = &v_chain[k - 1];
        v_chain.push((&s * prev).sub(prev)?.scale(&step));
    }

    let mut gens = vec![e1];
    gens.extend(v_chain.iter().cloned());
    let w = Subspace::span(fam.n() - 1, gens, fam.tol())?;
    Ok(ChainBundle {
        family: fam.clone(),
        f,
        v_chain,
        w,
    })
}

/// A failed closure identity, described by its left and right sides.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosureFailure(pub String);

impl fmt::Display for ClosureFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ClosureReport {
    pub checked: usize,
    pub failures: Vec<ClosureFailure>,
}

impl ClosureReport {
    pub fn holds(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks how each `S_k` acts on `e₁` and on the chain:
/// `S₁e₁ = -e₁`, `S_k e₁ = e₁` (k ≥ 3), `S₁v_j = v_j`, `S₂v_j = v_j` (j ≥ 2),
/// and for `k ≥ 3`: `S_k v_{k-3} = v_{k-3} + (1-a²)/b v_{k-2}`,
/// `S_k v_{k-2} = -v_{k-2}`, `S_k v_{k-1} = b v_{k-2} + v_{k-1}`, all other `v_j` fixed.
pub fn closure_check<F: Field>(bundle: &ChainBundle<F>) -> Result<ClosureReport> {
    let fam = &bundle.family;
    let tol = fam.tol();
    let n = fam.n();
    let (a, b) = (fam.a().clone(), fam.b().clone());
    let m = bundle.v_chain.len();
    let v = |j: usize| &bundle.v_chain[j - 1];
    let e1 = Matrix::unit(n - 1, 0);
    let mut report = ClosureReport::default();

    let mut check = |label: String, lhs: Matrix<F>, rhs: Matrix<F>| {
        report.checked += 1;
        if !lhs.approx_eq(&rhs, tol) {
            report.failures.push(ClosureFailure(label));
        }
    };

    for k in 1..n {
        let s = fam.s_matrix(k)?;
        let se1 = &s * &e1;
        match k {
            1 => check("S1 e1 = -e1".into(), se1, e1.scale(&-F::one())),
            2 => {}
            _ => check(format!("S{k} e1 = e1"), se1, e1.clone()),
        }
        for j in 1..=m {
            let lhs = &s * v(j);
            let (label, rhs) = if k <= 2 {
                if k == 2 && j == 1 {
                    continue;
                }
                (format!("S{k} v{j} = v{j}"), v(j).clone())
            } else if j + 3 == k {
                let c = (F::one() - a.clone() * a.clone()) / b.clone();
                (
                    format!("S{k} v{j} = v{j} + (1-a^2)/b v{}", j + 1),
                    v(j).add(&v(j + 1).scale(&c))?,
                )
            } else if j + 2 == k {
                (format!("S{k} v{j} = -v{j}"), v(j).scale(&-F::one()))
            } else if j + 1 == k {
                (
                    format!("S{k} v{j} = b v{} + v{j}", j - 1),
                    v(j - 1).scale(&b).add(v(j))?,
                )
            } else {
                (format!("S{k} v{j} = v{j}"), v(j).clone())
            };
            check(label, lhs, rhs);
        }
    }
    Ok(report)
}

/// `Σ_{k=2}^{n} (-1)^{k+1} x_k y₁^{k-2} y₂^{n-k}`.
pub fn det_closed_form<F: Field>(xs: &[F], y1: &F, y2: &F) -> Result<F> {
    let n = xs.len();
    if n < 2 {
        return Err(precondition("det_closed_form needs at least two entries"));
    }
    let mut total = F::zero();
    for k in 2..=n {
        let term = xs[k - 1].clone() * y1.powi(k as i64 - 2) * y2.powi((n - k) as i64);
        if k % 2 == 1 {
            total = total + term;
        } else {
            total = total - term;
        }
    }
    Ok(total)
}

/// Matrix with first column `x`, `(1,2)` entry 1, and for column `j ≥ 3`
/// `y₁` at row `j-1` and `y₂` at row `j`.
pub fn lemma_matrix<F: Field>(xs: &[F], y1: &F, y2: &F) -> Result<Matrix<F>> {
    let n = xs.len();
    if n < 2 {
        return Err(precondition("lemma matrix needs n >= 2"));
    }
    let mut m = Matrix::zeros(n, n);
    for (r, x) in xs.iter().enumerate() {
        m.set(r, 0, x.clone());
    }
    m.set(0, 1, F::one());
    for c in 2..n {
        m.set(c - 1, c, y1.clone());
        m.set(c, c, y2.clone());
    }
    Ok(m)
}

/// `S₂v₁` entry by entry:
/// `(-(1-a)^{n-1}/(2b^{n-4}), (1+a²)b/2, (1-a)³/2 + a + 1, (1-a)^j/(2b^{j-3}) …)`.
pub fn s2v1_display<F: Field>(fam: &Family1<F>) -> Result<Matrix<F>> {
    require_chain(fam)?;
    let n = fam.n() as i64;
    let (a, b) = (fam.a().clone(), fam.b().clone());
    let one = F::one();
    let two = F::from_i64(2);
    let oma = one.clone() - a.clone();
    let mut entries = vec![
        -oma.powi(n - 1) / (two.clone() * b.powi(n - 4)),
        (one.clone() + a.clone() * a.clone()) * b.clone() / two.clone(),
        oma.powi(3) / two.clone() + a + one,
    ];
    for j in 4..n {
        entries.push(oma.powi(j) / (two.clone() * b.powi(j - 3)));
    }
    Ok(Matrix::column(entries))
}

/// `Δ` in closed form:
/// `-b/2 (1+a)^{n-4} [4(1+a²) + (1-a)⁴/(2a) (1 - ((1-a)/(1+a))^{n-4})]`,
/// and `-bn/2` at `a = 0`.
pub fn delta<F: Field>(fam: &Family1<F>) -> Result<F> {
    require_chain(fam)?;
    let n = fam.n() as i64;
    let (a, b) = (fam.a().clone(), fam.b().clone());
    let one = F::one();
    let two = F::from_i64(2);
    let minus_half_b = -b / two.clone();
    if a.is_zero_tol(fam.tol()) {
        return Ok(minus_half_b * F::from_i64(n));
    }
    let oma = one.clone() - a.clone();
    let opa = one.clone() + a.clone();
    let ratio = oma.clone() / opa.clone();
    let bracket = F::from_i64(4) * (one.clone() + a.clone() * a.clone())
        + oma.powi(4) / (two * a) * (one - ratio.powi(n - 4));
    Ok(minus_half_b * opa.powi(n - 4) * bracket)
}

/// `Δ = det(S₂v₁ | e₁ | v₁ | … | v_{n-3})` with `S₂` from conjugation.
pub fn delta_direct<F: Field>(fam: &Family1<F>) -> Result<F> {
    require_chain(fam)?;
    let d = fam.n() - 1;
    let s2 = fam.s_matrix_by_conjugation(2)?;
    let v1 = chain_closed_form(fam, 1)?;
    let mut cols = vec![&s2 * &v1, Matrix::unit(d, 0)];
    for k in 1..=fam.n() - 3 {
        cols.push(chain_closed_form(fam, k)?);
    }
    let refs: Vec<&Matrix<F>> = cols.iter().collect();
    Matrix::hstack(&refs)?.det()
}

/// `Δ` through the lemma with `x = S₂v₁`, `y₁ = -b`, `y₂ = 1+a`.
pub fn delta_via_lemma<F: Field>(fam: &Family1<F>) -> Result<F> {
    let x = s2v1_display(fam)?;
    let xs: Vec<F> = (0..x.rows()).map(|r| x.get(r, 0).clone()).collect();
    det_closed_form(&xs, &-fam.b().clone(), &(F::one() + fam.a().clone()))
}

/// `-(b/2) [4(1+a²)(1+a)^{n-4} + Σ_{k=4}^{n-1} (1-a)^k (1+a)^{n-1-k}]`;
/// the sum is empty for `n = 4`.
pub fn delta_checkpoint<F: Field>(fam: &Family1<F>) -> Result<F> {
    require_chain(fam)?;
    let n = fam.n() as i64;
    let (a, b) = (fam.a().clone(), fam.b().clone());
    let one = F::one();
    let oma = one.clone() - a.clone();
    let opa = one.clone() + a.clone();
    let mut sum = F::from_i64(4) * (one + a.clone() * a) * opa.powi(n - 4);
    for k in 4..n {
        sum = sum + oma.powi(k) * opa.powi(n - 1 - k);
    }
    Ok(-b / F::from_i64(2) * sum)
}

/// Determinant of `(f | e₁ | v₁ | … | v_{n-3})`; vanishes iff `f ∈ W`.
pub fn f_membership_det<F: Field>(bundle: &ChainBundle<F>) -> Result<F> {
    let d = bundle.family.n() - 1;
    let mut cols = vec![bundle.f.clone(), Matrix::unit(d, 0)];
    cols.extend(bundle.v_chain.iter().cloned());
    let refs: Vec<&Matrix<F>> = cols.iter().collect();
    Matrix::hstack(&refs)?.det()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{Exact, Tolerance};
    use num_traits::{One, Zero};
    use proptest::prelude::*;

    type E = Exact;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn fam(n: usize, a: E, b: E) -> Family1<E> {
        Family1::new(n, a, b, tol()).unwrap()
    }

    fn int(x: i64) -> E {
        E::from_i64(x)
    }

    fn ints(v: &[i64]) -> Matrix<E> {
        Matrix::column(v.iter().map(|&x| int(x)).collect())
    }

    #[test]
    fn chain_examples() {
        let c = chain_vectors(&fam(5, int(0), int(1))).unwrap();
        assert_eq!(c.v_chain, vec![ints(&[0, -1, 1, 0]), ints(&[0, 0, -1, 1])]);
        assert_eq!(c.w.dim(), 3);
        let c = chain_vectors(&fam(4, int(3), int(2))).unwrap();
        assert_eq!(c.v_chain, vec![ints(&[0, -2, 4])]);
        assert!(chain_vectors(&fam(3, int(2), int(1))).is_err());
        assert!(chain_vectors(&fam(5, int(-1), int(1))).is_err());
    }

    #[test]
    fn closure_examples() {
        let c = chain_vectors(&fam(6, int(2), int(1))).unwrap();
        let report = closure_check(&c).unwrap();
        assert!(report.holds(), "{:?}", report.failures);
        assert!(report.checked > 10);

        let f = fam(4, int(0), int(1));
        let v1 = chain_closed_form(&f, 1).unwrap();
        assert_eq!(&f.s_matrix(3).unwrap() * &v1, v1.scale(&-E::one()));

        let f = fam(5, int(0), int(1));
        let (v1, v2) = (chain_closed_form(&f, 1).unwrap(), chain_closed_form(&f, 2).unwrap());
        let s4 = f.s_matrix(4).unwrap();
        assert_eq!(&s4 * &v2, v2.scale(&-E::one()));
        assert_eq!(&s4 * &v1, v1.add(&v2).unwrap());
    }

    #[test]
    fn closure_detects_a_broken_chain() {
        let mut c = chain_vectors(&fam(6, int(2), int(1))).unwrap();
        c.v_chain[1] = c.v_chain[1].scale(&int(2));
        assert!(!closure_check(&c).unwrap().holds());
    }

    #[test]
    fn lemma_examples() {
        let xs: Vec<E> = [1, 2, 3, 4].iter().map(|&x| int(x)).collect();
        assert_eq!(det_closed_form(&xs, &int(5), &int(7)).unwrap(), int(-93));
        assert_eq!(lemma_matrix(&xs, &int(5), &int(7)).unwrap().det().unwrap(), int(-93));

        let xs: Vec<E> = [9, 1, 0].iter().map(|&x| int(x)).collect();
        assert_eq!(det_closed_form(&xs, &int(1), &int(1)).unwrap(), int(-1));

        let xs: Vec<E> = [5, 0, 0, 0, 0].iter().map(|&x| int(x)).collect();
        assert!(det_closed_form(&xs, &int(3), &int(-2)).unwrap().is_zero());
    }

    #[test]
    fn delta_examples() {
        assert_eq!(delta(&fam(5, int(0), int(1))).unwrap(), E::from_ratio(-5, 2));
        assert_eq!(delta(&fam(4, int(0), int(3))).unwrap(), int(-6));
        let f = fam(4, int(2), int(1));
        assert_eq!(delta(&f).unwrap(), int(-10));
        assert_eq!(delta_direct(&f).unwrap(), int(-10));
        assert!(delta(&fam(4, int(1), int(1))).is_err());
    }

    fn gauss() -> impl Strategy<Value = E> {
        (-6i64..7, 1i64..5, -4i64..5, 1i64..4)
            .prop_map(|(p, q, r, s)| E::from_ratio(p, q) + E::i() * E::from_ratio(r, s))
    }

    fn generic_a() -> impl Strategy<Value = E> {
        gauss().prop_filter("a not in {0, 1, -1}", |a| {
            !a.is_zero() && *a != E::one() && *a != -E::one()
        })
    }

    fn nonzero() -> impl Strategy<Value = E> {
        gauss().prop_filter("nonzero", |b| !b.is_zero())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]

        #[test]
        fn recurrence_matches_closed_form(n in 4usize..9, a in generic_a(), b in nonzero()) {
            let f = fam(n, a, b);
            let c = chain_vectors(&f).unwrap();
            for k in 1..=n - 3 {
                prop_assert_eq!(&c.v_chain[k - 1], &chain_closed_form(&f, k).unwrap());
            }
            prop_assert!(closure_check(&c).unwrap().holds());
            prop_assert_eq!(c.w.dim(), n - 2);
        }

        #[test]
        fn lemma_closed_form_matches_det(
            xs in proptest::collection::vec(gauss(), 3..11),
            y1 in gauss(),
            y2 in gauss(),
        ) {
            let m = lemma_matrix(&xs, &y1, &y2).unwrap();
            prop_assert_eq!(det_closed_form(&xs, &y1, &y2).unwrap(), m.det().unwrap());
        }

        #[test]
        fn delta_routes_agree(n in 4usize..9, a in generic_a(), b in nonzero()) {
            let f = fam(n, a, b);
            let closed = delta(&f).unwrap();
            prop_assert_eq!(&closed, &delta_direct(&f).unwrap());
            prop_assert_eq!(&closed, &delta_via_lemma(&f).unwrap());
            prop_assert_eq!(&closed, &delta_checkpoint(&f).unwrap());
            let s2v1 = &f.s_matrix(2).unwrap() * &chain_closed_form(&f, 1).unwrap();
            prop_assert_eq!(s2v1, s2v1_display(&f).unwrap());
        }

        #[test]
        fn delta_at_zero(n in 4usize..12, b in nonzero()) {
            let f = fam(n, E::zero(), b.clone());
            let expected = -b * int(n as i64) / int(2);
            prop_assert_eq!(delta(&f).unwrap(), expected.clone());
            prop_assert_eq!(delta_direct(&f).unwrap(), expected);
        }

        #[test]
        fn f_in_w_iff_delta_vanishes(n in 4usize..8, a in generic_a(), b in nonzero()) {
            let f = fam(n, a, b);
            let c = chain_vectors(&f).unwrap();
            let d = f_membership_det(&c).unwrap();
            let contains = c.w.contains(&c.f, tol()).unwrap();
            prop_assert_eq!(contains, d.is_zero());
            prop_assert_eq!(d.is_zero(), delta(&f).unwrap().is_zero());
        }
    }

    #[test]
    fn chain_is_independent_when_a_is_not_minus_one() {
        for n in 4..9 {
            let f = fam(n, E::from_ratio(1, 3), E::from_ratio(-2, 5));
            let mut cols = vec![Matrix::unit(n - 1, 0)];
            for k in 1..=n - 3 {
                cols.push(chain_closed_form(&f, k).unwrap());
            }
            let refs: Vec<&Matrix<E>> = cols.iter().collect();
            assert_eq!(Matrix::hstack(&refs).unwrap().rank(tol()), n - 2);
        }
    }
}
