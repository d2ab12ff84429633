//! Reduction of the first family by its invariant line, and the eigenbasis
//! of the reduced `s₁` image used by the irreducibility analysis.
//!
//! With `r = (1-a)/b`, the vector `v = Σ r^{k-1} e_k` is fixed by every
//! `ξ₁(s_k)`. Changing basis to `{v, e₂, …, e_n}` and deleting the first row
//! and column gives the `(n-1)`-dimensional representation `ξ̃₁`. In the
//! basis `B = {w, e₂, …, e_{n-1}}`, where `w` is the `-1` eigenvector of
//! `ξ̃₁(s₁)`, the images are written `S_j`.

use crate::error::{precondition, Error, Result};
use crate::linalg::Matrix;
use crate::rep::{embed_block, family1_block, GeneratorImage, RepSpec};
use crate::scalar::{Field, Tolerance};

/// Parameters of a family-1 representation, validated once.
#[derive(Debug, Clone, PartialEq)]
pub struct Family1<F> {
    n: usize,
    a: F,
    b: F,
    tol: Tolerance,
}

impl<F: Field> Family1<F> {
    pub fn new(n: usize, a: F, b: F, tol: Tolerance) -> Result<Self> {
        if n < 2 {
            return Err(precondition(format!("n must be at least 2, got {n}")));
        }
        if b.is_zero_tol(tol) {
            return Err(precondition("b must be nonzero"));
        }
        Ok(Self { n, a, b, tol })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn a(&self) -> &F {
        &self.a
    }

    pub fn b(&self) -> &F {
        &self.b
    }

    pub fn tol(&self) -> Tolerance {
        self.tol
    }

    pub fn spec(&self) -> RepSpec<F> {
        RepSpec::family1(self.n, self.a.clone(), self.b.clone(), self.tol)
            .expect("parameters already validated")
    }

    pub fn block(&self) -> Matrix<F> {
        family1_block(&self.a, &self.b)
    }

    pub fn a_is_one(&self) -> bool {
        self.a.approx_eq(&F::one(), self.tol)
    }

    pub fn a_is_minus_one(&self) -> bool {
        self.a.approx_eq(&-F::one(), self.tol)
    }

    /// Standing assumption of the basis-B analysis: `a ∉ {1, -1}`.
    pub fn require_generic(&self) -> Result<()> {
        if self.a_is_one() || self.a_is_minus_one() {
            return Err(precondition("requires a not in {1, -1}"));
        }
        Ok(())
    }

    fn one_minus_a(&self) -> F {
        F::one() - self.a.clone()
    }

    fn one_plus_a(&self) -> F {
        F::one() + self.a.clone()
    }

    fn check_k(&self, k: usize) -> Result<()> {
        let max = self.n - 1;
        if k == 0 || k > max {
            return Err(Error::IndexOutOfRange { k, max });
        }
        Ok(())
    }

    /// `v = Σ ((1-a)/b)^{k-1} e_k`, fixed by every generator image.
    pub fn invariant_vector(&self) -> Matrix<F> {
        let r = self.one_minus_a() / self.b.clone();
        let mut entries = Vec::with_capacity(self.n);
        let mut cur = F::one();
        for _ in 0..self.n {
            entries.push(cur.clone());
            cur = cur * r.clone();
        }
        Matrix::column(entries)
    }

    /// `Q = I + (v - e₁)e₁ᵀ` and its Sherman–Morrison inverse `I - (v - e₁)e₁ᵀ`.
    pub fn change_of_basis(&self) -> (Matrix<F>, Matrix<F>) {
        let v = self.invariant_vector();
        let mut q = Matrix::identity(self.n);
        let mut q_inv = Matrix::identity(self.n);
        for r in 1..self.n {
            q.set(r, 0, v.get(r, 0).clone());
            q_inv.set(r, 0, -v.get(r, 0).clone());
        }
        (q, q_inv)
    }

    /// `Q⁻¹ ξ₁(s_k) Q`, computed by matrix products.
    pub fn conjugated_generator(&self, k: usize) -> Result<Matrix<F>> {
        self.check_k(k)?;
        let (q, q_inv) = self.change_of_basis();
        let g = self.spec().generator(k)?.matrix;
        Ok(&(&q_inv * &g) * &q)
    }

    /// Closed form of `ξ̃₁(s_k)`.
    ///
    /// `s₁` maps to the identity with first column
    /// `(-1, (a-1)²/(-b), …, (a-1)^{n-1}/(-b)^{n-2})ᵀ`; for `k ≥ 2` the image is
    /// `I_{k-2} ⊕ M ⊕ I_{n-k-1}`.
    pub fn reduced_generator(&self, k: usize) -> Result<Matrix<F>> {
        self.check_k(k)?;
        let d = self.n - 1;
        if k >= 2 {
            return Ok(embed_block(d, k - 2, &self.block()));
        }
        let mut m = Matrix::identity(d);
        m.set(0, 0, -F::one());
        let a_minus_1 = self.a.clone() - F::one();
        let minus_b = -self.b.clone();
        for row in 2..=d {
            let v = a_minus_1.powi(row as i64) / minus_b.powi(row as i64 - 1);
            m.set(row - 1, 0, v);
        }
        Ok(m)
    }

    pub fn reduced_generators(&self) -> Vec<GeneratorImage<F>> {
        (1..self.n)
            .map(|k| GeneratorImage {
                k,
                matrix: self.reduced_generator(k).expect("k in range"),
            })
            .collect()
    }

    pub fn reduction(&self) -> ReductionBundle<F> {
        let (q, q_inv) = self.change_of_basis();
        ReductionBundle {
            n: self.n,
            v: self.invariant_vector(),
            q,
            q_inv,
            reduced_gens: self.reduced_generators(),
        }
    }

    /// `-1` eigenvector `w` of `ξ̃₁(s₁)`:
    /// `w₁ = 2b^{n-2}/(1-a)^{n-1}`, `w_j = (b/(1-a))^{n-j-1}` for `j ≥ 2`.
    pub fn eigvec_w(&self) -> Result<Matrix<F>> {
        if self.n < 3 {
            return Err(precondition("basis B needs n >= 3"));
        }
        if self.a_is_one() {
            return Err(precondition("w is undefined at a = 1"));
        }
        let n = self.n as i64;
        let oma = self.one_minus_a();
        let mut entries = Vec::with_capacity(self.n - 1);
        entries.push(F::from_i64(2) * self.b.powi(n - 2) / oma.powi(n - 1));
        let ratio = self.b.clone() / oma;
        for j in 2..n {
            entries.push(ratio.powi(n - j - 1));
        }
        Ok(Matrix::column(entries))
    }

    /// `P = I + (w - e₁)e₁ᵀ` and `P⁻¹ = I - (1/w₁)(w - e₁)e₁ᵀ`.
    pub fn basis_change_b(&self) -> Result<(Matrix<F>, Matrix<F>)> {
        self.require_generic()?;
        let w = self.eigvec_w()?;
        let d = self.n - 1;
        let w1 = w.get(0, 0).clone();
        let mut p = Matrix::identity(d);
        let mut p_inv = Matrix::identity(d);
        p.set(0, 0, w1.clone());
        p_inv.set(0, 0, F::one() / w1.clone());
        for r in 1..d {
            p.set(r, 0, w.get(r, 0).clone());
            p_inv.set(r, 0, -w.get(r, 0).clone() / w1.clone());
        }
        Ok((p, p_inv))
    }

    /// Closed form of `S_j = P⁻¹ ξ̃₁(s_j) P`.
    pub fn s_matrix(&self, j: usize) -> Result<Matrix<F>> {
        self.require_generic()?;
        self.check_k(j)?;
        if self.n < 3 {
            return Err(precondition("basis B needs n >= 3"));
        }
        let d = self.n - 1;
        match j {
            1 => {
                let mut s = Matrix::identity(d);
                s.set(0, 0, -F::one());
                Ok(s)
            }
            2 => Ok(self.s2_closed_form()),
            _ => Ok(embed_block(d, j - 2, &self.block())),
        }
    }

    fn s2_closed_form(&self) -> Matrix<F> {
        let n = self.n as i64;
        let d = self.n - 1;
        let (a, b) = (&self.a, &self.b);
        let two = F::from_i64(2);
        let oma = self.one_minus_a();
        let opa = self.one_plus_a();
        let a2 = a.clone() * a.clone();
        let one_plus_a2 = F::one() + a2.clone();

        let mut s = Matrix::identity(d);
        s.set(0, 0, one_plus_a2.clone() / two.clone());
        s.set(0, 1, oma.powi(n - 1) / (two.clone() * b.powi(n - 3)));
        s.set(
            1,
            0,
            (F::from_i64(3) + a2) * opa.clone() * b.powi(n - 3)
                / (two.clone() * oma.powi(n - 2)),
        );
        s.set(1, 1, -one_plus_a2 / two.clone());
        for row in 3..=d {
            let j = row as i64;
            s.set(
                row - 1,
                0,
                opa.clone() * b.powi(n - j - 1) / (two.clone() * oma.powi(n - j - 2)),
            );
            s.set(row - 1, 1, -oma.powi(j) / (two.clone() * b.powi(j - 2)));
        }
        s
    }

    /// `P⁻¹ ξ̃₁(s_j) P` by matrix products.
    pub fn s_matrix_by_conjugation(&self, j: usize) -> Result<Matrix<F>> {
        let (p, p_inv) = self.basis_change_b()?;
        let g = self.reduced_generator(j)?;
        Ok(&(&p_inv * &g) * &p)
    }

    pub fn basis_b(&self) -> Result<BasisBBundle<F>> {
        let (p, p_inv) = self.basis_change_b()?;
        let s = (1..self.n)
            .map(|j| self.s_matrix(j))
            .collect::<Result<Vec<_>>>()?;
        Ok(BasisBBundle {
            w: self.eigvec_w()?,
            p,
            p_inv,
            s,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReductionBundle<F> {
    pub n: usize,
    pub v: Matrix<F>,
    pub q: Matrix<F>,
    pub q_inv: Matrix<F>,
    pub reduced_gens: Vec<GeneratorImage<F>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasisBBundle<F> {
    pub w: Matrix<F>,
    pub p: Matrix<F>,
    pub p_inv: Matrix<F>,
    /// `S₁ … S_{n-1}`
    pub s: Vec<Matrix<F>>,
}
