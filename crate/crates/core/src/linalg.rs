//! Dense matrices over a [`Field`] and the subspace operations built on them.
//!
//! Vectors are `n x 1` matrices throughout. Every rank-type decision runs
//! through one Gauss-Jordan routine so exact and float mode share a single
//! code path; in float mode a pivot is accepted when it exceeds
//! `eps * max|A_ij|`, and the ratio between the smallest accepted and the
//! largest rejected pivot is reported as the rank gap.

use std::fmt;
use std::ops::Mul;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::{Backend, Exact, Field, Float, Scalar, Tolerance};

#[derive(Clone, PartialEq)]
pub struct Matrix<F> {
    rows: usize,
    cols: usize,
    data: Vec<F>,
}

impl<F: fmt::Debug> fmt::Debug for Matrix<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", &self.data[r * self.cols..(r + 1) * self.cols])?;
        }
        write!(f, "]")
    }
}

/// Result of a rank computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankInfo {
    pub rank: usize,
    /// Smallest accepted pivot over largest rejected pivot. Infinite when no
    /// pivot was rejected or the rejected ones were exactly zero (always the
    /// case in exact mode).
    pub gap: f64,
}

struct Echelon<F> {
    rref: Matrix<F>,
    pivots: Vec<usize>,
    gap: f64,
}

impl<F: Field> Matrix<F> {
    pub fn new(rows: usize, cols: usize, data: Vec<F>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: Vec<Vec<F>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Self::new(r, c, rows.into_iter().flatten().collect())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> F) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from small integers, handy in tests and fixed tables.
    pub fn from_i64_rows(rows: &[&[i64]]) -> Self {
        Self::from_rows(
            rows.iter()
                .map(|row| row.iter().map(|&v| F::from_i64(v)).collect())
                .collect(),
        )
        .expect("rows of equal length")
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| F::zero())
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |r, c| if r == c { F::one() } else { F::zero() })
    }

    /// Column vector from its entries.
    pub fn column(entries: Vec<F>) -> Self {
        let rows = entries.len();
        Self {
            rows,
            cols: 1,
            data: entries,
        }
    }

    /// Standard basis vector `e_{i+1}` of length `n` (zero-based `i`).
    pub fn unit(n: usize, i: usize) -> Self {
        Self::from_fn(n, 1, |r, _| if r == i { F::one() } else { F::zero() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[F] {
        &self.data
    }

    pub fn into_data(self) -> Vec<F> {
        self.data
    }

    pub fn get(&self, r: usize, c: usize) -> &F {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: F) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[F] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn col(&self, c: usize) -> Matrix<F> {
        Matrix::from_fn(self.rows, 1, |r, _| self.get(r, c).clone())
    }

    pub fn to_rows(&self) -> Vec<Vec<F>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r).clone())
    }

    pub fn map<G>(&self, f: impl Fn(&F) -> G) -> Matrix<G> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn to_float(&self) -> Matrix<Float> {
        self.map(F::to_complex64)
    }

    pub fn matmul(&self, rhs: &Matrix<F>) -> Result<Matrix<F>> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Matrix::<F>::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..rhs.cols {
                    let b = rhs.get(k, c);
                    if b.is_zero() {
                        continue;
                    }
                    let idx = r * out.cols + c;
                    out.data[idx] = out.data[idx].clone() + a.clone() * b.clone();
                }
            }
        }
        Ok(out)
    }

    fn zip_with(&self, rhs: &Matrix<F>, f: impl Fn(F, F) -> F) -> Result<Matrix<F>> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(x, y)| f(x.clone(), y.clone()))
                .collect(),
        })
    }

    pub fn add(&self, rhs: &Matrix<F>) -> Result<Matrix<F>> {
        self.zip_with(rhs, |x, y| x + y)
    }

    pub fn sub(&self, rhs: &Matrix<F>) -> Result<Matrix<F>> {
        self.zip_with(rhs, |x, y| x - y)
    }

    pub fn scale(&self, s: &F) -> Matrix<F> {
        self.map(|x| x.clone() * s.clone())
    }

    /// Block-diagonal sum of square or rectangular blocks.
    pub fn direct_sum(blocks: &[&Matrix<F>]) -> Matrix<F> {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = Matrix::zeros(rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            for r in 0..b.rows {
                for c in 0..b.cols {
                    out.set(r0 + r, c0 + c, b.get(r, c).clone());
                }
            }
            r0 += b.rows;
            c0 += b.cols;
        }
        out
    }

    /// Columns side by side.
    pub fn hstack(parts: &[&Matrix<F>]) -> Result<Matrix<F>> {
        let rows = parts.first().map_or(0, |p| p.rows);
        if parts.iter().any(|p| p.rows != rows) {
            return Err(Error::DimensionMismatch("hstack row counts differ".into()));
        }
        let cols = parts.iter().map(|p| p.cols).sum();
        let mut out = Matrix::zeros(rows, cols);
        let mut c0 = 0;
        for p in parts {
            for r in 0..rows {
                for c in 0..p.cols {
                    out.set(r, c0 + c, p.get(r, c).clone());
                }
            }
            c0 += p.cols;
        }
        Ok(out)
    }

    /// Drops one row and one column (zero-based).
    pub fn minor(&self, row: usize, col: usize) -> Matrix<F> {
        let keep_r: Vec<usize> = (0..self.rows).filter(|&r| r != row).collect();
        let keep_c: Vec<usize> = (0..self.cols).filter(|&c| c != col).collect();
        Matrix::from_fn(keep_r.len(), keep_c.len(), |r, c| {
            self.get(keep_r[r], keep_c[c]).clone()
        })
    }

    pub fn approx_eq(&self, rhs: &Matrix<F>, tol: Tolerance) -> bool {
        self.rows == rhs.rows
            && self.cols == rhs.cols
            && self.data.iter().zip(&rhs.data).all(|(x, y)| x.approx_eq(y, tol))
    }

    pub fn is_identity(&self, tol: Tolerance) -> bool {
        self.is_square() && self.approx_eq(&Matrix::identity(self.rows), tol)
    }

    pub fn is_zero_tol(&self, tol: Tolerance) -> bool {
        self.data.iter().all(|x| x.is_zero_tol(tol))
    }

    pub fn max_magnitude(&self) -> f64 {
        self.data.iter().map(F::magnitude).fold(0.0, f64::max)
    }

    fn pivot_threshold(&self, tol: Tolerance) -> f64 {
        match F::BACKEND {
            Backend::Exact => 0.0,
            Backend::Float => tol.eps * self.max_magnitude(),
        }
    }

    fn pick_pivot(&self, col: usize, from: usize, threshold: f64) -> (Option<usize>, f64) {
        match F::BACKEND {
            Backend::Exact => ((from..self.rows).find(|&r| !self.get(r, col).is_zero()), 0.0),
            Backend::Float => {
                let mut best = None;
                let mut best_mag = 0.0;
                for r in from..self.rows {
                    let m = self.get(r, col).magnitude();
                    if m > best_mag {
                        best_mag = m;
                        best = Some(r);
                    }
                }
                if best_mag > threshold {
                    (best, best_mag)
                } else {
                    (None, best_mag)
                }
            }
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    fn echelon(&self, tol: Tolerance) -> Echelon<F> {
        let mut m = self.clone();
        let threshold = self.pivot_threshold(tol);
        let mut pivots = Vec::new();
        let mut min_accepted = f64::INFINITY;
        let mut max_rejected: f64 = 0.0;
        let mut prow = 0;
        for col in 0..m.cols {
            if prow == m.rows {
                break;
            }
            let (pick, mag) = m.pick_pivot(col, prow, threshold);
            let Some(p) = pick else {
                max_rejected = max_rejected.max(mag);
                continue;
            };
            min_accepted = min_accepted.min(mag);
            m.swap_rows(prow, p);
            let inv = F::one() / m.get(prow, col).clone();
            for c in col..m.cols {
                let v = m.get(prow, c).clone() * inv.clone();
                m.set(prow, c, v);
            }
            for r in 0..m.rows {
                if r == prow {
                    continue;
                }
                let factor = m.get(r, col).clone();
                if factor.is_zero() {
                    continue;
                }
                for c in col..m.cols {
                    let v = m.get(r, c).clone() - factor.clone() * m.get(prow, c).clone();
                    m.set(r, c, v);
                }
            }
            pivots.push(col);
            prow += 1;
        }
        let gap = if max_rejected > 0.0 {
            min_accepted / max_rejected
        } else {
            f64::INFINITY
        };
        Echelon {
            rref: m,
            pivots,
            gap,
        }
    }

    pub fn rank(&self, tol: Tolerance) -> usize {
        self.rank_info(tol).rank
    }

    pub fn rank_info(&self, tol: Tolerance) -> RankInfo {
        let e = self.echelon(tol);
        RankInfo {
            rank: e.pivots.len(),
            gap: e.gap,
        }
    }

    /// Null space `{x : A x = 0}`.
    pub fn kernel(&self, tol: Tolerance) -> Subspace<F> {
        let e = self.echelon(tol);
        let mut basis = Vec::new();
        for free in (0..self.cols).filter(|c| !e.pivots.contains(c)) {
            let mut x = Matrix::zeros(self.cols, 1);
            x.set(free, 0, F::one());
            for (i, &pc) in e.pivots.iter().enumerate() {
                x.set(pc, 0, -e.rref.get(i, free).clone());
            }
            basis.push(x);
        }
        Subspace {
            ambient_dim: self.cols,
            basis,
        }
    }

    pub fn det(&self) -> Result<F> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "determinant of a {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let mut m = self.clone();
        let n = m.rows;
        let mut det = F::one();
        for col in 0..n {
            let (pick, _) = m.pick_pivot(col, col, 0.0);
            let Some(p) = pick else {
                return Ok(F::zero());
            };
            if p != col {
                m.swap_rows(p, col);
                det = -det;
            }
            let pivot = m.get(col, col).clone();
            det = det * pivot.clone();
            for r in col + 1..n {
                let factor = m.get(r, col).clone() / pivot.clone();
                if factor.is_zero() {
                    continue;
                }
                for c in col..n {
                    let v = m.get(r, c).clone() - factor.clone() * m.get(col, c).clone();
                    m.set(r, c, v);
                }
            }
        }
        Ok(det)
    }

    pub fn inverse(&self, tol: Tolerance) -> Result<Matrix<F>> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "inverse of a {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        let threshold = self.pivot_threshold(tol);
        let mut m = Matrix::hstack(&[self, &Matrix::identity(n)])?;
        for col in 0..n {
            let (pick, _) = m.pick_pivot(col, col, threshold);
            let Some(p) = pick else {
                return Err(Error::Singular { column: col });
            };
            m.swap_rows(col, p);
            let inv = F::one() / m.get(col, col).clone();
            for c in 0..2 * n {
                let v = m.get(col, c).clone() * inv.clone();
                m.set(col, c, v);
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let factor = m.get(r, col).clone();
                if factor.is_zero() {
                    continue;
                }
                for c in 0..2 * n {
                    let v = m.get(r, c).clone() - factor.clone() * m.get(col, c).clone();
                    m.set(r, c, v);
                }
            }
        }
        Ok(Matrix::from_fn(n, n, |r, c| m.get(r, n + c).clone()))
    }

    /// Rescales every column to unit max-modulus (float mode only) and
    /// returns the factors applied. Zero columns are kept as they are.
    fn normalize_columns(&self) -> (Matrix<F>, Vec<F>) {
        let mut out = self.clone();
        let mut factors = vec![F::one(); self.cols];
        if F::BACKEND == Backend::Exact {
            return (out, factors);
        }
        for (c, factor) in factors.iter_mut().enumerate() {
            let m = (0..self.rows)
                .map(|r| self.get(r, c).magnitude())
                .fold(0.0, f64::max);
            if m > 0.0 {
                *factor = F::from_f64(1.0 / m);
                for r in 0..self.rows {
                    let v = out.get(r, c).clone() * factor.clone();
                    out.set(r, c, v);
                }
            }
        }
        (out, factors)
    }
}

impl<'a, F: Field> Mul<&'a Matrix<F>> for &'a Matrix<F> {
    type Output = Matrix<F>;

    fn mul(self, rhs: &'a Matrix<F>) -> Matrix<F> {
        self.matmul(rhs).expect("matrix product dimensions")
    }
}

/// Subspace of `F^n` with a linearly independent basis of column vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace<F> {
    ambient_dim: usize,
    basis: Vec<Matrix<F>>,
}

impl<F: Field> Subspace<F> {
    pub fn zero(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            basis: Vec::new(),
        }
    }

    pub fn full(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            basis: (0..ambient_dim).map(|i| Matrix::unit(ambient_dim, i)).collect(),
        }
    }

    /// Span of `vectors`, keeping a linearly independent subset as basis.
    pub fn span(ambient_dim: usize, vectors: Vec<Matrix<F>>, tol: Tolerance) -> Result<Self> {
        let mut out = Self::zero(ambient_dim);
        for v in vectors {
            out.check_vector(&v)?;
            if !out.contains(&v, tol)? {
                out.basis.push(v);
            }
        }
        Ok(out)
    }

    /// Uses `vectors` as the basis; fails if they are dependent.
    pub fn from_basis(ambient_dim: usize, vectors: Vec<Matrix<F>>, tol: Tolerance) -> Result<Self> {
        let count = vectors.len();
        let s = Self::span(ambient_dim, vectors, tol)?;
        if s.dim() != count {
            return Err(Error::Precondition(format!(
                "{count} vectors span only a {}-dimensional space",
                s.dim()
            )));
        }
        Ok(s)
    }

    fn check_vector(&self, x: &Matrix<F>) -> Result<()> {
        if x.cols() != 1 || x.rows() != self.ambient_dim {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vector in a {}-dimensional space",
                x.rows(),
                x.cols(),
                self.ambient_dim
            )));
        }
        Ok(())
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Matrix<F>] {
        &self.basis
    }

    pub fn is_proper(&self) -> bool {
        self.dim() > 0 && self.dim() < self.ambient_dim
    }

    /// Basis vectors as the columns of one matrix.
    pub fn as_matrix(&self) -> Matrix<F> {
        if self.basis.is_empty() {
            return Matrix::zeros(self.ambient_dim, 0);
        }
        let refs: Vec<&Matrix<F>> = self.basis.iter().collect();
        Matrix::hstack(&refs).expect("basis vectors share a length")
    }

    pub fn contains(&self, x: &Matrix<F>, tol: Tolerance) -> Result<bool> {
        Ok(self.contains_with_gap(x, tol)?.0)
    }

    /// Membership plus the rank gap of the augmented basis.
    pub fn contains_with_gap(&self, x: &Matrix<F>, tol: Tolerance) -> Result<(bool, f64)> {
        self.check_vector(x)?;
        let mut cols: Vec<&Matrix<F>> = self.basis.iter().collect();
        cols.push(x);
        let (aug, _) = Matrix::hstack(&cols)?.normalize_columns();
        let info = aug.rank_info(tol);
        Ok((info.rank == self.dim(), info.gap))
    }

    /// Same span.
    pub fn same_span(&self, other: &Subspace<F>, tol: Tolerance) -> Result<bool> {
        if self.ambient_dim != other.ambient_dim || self.dim() != other.dim() {
            return Ok(false);
        }
        for v in &other.basis {
            if !self.contains(v, tol)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn intersect(&self, other: &Subspace<F>, tol: Tolerance) -> Result<Subspace<F>> {
        if self.ambient_dim != other.ambient_dim {
            return Err(Error::DimensionMismatch("intersecting different ambients".into()));
        }
        if self.dim() == 0 || other.dim() == 0 {
            return Ok(Subspace::zero(self.ambient_dim));
        }
        let u = self.as_matrix();
        let v = other.as_matrix().scale(&-F::one());
        let (stacked, scales) = Matrix::hstack(&[&u, &v])?.normalize_columns();
        let ker = stacked.kernel(tol);
        let mut vectors = Vec::new();
        for k in ker.basis() {
            let coeffs = Matrix::from_fn(u.cols(), 1, |r, _| k.get(r, 0).clone() * scales[r].clone());
            vectors.push(&u * &coeffs);
        }
        Subspace::span(self.ambient_dim, vectors, tol)
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    rows: usize,
    cols: usize,
    backend: Backend,
    data: Vec<Vec<Scalar>>,
}

impl<F: Field> Serialize for Matrix<F> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson {
            rows: self.rows,
            cols: self.cols,
            backend: F::BACKEND,
            data: (0..self.rows)
                .map(|r| self.row(r).iter().map(F::to_scalar).collect())
                .collect(),
        }
        .serialize(serializer)
    }
}

fn matrix_from_json<F: Field>(j: MatrixJson) -> Result<Matrix<F>> {
    if j.backend != F::BACKEND {
        return Err(Error::BackendMismatch {
            expected: F::BACKEND.as_str(),
            found: j.backend.as_str(),
        });
    }
    if j.data.len() != j.rows || j.data.iter().any(|row| row.len() != j.cols) {
        return Err(Error::DimensionMismatch(format!(
            "data does not match declared {}x{}",
            j.rows, j.cols
        )));
    }
    let mut data = Vec::with_capacity(j.rows * j.cols);
    for s in j.data.iter().flatten() {
        if s.backend() != F::BACKEND {
            return Err(Error::BackendMismatch {
                expected: F::BACKEND.as_str(),
                found: s.backend().as_str(),
            });
        }
        data.push(F::from_scalar(s)?);
    }
    Matrix::new(j.rows, j.cols, data)
}

impl<'de, F: Field> Deserialize<'de> for Matrix<F> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let j = MatrixJson::deserialize(deserializer)?;
        matrix_from_json(j).map_err(D::Error::custom)
    }
}

/// A matrix of whichever backend its JSON declares.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyMatrix {
    Exact(Matrix<Exact>),
    Float(Matrix<Float>),
}

impl AnyMatrix {
    pub fn backend(&self) -> Backend {
        match self {
            AnyMatrix::Exact(_) => Backend::Exact,
            AnyMatrix::Float(_) => Backend::Float,
        }
    }
}

impl Serialize for AnyMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            AnyMatrix::Exact(m) => m.serialize(serializer),
            AnyMatrix::Float(m) => m.serialize(serializer),
        }
    }
}

impl<'de> Deserialize<'de> for AnyMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let j = MatrixJson::deserialize(deserializer)?;
        match j.backend {
            Backend::Exact => matrix_from_json(j).map(AnyMatrix::Exact),
            Backend::Float => matrix_from_json(j).map(AnyMatrix::Float),
        }
        .map_err(D::Error::custom)
    }
}
