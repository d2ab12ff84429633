//! The three families of homogeneous 2-local representations of `T_n`,
//! the relation verifier, and the 2x2 block classifier.
//!
//! Generator `s_k` (1-based) acts as `I_{k-1} ⊕ M ⊕ I_{n-k-1}` with one shared
//! block `M` per family:
//!
//! | family | block |
//! |---|---|
//! | 1 | `[[a, b], [(1-a²)/b, -a]]`, `b ≠ 0` |
//! | 2 | `[[±1, 0], [c, ∓1]]` |
//! | 3 | `-I₂` |

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{precondition, Error, Result};
use crate::linalg::Matrix;
use crate::scalar::{Field, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn from_i64(v: i64) -> Result<Self> {
        match v {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            other => Err(precondition(format!("sign must be +1 or -1, got {other}"))),
        }
    }

    pub fn as_i64(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Family<F> {
    One { a: F, b: F },
    Two { c: F, sign: Sign },
    Three,
}

impl<F> Family<F> {
    pub fn tag(&self) -> u8 {
        match self {
            Family::One { .. } => 1,
            Family::Two { .. } => 2,
            Family::Three => 3,
        }
    }
}

/// A classified representation: family, parameters and strand count.
#[derive(Debug, Clone, PartialEq)]
pub struct RepSpec<F> {
    n: usize,
    family: Family<F>,
}

impl<F: Field> RepSpec<F> {
    pub fn new(n: usize, family: Family<F>, tol: Tolerance) -> Result<Self> {
        if n < 2 {
            return Err(precondition(format!("n must be at least 2, got {n}")));
        }
        if let Family::One { b, .. } = &family {
            if b.is_zero_tol(tol) {
                return Err(precondition("family 1 requires b != 0"));
            }
        }
        Ok(Self { n, family })
    }

    pub fn family1(n: usize, a: F, b: F, tol: Tolerance) -> Result<Self> {
        Self::new(n, Family::One { a, b }, tol)
    }

    pub fn family2(n: usize, c: F, sign: Sign) -> Result<Self> {
        Self::new(n, Family::Two { c, sign }, Tolerance::default())
    }

    pub fn family3(n: usize) -> Result<Self> {
        Self::new(n, Family::Three, Tolerance::default())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn family(&self) -> &Family<F> {
        &self.family
    }

    /// The shared 2x2 block `M`.
    pub fn block(&self) -> Matrix<F> {
        match &self.family {
            Family::One { a, b } => family1_block(a, b),
            Family::Two { c, sign } => {
                let s = F::from_i64(sign.as_i64());
                Matrix::from_rows(vec![vec![s.clone(), F::zero()], vec![c.clone(), -s]])
                    .expect("2x2")
            }
            Family::Three => Matrix::identity(2).scale(&-F::one()),
        }
    }

    /// Image of `s_k`, `1 <= k <= n-1`.
    pub fn generator(&self, k: usize) -> Result<GeneratorImage<F>> {
        let max = self.n - 1;
        if k == 0 || k > max {
            return Err(Error::IndexOutOfRange { k, max });
        }
        Ok(GeneratorImage {
            k,
            matrix: embed_block(self.n, k - 1, &self.block()),
        })
    }

    pub fn generators(&self) -> Vec<GeneratorImage<F>> {
        let block = self.block();
        (1..self.n)
            .map(|k| GeneratorImage {
                k,
                matrix: embed_block(self.n, k - 1, &block),
            })
            .collect()
    }
}

/// Family-1 block `[[a, b], [(1-a²)/b, -a]]`; `b` must be nonzero.
pub fn family1_block<F: Field>(a: &F, b: &F) -> Matrix<F> {
    let c = (F::one() - a.clone() * a.clone()) / b.clone();
    Matrix::from_rows(vec![vec![a.clone(), b.clone()], vec![c, -a.clone()]]).expect("2x2")
}

/// `I_offset ⊕ block ⊕ I_rest` of total size `dim`.
pub fn embed_block<F: Field>(dim: usize, offset: usize, block: &Matrix<F>) -> Matrix<F> {
    let before = Matrix::identity(offset);
    let after = Matrix::identity(dim - offset - block.rows());
    Matrix::direct_sum(&[&before, block, &after])
}

/// Image of the generator `s_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "F: Field", deserialize = "F: Field"))]
pub struct GeneratorImage<F> {
    pub k: usize,
    pub matrix: Matrix<F>,
}

impl<F: Field> GeneratorImage<F> {
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }
}

fn subscript(k: usize) -> String {
    const DIGITS: [char; 10] = ['₀', '₁', '₂', '₃', '₄', '₅', '₆', '₇', '₈', '₉'];
    k.to_string()
        .chars()
        .map(|c| DIGITS[c.to_digit(10).unwrap() as usize])
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RelationFailure {
    /// `s_k² ≠ I`
    Involution { k: usize },
    /// `s_i s_j ≠ s_j s_i` with `|i - j| > 1`
    FarCommutation { i: usize, j: usize },
}

impl fmt::Display for RelationFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            RelationFailure::Involution { k } => write!(f, "s{}² ≠ I", subscript(k)),
            RelationFailure::FarCommutation { i, j } => write!(
                f,
                "s{}s{} ≠ s{}s{}",
                subscript(i),
                subscript(j),
                subscript(j),
                subscript(i)
            ),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RelationReport {
    pub failures: Vec<RelationFailure>,
}

impl RelationReport {
    pub fn holds(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for RelationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.failures.is_empty() {
            return f.write_str("all relations hold");
        }
        let parts: Vec<String> = self.failures.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join("; "))
    }
}

/// Checks `s_k² = 1` and `s_i s_j = s_j s_i` for `|i-j| > 1` on the images.
pub fn verify_relations<F: Field>(
    images: &[GeneratorImage<F>],
    tol: Tolerance,
) -> Result<RelationReport> {
    let dim = images.first().map_or(0, GeneratorImage::dim);
    if images
        .iter()
        .any(|g| !g.matrix.is_square() || g.matrix.rows() != dim)
    {
        return Err(Error::DimensionMismatch(
            "generator images must be square and of equal size".into(),
        ));
    }
    let mut report = RelationReport::default();
    for g in images {
        if !(&g.matrix * &g.matrix).is_identity(tol) {
            report.failures.push(RelationFailure::Involution { k: g.k });
        }
    }
    for (x, gi) in images.iter().enumerate() {
        for gj in &images[x + 1..] {
            if gi.k.abs_diff(gj.k) <= 1 {
                continue;
            }
            let ij = &gi.matrix * &gj.matrix;
            let ji = &gj.matrix * &gi.matrix;
            if !ij.approx_eq(&ji, tol) {
                report
                    .failures
                    .push(RelationFailure::FarCommutation { i: gi.k, j: gj.k });
            }
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub enum BlockClass<F> {
    Family1 { a: F, b: F },
    Family2 { c: F, sign: Sign },
    Family3,
    /// `I₂`, excluded from the classification as trivial.
    Trivial,
    NotValid,
}

/// Recognises which family a 2x2 block belongs to.
///
/// The block must square to the identity. With upper-right entry `b ≠ 0`
/// the equation `(a+d)b = 0` forces `d = -a`, which is family 1; with `b = 0`
/// the diagonal decides.
pub fn classify_block<F: Field>(m: &Matrix<F>, tol: Tolerance) -> Result<BlockClass<F>> {
    if m.rows() != 2 || m.cols() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "block must be 2x2, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    if !(m * m).is_identity(tol) {
        return Ok(BlockClass::NotValid);
    }
    let (a, b, c, d) = (m.get(0, 0), m.get(0, 1), m.get(1, 0), m.get(1, 1));
    if !b.is_zero_tol(tol) {
        return Ok(BlockClass::Family1 {
            a: a.clone(),
            b: b.clone(),
        });
    }
    let one = F::one();
    let minus_one = -F::one();
    if m.is_identity(tol) {
        return Ok(BlockClass::Trivial);
    }
    if a.approx_eq(&minus_one, tol) && d.approx_eq(&minus_one, tol) && c.is_zero_tol(tol) {
        return Ok(BlockClass::Family3);
    }
    if a.approx_eq(&one, tol) && d.approx_eq(&minus_one, tol) {
        return Ok(BlockClass::Family2 {
            c: c.clone(),
            sign: Sign::Plus,
        });
    }
    if a.approx_eq(&minus_one, tol) && d.approx_eq(&one, tol) {
        return Ok(BlockClass::Family2 {
            c: c.clone(),
            sign: Sign::Minus,
        });
    }
    Ok(BlockClass::NotValid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Exact;
    use num_traits::{One, Zero};
    use proptest::prelude::*;

    type E = Exact;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn int(v: i64) -> E {
        E::from_i64(v)
    }

    #[test]
    fn blocks_of_each_family() {
        let f1 = RepSpec::family1(2, int(0), int(1), tol()).unwrap();
        assert_eq!(f1.block(), Matrix::from_i64_rows(&[&[0, 1], &[1, 0]]));
        let f3 = RepSpec::<E>::family3(2).unwrap();
        assert_eq!(f3.block(), Matrix::from_i64_rows(&[&[-1, 0], &[0, -1]]));
        let f2 = RepSpec::family2(2, int(0), Sign::Plus).unwrap();
        assert_eq!(f2.block(), Matrix::from_i64_rows(&[&[1, 0], &[0, -1]]));
    }

    #[test]
    fn family1_needs_nonzero_b() {
        assert!(matches!(
            RepSpec::family1(4, int(2), int(0), tol()),
            Err(Error::Precondition(_))
        ));
        assert!(RepSpec::<E>::family3(1).is_err());
    }

    #[test]
    fn generator_layouts() {
        let swap = Matrix::<E>::from_i64_rows(&[&[0, 1], &[1, 0]]);
        let spec = RepSpec::family1(4, int(0), int(1), tol()).unwrap();
        let g2 = spec.generator(2).unwrap().matrix;
        let one = Matrix::identity(1);
        assert_eq!(g2, Matrix::direct_sum(&[&one, &swap, &one]));

        let spec3 = RepSpec::family1(3, int(0), int(1), tol()).unwrap();
        assert_eq!(spec3.generator(1).unwrap().matrix, Matrix::direct_sum(&[&swap, &one]));

        let f3 = RepSpec::<E>::family3(5).unwrap();
        let g4 = f3.generator(4).unwrap().matrix;
        let minus = Matrix::identity(2).scale(&-E::one());
        assert_eq!(g4, Matrix::direct_sum(&[&Matrix::identity(3), &minus]));

        assert_eq!(
            spec.generator(4),
            Err(Error::IndexOutOfRange { k: 4, max: 3 })
        );
        assert!(spec.generator(0).is_err());
    }

    #[test]
    fn relations_hold_for_families() {
        let f1 = RepSpec::family1(5, int(2), int(3), tol()).unwrap();
        assert!(verify_relations(&f1.generators(), tol()).unwrap().holds());
        let f2 = RepSpec::family2(6, int(7), Sign::Minus).unwrap();
        assert!(verify_relations(&f2.generators(), tol()).unwrap().holds());
    }

    #[test]
    fn relation_failure_is_reported() {
        let bad = Matrix::<E>::from_i64_rows(&[&[1, 1], &[0, 1]]);
        let images: Vec<_> = (1..4)
            .map(|k| GeneratorImage {
                k,
                matrix: embed_block(4, k - 1, &bad),
            })
            .collect();
        let report = verify_relations(&images, tol()).unwrap();
        assert!(!report.holds());
        assert!(report.to_string().contains("s₁² ≠ I"), "{report}");
        // Far commutation is structural, so only involution failures appear.
        assert_eq!(report.failures.len(), 3);
    }

    #[test]
    fn far_commutation_failure_is_reported() {
        let n = 4;
        let a = Matrix::<E>::from_i64_rows(&[&[0, 1, 0, 0], &[1, 0, 0, 0], &[0, 0, 1, 0], &[0, 0, 0, 1]]);
        let b = Matrix::<E>::from_i64_rows(&[&[1, 0, 0, 0], &[0, 0, 0, 1], &[0, 0, 1, 0], &[0, 1, 0, 0]]);
        let images = vec![
            GeneratorImage { k: 1, matrix: a },
            GeneratorImage { k: 2, matrix: Matrix::identity(n) },
            GeneratorImage { k: 3, matrix: b },
        ];
        let report = verify_relations(&images, tol()).unwrap();
        assert_eq!(report.failures, vec![RelationFailure::FarCommutation { i: 1, j: 3 }]);
        assert_eq!(report.to_string(), "s₁s₃ ≠ s₃s₁");
    }

    #[test]
    fn classify_examples() {
        let m = Matrix::<E>::from_i64_rows(&[&[2, 1], &[-3, -2]]);
        assert_eq!(
            classify_block(&m, tol()).unwrap(),
            BlockClass::Family1 { a: int(2), b: int(1) }
        );
        assert_eq!(
            classify_block(&Matrix::<E>::identity(2), tol()).unwrap(),
            BlockClass::Trivial
        );
        let shear = Matrix::<E>::from_i64_rows(&[&[1, 1], &[0, 1]]);
        assert_eq!(classify_block(&shear, tol()).unwrap(), BlockClass::NotValid);
        let lower = Matrix::<E>::from_i64_rows(&[&[-1, 0], &[5, -1]]);
        assert_eq!(classify_block(&lower, tol()).unwrap(), BlockClass::NotValid);
        assert!(classify_block(&Matrix::<E>::identity(3), tol()).is_err());
    }

    fn ratio() -> impl Strategy<Value = E> {
        (-9i64..10, 1i64..7, -5i64..6)
            .prop_map(|(p, q, r)| E::from_ratio(p, q) + E::i() * E::from_ratio(r, q + 1))
    }

    fn nonzero_ratio() -> impl Strategy<Value = E> {
        ratio().prop_filter("nonzero", |x| !x.is_zero())
    }

    proptest! {
        #[test]
        fn classify_inverts_build(n in 2usize..6, a in ratio(), b in nonzero_ratio(), c in ratio(), plus in any::<bool>()) {
            let f1 = RepSpec::family1(n, a.clone(), b.clone(), tol()).unwrap();
            prop_assert_eq!(classify_block(&f1.block(), tol()).unwrap(), BlockClass::Family1 { a, b });
            let sign = if plus { Sign::Plus } else { Sign::Minus };
            let f2 = RepSpec::family2(n, c.clone(), sign).unwrap();
            prop_assert_eq!(classify_block(&f2.block(), tol()).unwrap(), BlockClass::Family2 { c, sign });
            let f3 = RepSpec::<E>::family3(n).unwrap();
            prop_assert_eq!(classify_block(&f3.block(), tol()).unwrap(), BlockClass::Family3);
        }

        #[test]
        fn images_are_involutions_and_far_commute(n in 2usize..7, a in ratio(), b in nonzero_ratio()) {
            let spec = RepSpec::family1(n, a, b, tol()).unwrap();
            let gens = spec.generators();
            for g in &gens {
                prop_assert!((&g.matrix * &g.matrix).is_identity(tol()));
            }
            prop_assert!(verify_relations(&gens, tol()).unwrap().holds());
        }

        #[test]
        fn neighbours_do_not_commute_generically(n in 3usize..7, a in ratio(), b in nonzero_ratio()) {
            // The (1,3) entry of [M ⊕ 1, 1 ⊕ M] is b², never zero.
            let gens = RepSpec::family1(n, a, b, tol()).unwrap().generators();
            for w in gens.windows(2) {
                let ab = &w[0].matrix * &w[1].matrix;
                let ba = &w[1].matrix * &w[0].matrix;
                prop_assert_ne!(ab, ba);
            }
        }
    }

    #[test]
    fn zero_is_not_a_sign() {
        assert!(Sign::from_i64(0).is_err());
        assert_eq!(Sign::from_i64(-1).unwrap(), Sign::Minus);
        let _ = E::zero();
    }
}
