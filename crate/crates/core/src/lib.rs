//! Homogeneous 2-local representations of the twin group `T_n`.
//!
//! The crate builds the three classified families of generator images,
//! reduces the first family by its invariant line, and decides
//! irreducibility of the reduced representation through a closed-form
//! criterion. Every verdict can be cross-checked against an independent
//! matrix-algebra oracle.

pub mod chain;
pub mod error;
pub mod irreducibility;
pub mod linalg;
pub mod oracle;
pub mod poly;
pub mod reduction;
pub mod rep;
pub mod scalar;

pub use error::{Error, Result};
pub use linalg::{AnyMatrix, Matrix, RankInfo, Subspace};
pub use scalar::{Backend, Exact, Field, Float, Scalar, Tolerance};
pub use rep::{classify_block, verify_relations, BlockClass, Family, GeneratorImage, RepSpec, Sign};
pub use reduction::{BasisBBundle, Family1, ReductionBundle};
pub use chain::{
    chain_closed_form, chain_vectors, closure_check, delta, delta_checkpoint, delta_direct,
    delta_via_lemma, det_closed_form, lemma_matrix, s2v1_display, ChainBundle, ClosureReport,
};
pub use irreducibility::{
    decide, image_matrices, witness_check, witness_check_with_gap, Diagnostics, Reason, Status,
    Verdict,
};
pub use poly::{cleared_poly, eval_p, roots_of_p, ClearedPoly, IntPoly, Root};
pub use oracle::{
    algebra_basis, algebra_dimension, common_eigenlines, common_eigenspaces,
    is_irreducible_oracle, oracle_verdict, AlgebraBasis,
};
