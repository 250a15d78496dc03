//! Exact linear and affine geometry over noncommutative division rings.
//!
//! The supported rings are the definite rational quaternion algebras
//! `(a, b | Q)` with `a, b < 0`, and Q itself. On top of exact arithmetic the
//! crate provides one-sided linear algebra, sidedness classification of
//! affine subspaces, and analysis of maps of `k^n` that send left or right
//! affine subspaces to left or right affine subspaces, including their
//! factorization into translation, right scalar, central matrix,
//! automorphism and anti-automorphism.

pub mod algebra;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod maps;
pub mod morphism;
pub mod qlinalg;
pub mod random;
pub mod subspace;

pub use algebra::{Algebra, AlgebraParams, CentralMatrix4, Rational, Scalar, Side};
pub use error::{Error, Result};
pub use linalg::{EchelonForm, Matrix, PivotComplement, Vector};
pub use morphism::{Morphism, MorphismKind};
pub use maps::{MapExpr, Mode, PointMap, SemilinearForm};
pub use random::Sampler;
pub use subspace::{AffineSubspace, Sidedness, SubspaceRepr, VectorSubspace};
