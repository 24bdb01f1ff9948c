//! Generalized Grassmann graphs on conjugacy classes of finite-rank self-adjoint operators.
//!
//! Vertices are Hermitian operators on `C^N` with a fixed spectrum `σ` and fixed
//! eigenspace dimensions `d`. Two of them are adjacent when their difference has rank 2
//! and its image and kernel are invariant under both. This crate decides adjacency,
//! builds connecting paths, describes connected components, cliques and lines, and
//! applies the symmetries `A ↦ U δ(A) U*`.
//!
//! Eigenvalue indices are 0-based throughout.

#![no_std]

extern crate alloc;

pub mod adjacency;
pub mod cliques;
pub mod connectivity;
pub mod error;
mod family;
pub mod linalg;
pub mod random;
pub mod spectral;
pub mod subspace;
pub mod symmetry;

pub use error::{Error, Result};
pub use linalg::{numerical_rank, ComplexMatrix, ComplexVector, Tolerance, C64};
pub use spectral::{
    apply_permutation, from_matrix, make_operator, random_operator, same_class, sd_group,
    ClassSignature, Permutation, SpectralOperator,
};
pub use subspace::{grassmann_path, orthonormalize, subspaces_adjacent, Subspace};
