//! Sampling helpers. All randomness comes from a caller-supplied generator.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{c64, columns, orthonormal_q, ComplexMatrix, ComplexVector, Tolerance};
use crate::subspace::Subspace;

pub fn complex_gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c64(re, im)
    })
}

/// Haar-distributed unitary: QR of a complex Gaussian matrix with the phases of `R` moved into `Q`.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    orthonormal_q(&complex_gaussian(n, n, rng))
}

pub fn random_unit_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexVector {
    let g = complex_gaussian(n, 1, rng);
    let v = g.column(0).into_owned();
    let norm = v.norm();
    v / c64(norm, 0.0)
}

pub fn random_subspace<R: Rng + ?Sized>(
    ambient_dim: usize,
    dim: usize,
    tol: Tolerance,
    rng: &mut R,
) -> Result<Subspace> {
    random_subspace_in(&Subspace::full(ambient_dim, tol), dim, rng)
}

/// Uniformly random `dim`-dimensional subspace of `within`.
pub fn random_subspace_in<R: Rng + ?Sized>(
    within: &Subspace,
    dim: usize,
    rng: &mut R,
) -> Result<Subspace> {
    let w = within.dim();
    if dim > w {
        return Err(Error::DimensionMismatch { expected: w, found: dim });
    }
    if dim == 0 {
        return Ok(Subspace::zero(within.ambient_dim(), within.tol()));
    }
    let u = random_unitary(w, rng);
    let idx: alloc::vec::Vec<usize> = (0..dim).collect();
    Subspace::from_frame(within.frame() * columns(&u, &idx), within.tol())
}

/// Random unit vector of `within`.
pub fn random_vector_in<R: Rng + ?Sized>(within: &Subspace, rng: &mut R) -> Result<ComplexVector> {
    if within.is_zero() {
        return Err(Error::DegenerateInput("cannot sample from the zero subspace".into()));
    }
    let g = random_unit_vector(within.dim(), rng);
    Ok(within.frame() * g)
}
