//! The adjacency relation on a conjugacy class.
//!
//! `A` and `B` are adjacent when `B - A` has rank 2 (condition A1) and the image and kernel
//! of `B - A` are invariant under `A` and `B` (condition A2). Structurally, adjacent
//! operators are `(i,j)`-adjacent: their `a_i`- and `a_j`-eigenspaces are adjacent and
//! every other eigenspace coincides. The predicate here works on matrices and the
//! classification on eigenspaces, so the two can be checked against each other.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use core::f64::consts::{FRAC_PI_2, FRAC_PI_8};

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{
    check_hermitian, cos, hcat, numerical_rank, real, sin, spectral_norm, ComplexMatrix,
    ComplexVector, Tolerance,
};
use crate::random::{random_subspace_in, random_vector_in};
use crate::spectral::{
    require_same_class, signature_from_matrix, ClassSignature, SpectralOperator,
};
use crate::subspace::{orthonormalize, Subspace};

/// Relative threshold for the invariance test of condition A2.
pub const INVARIANCE_REL: f64 = 1e-8;

/// Outcome of the adjacency test for two operators of one class.
#[derive(Debug, Clone)]
pub struct AdjacencyVerdict {
    pub a1: bool,
    pub a2: bool,
    pub diff_rank: usize,
    /// The pair `(i, j)` with `i < j` when the operators are adjacent.
    pub type_pair: Option<(usize, usize)>,
    /// `Im(B - A)`, present exactly when A1 holds.
    pub image_of_diff: Option<Subspace>,
}

impl AdjacencyVerdict {
    pub fn adjacent(&self) -> bool {
        self.a1 && self.a2
    }
}

fn difference(a: &SpectralOperator, b: &SpectralOperator) -> ComplexMatrix {
    b.to_matrix() - a.to_matrix()
}

/// `||(I - P_S) M P_S||_2 / ||M||_2`; zero when `M = 0`.
pub fn invariance_defect(m: &ComplexMatrix, s: &Subspace) -> f64 {
    let scale = spectral_norm(m);
    if scale == 0.0 || s.is_zero() {
        return 0.0;
    }
    let ms = m * s.frame();
    let r = &ms - s.frame() * (s.frame().adjoint() * &ms);
    spectral_norm(&r) / scale
}

/// Condition A1: `(rank(B - A) == 2, rank(B - A))`.
pub fn condition_a1(a: &SpectralOperator, b: &SpectralOperator) -> Result<(bool, usize)> {
    require_same_class(a, b)?;
    let rank = numerical_rank(&difference(a, b), &a.tol())?;
    Ok((rank == 2, rank))
}

/// Condition A2, tested as invariance of `S = Im(B - A)` under `A`.
///
/// Invariance of `S` under `A` already forces invariance of `S` and `S^⊥` under both operators.
pub fn condition_a2(a: &SpectralOperator, b: &SpectralOperator) -> Result<bool> {
    let (ok, rank) = condition_a1(a, b)?;
    if !ok {
        return Err(Error::PreconditionViolated(format!("rank(B - A) = {rank}, not 2")));
    }
    let s = orthonormalize(&difference(a, b), a.tol())?;
    Ok(invariance_defect(&a.to_matrix(), &s) < INVARIANCE_REL)
}

/// The pair `(i, j)` (`i < j`) for which `A`, `B` are `(i,j)`-adjacent, if any.
pub fn classify_adjacency(
    a: &SpectralOperator,
    b: &SpectralOperator,
) -> Result<Option<(usize, usize)>> {
    let ys = a.aligned_eigenspaces(b)?;
    let mut moved = Vec::new();
    for (t, (x, y)) in a.eigenspaces().iter().zip(ys).enumerate() {
        if x.same_as(y)? {
            continue;
        }
        if !x.adjacent_to(y)? {
            return Ok(None);
        }
        moved.push(t);
        if moved.len() > 2 {
            return Ok(None);
        }
    }
    Ok(if moved.len() == 2 { Some((moved[0], moved[1])) } else { None })
}

/// Full adjacency verdict. Fails with `InternalInconsistency` if the matrix predicate and
/// the eigenspace classification disagree.
pub fn is_adjacent(a: &SpectralOperator, b: &SpectralOperator) -> Result<AdjacencyVerdict> {
    require_same_class(a, b)?;
    let diff = difference(a, b);
    let tol = a.tol();
    let diff_rank = numerical_rank(&diff, &tol)?;
    let a1 = diff_rank == 2;
    let (a2, image_of_diff) = if a1 {
        let s = orthonormalize(&diff, tol)?;
        (invariance_defect(&a.to_matrix(), &s) < INVARIANCE_REL, Some(s))
    } else {
        (false, None)
    };
    let type_pair = classify_adjacency(a, b)?;
    if (a1 && a2) != type_pair.is_some() {
        return Err(Error::InternalInconsistency(format!(
            "adjacency predicate (a1={a1}, a2={a2}, rank={diff_rank}) disagrees with \
             eigenspace classification {type_pair:?}"
        )));
    }
    Ok(AdjacencyVerdict { a1, a2, diff_rank, type_pair, image_of_diff })
}

/// `true` when the matrix predicate `A1 ∧ A2` agrees with the existence of an `(i,j)` type.
/// A `false` return is a counterexample to the structure theorem (or a tolerance failure).
pub fn adjacency_oracle(a: &SpectralOperator, b: &SpectralOperator) -> Result<bool> {
    let (a1, _) = condition_a1(a, b)?;
    let predicate = a1 && condition_a2(a, b)?;
    Ok(predicate == classify_adjacency(a, b)?.is_some())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageRelation {
    Equal,
    Adjacent,
    Other,
}

/// How `Im A` and `Im B` relate.
pub fn image_relation(a: &SpectralOperator, b: &SpectralOperator) -> Result<ImageRelation> {
    require_same_class(a, b)?;
    let ia = a.image()?;
    let ib = b.image()?;
    Ok(if ia.same_as(&ib)? {
        ImageRelation::Equal
    } else if ia.adjacent_to(&ib)? {
        ImageRelation::Adjacent
    } else {
        ImageRelation::Other
    })
}

/// Rotates a unit vector `u ∈ X_i` towards a unit vector `w ∈ X_j` by `theta`, keeping the
/// rest of both eigenspaces. The result is `(i,j)`-adjacent to `a` for `theta ∈ (0, π/2]`.
pub fn rotate_between(
    a: &SpectralOperator,
    i: usize,
    j: usize,
    u: &ComplexVector,
    w: &ComplexVector,
    theta: f64,
) -> Result<SpectralOperator> {
    a.signature().check_pair(i, j)?;
    let tol = a.tol();
    let xi = a.eigenspace(i);
    let xj = a.eigenspace(j);
    let line = |v: &ComplexVector| Subspace::span(&ComplexMatrix::from_column_slice(v.len(), 1, v.as_slice()), tol);
    let lu = line(u)?;
    let lw = line(w)?;
    if lu.dim() != 1 || lw.dim() != 1 || !xi.contains(&lu)? || !xj.contains(&lw)? {
        return Err(Error::NotContained);
    }
    let u = lu.frame().column(0).into_owned();
    let w = lw.frame().column(0).into_owned();
    let (c, s) = (real(cos(theta)), real(sin(theta)));
    let u2 = &u * c + &w * s;
    let w2 = &w * c - &u * s;
    let hi = lu.complement(Some(xi))?;
    let hj = lw.complement(Some(xj))?;
    let col = |v: ComplexVector| ComplexMatrix::from_column_slice(v.len(), 1, v.as_slice());
    let x = Subspace::from_frame(hcat(hi.frame(), &col(u2)), tol)?;
    let y = Subspace::from_frame(hcat(hj.frame(), &col(w2)), tol)?;
    a.with_eigenspaces(vec![(i, x), (j, y)])
}

/// A random operator `(i,j)`-adjacent to `a`.
pub fn make_ij_adjacent<R: Rng + ?Sized>(
    a: &SpectralOperator,
    i: usize,
    j: usize,
    rng: &mut R,
) -> Result<SpectralOperator> {
    a.signature().check_pair(i, j)?;
    let u = random_vector_in(a.eigenspace(i), rng)?;
    let w = random_vector_in(a.eigenspace(j), rng)?;
    // Stay away from both ends of (0, π/2) so the rotation is numerically visible.
    let margin = 1e-3;
    let theta = loop {
        let t: f64 = rng.random_range(0.0..FRAC_PI_2);
        if t > margin && t < FRAC_PI_2 - margin {
            break t;
        }
    };
    rotate_between(a, i, j, &u, &w, theta)
}

/// The two explicit `3 x 3` matrices of the rank-2 non-adjacent pair.
pub fn pseudo_adjacent_c3_matrices() -> (ComplexMatrix, ComplexMatrix) {
    let h = |v: [f64; 9]| ComplexMatrix::from_row_iterator(3, 3, v.iter().map(|&x| real(0.5 * x)));
    let a = h([3.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
    let b = h([3.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0]);
    (a, b)
}

/// Two operators of one class on `C^3` with `rank(B - A) = 2` that are not adjacent.
pub fn pseudo_adjacent_c3() -> (SpectralOperator, SpectralOperator) {
    let (a, b) = pseudo_adjacent_c3_matrices();
    let sig = signature_from_matrix(&a, 1e-9).expect("spectrum {1 ± 1/√2, 0} is simple");
    let a = SpectralOperator::from_matrix(&a, &sig).expect("A is in its own class");
    let b = SpectralOperator::from_matrix(&b, &sig).expect("B is conjugate to A");
    (a, b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PseudoAdjacencyDiagnostics {
    /// `X ⊥ Im C`; the pair is adjacent exactly in this case.
    pub x_orthogonal_to_core: bool,
    pub a1: bool,
    pub a2: bool,
    pub diff_rank: usize,
}

#[derive(Debug, Clone)]
pub struct PseudoAdjacentInstance {
    pub a: SpectralOperator,
    pub b: SpectralOperator,
    pub signature: ClassSignature,
    pub diagnostics: PseudoAdjacencyDiagnostics,
}

/// `A = C + a P_X` and `B = C + a P_Y` with `Y = U X`, where `U` rotates the plane
/// spanned by `m' ∈ (Im C + X) ⊖ Im C` and `w ⊥ Im C + X` by `phi`, fixing everything else.
///
/// `m'` is the normalized component of `X`'s spanning vector orthogonal to `Im C`.
pub fn pseudo_adjacent_with_rotation(
    c: &ComplexMatrix,
    x: &Subspace,
    a: f64,
    w: &ComplexVector,
    phi: f64,
) -> Result<PseudoAdjacentInstance> {
    check_hermitian(c)?;
    let n = c.nrows();
    if x.ambient_dim() != n || w.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: x.ambient_dim() });
    }
    if x.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, found: x.dim() });
    }
    if a == 0.0 || !a.is_finite() {
        return Err(Error::InvalidInput(format!("scalar a = {a} must be finite and nonzero")));
    }
    let tol = x.tol();
    let core = orthonormalize(c, tol)?;
    if core.contains(x)? {
        return Err(Error::DegenerateInput("X lies inside Im C".into()));
    }
    let xv: ComplexVector = x.frame().column(0).into_owned();
    let r = &xv - core.project(&xv);
    let m1 = &r / real(r.norm());
    let big = core.sum(x)?;
    let w = w - big.project(w);
    let wn = w.norm();
    if wn < 1e-6 {
        return Err(Error::DegenerateInput("rotation partner is not orthogonal to Im C + X".into()));
    }
    let w = w / real(wn);

    let (cp, sp) = (cos(phi), sin(phi));
    let mut u = ComplexMatrix::identity(n, n);
    u += (&m1 * m1.adjoint() + &w * w.adjoint()) * real(cp - 1.0);
    u += (&w * m1.adjoint() - &m1 * w.adjoint()) * real(sp);
    let y = Subspace::from_frame(&u * x.frame(), tol)?;

    let am = c + x.projector() * real(a);
    let bm = c + y.projector() * real(a);
    let sig = signature_from_matrix(&am, 1e-9)?;
    let a_op = SpectralOperator::from_matrix_with_tol(&am, &sig, tol)?;
    let b_op = SpectralOperator::from_matrix_with_tol(&bm, &sig, tol)?;

    let x_orthogonal_to_core = core.is_orthogonal_to(x)?;
    let (a1, diff_rank) = condition_a1(&a_op, &b_op)?;
    let a2 = a1 && condition_a2(&a_op, &b_op)?;
    Ok(PseudoAdjacentInstance {
        a: a_op,
        b: b_op,
        signature: sig,
        diagnostics: PseudoAdjacencyDiagnostics { x_orthogonal_to_core, a1, a2, diff_rank },
    })
}

/// [`pseudo_adjacent_with_rotation`] with a random partner `w ⊥ Im C + X` and a random
/// angle `phi ∈ [π/8, π/2]`.
pub fn pseudo_adjacent_general<R: Rng + ?Sized>(
    c: &ComplexMatrix,
    x: &Subspace,
    a: f64,
    rng: &mut R,
) -> Result<PseudoAdjacentInstance> {
    check_hermitian(c)?;
    let tol = x.tol();
    let big = orthonormalize(c, tol)?.sum(x)?;
    let outside = big.complement(None)?;
    if outside.is_zero() {
        return Err(Error::DegenerateInput("Im C + X fills the whole space".into()));
    }
    let w = random_vector_in(&outside, rng)?;
    let phi = rng.random_range(FRAC_PI_8..=FRAC_PI_2);
    pseudo_adjacent_with_rotation(c, x, a, &w, phi)
}

/// Checks `rank(T + Q) = rank T + rank Q` for Hermitian `T`, `Q` with `Im T ∩ Im Q = 0`.
pub fn image_direct_sum_check(t: &ComplexMatrix, q: &ComplexMatrix, tol: Tolerance) -> Result<bool> {
    if t.shape() != q.shape() {
        return Err(Error::DimensionMismatch { expected: t.nrows(), found: q.nrows() });
    }
    check_hermitian(t)?;
    check_hermitian(q)?;
    let it = orthonormalize(t, tol)?;
    let iq = orthonormalize(q, tol)?;
    if !it.intersect(&iq)?.is_zero() {
        return Err(Error::PreconditionViolated("Im T and Im Q intersect".into()));
    }
    let sum = numerical_rank(&(t + q), &tol)?;
    Ok(sum == it.dim() + iq.dim())
}

/// Random Hermitian matrix `Σ c_t v_t v_t^H` whose image is a `rank`-dimensional subspace of `within`,
/// with eigenvalues drawn from `±[0.5, 2]`.
pub fn random_hermitian_on<R: Rng + ?Sized>(
    within: &Subspace,
    rank: usize,
    rng: &mut R,
) -> Result<ComplexMatrix> {
    let s = random_subspace_in(within, rank, rng)?;
    let n = within.ambient_dim();
    let mut m = ComplexMatrix::zeros(n, n);
    for col in s.frame().column_iter() {
        let mag: f64 = rng.random_range(0.5..2.0);
        let c = if rng.random_bool(0.5) { mag } else { -mag };
        m += col * col.adjoint() * real(c);
    }
    Ok(m)
}
