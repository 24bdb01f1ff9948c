//! Symmetries `A ↦ U δ(A) U*` of the graph and the semilinear maps `f_V` of the two-eigenvalue case.
//!
//! An antiunitary `U` acts as "conjugate the coordinates, then multiply by the matrix".

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;

use crate::adjacency::{is_adjacent, make_ij_adjacent};
use crate::error::{Error, Result};
use crate::linalg::{
    conj, max_abs, real, singular_values, unitarity_defect, ComplexMatrix, ComplexVector,
};
use crate::random::{complex_gaussian, random_unit_vector};
use crate::spectral::{apply_permutation, random_operator, ClassSignature, Permutation, SpectralOperator};
use crate::subspace::{orthonormalize, Subspace};

/// Unitarity tolerance for symmetry matrices.
pub const UNITARY_TOL: f64 = 1e-10;

/// Anything that sends operators of a class to operators of the same class.
pub trait OperatorMap {
    fn map(&self, a: &SpectralOperator) -> Result<SpectralOperator>;
}

#[derive(Debug, Clone)]
pub struct Symmetry {
    matrix: ComplexMatrix,
    antiunitary: bool,
    permutation: Permutation,
}

impl Symmetry {
    pub fn new(matrix: ComplexMatrix, antiunitary: bool, permutation: Permutation) -> Result<Self> {
        let defect = unitarity_defect(&matrix);
        if defect > UNITARY_TOL {
            return Err(Error::NotUnitary(defect));
        }
        Ok(Symmetry { matrix, antiunitary, permutation })
    }

    /// No validation; used to probe what breaks when `matrix` is not unitary.
    pub fn new_unchecked(matrix: ComplexMatrix, antiunitary: bool, permutation: Permutation) -> Self {
        Symmetry { matrix, antiunitary, permutation }
    }

    pub fn identity(n: usize, k: usize) -> Self {
        Symmetry {
            matrix: ComplexMatrix::identity(n, n),
            antiunitary: false,
            permutation: Permutation::identity(k),
        }
    }

    pub fn unitary(matrix: ComplexMatrix, k: usize) -> Result<Self> {
        Symmetry::new(matrix, false, Permutation::identity(k))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn is_antiunitary(&self) -> bool {
        self.antiunitary
    }

    pub fn permutation(&self) -> &Permutation {
        &self.permutation
    }

    /// `U x`, or `U conj(x)` when antiunitary, column by column.
    pub fn apply_to_frame(&self, f: &ComplexMatrix) -> ComplexMatrix {
        if self.antiunitary {
            &self.matrix * conj(f)
        } else {
            &self.matrix * f
        }
    }

    pub fn apply(&self, a: &SpectralOperator) -> Result<SpectralOperator> {
        let defect = unitarity_defect(&self.matrix);
        if defect > UNITARY_TOL {
            return Err(Error::NotUnitary(defect));
        }
        if self.matrix.nrows() != a.ambient_dim() {
            return Err(Error::DimensionMismatch { expected: a.ambient_dim(), found: self.matrix.nrows() });
        }
        let permuted = apply_permutation(&self.permutation, a)?;
        let tol = a.tol();
        let spaces = permuted
            .eigenspaces()
            .iter()
            .map(|x| Subspace::from_frame(self.apply_to_frame(x.frame()), tol))
            .collect::<Result<Vec<_>>>()?;
        SpectralOperator::new(a.signature().clone(), spaces)
    }

    /// `self ∘ inner`: act by `inner` first.
    pub fn compose(&self, inner: &Symmetry) -> Result<Symmetry> {
        if self.matrix.shape() != inner.matrix.shape() || self.permutation.len() != inner.permutation.len() {
            return Err(Error::SignatureMismatch);
        }
        // U1 conj^a (U2 conj^b x) = U1 (a ? conj(U2) : U2) conj^(a xor b) x
        let second = if self.antiunitary { conj(&inner.matrix) } else { inner.matrix.clone() };
        Ok(Symmetry {
            matrix: &self.matrix * second,
            antiunitary: self.antiunitary ^ inner.antiunitary,
            permutation: self.permutation.compose(&inner.permutation)?,
        })
    }

    pub fn inverse(&self) -> Symmetry {
        // (U conj)^{-1} y = conj(U^H y) = U^T conj(y)
        let matrix = if self.antiunitary { self.matrix.transpose() } else { self.matrix.adjoint() };
        Symmetry { matrix, antiunitary: self.antiunitary, permutation: self.permutation.inverse() }
    }
}

impl OperatorMap for Symmetry {
    fn map(&self, a: &SpectralOperator) -> Result<SpectralOperator> {
        self.apply(a)
    }
}

pub fn apply_symmetry(s: &Symmetry, a: &SpectralOperator) -> Result<SpectralOperator> {
    s.apply(a)
}

pub fn compose(s1: &Symmetry, s2: &Symmetry) -> Result<Symmetry> {
    s1.compose(s2)
}

/// `W A W^{-1}` for `W = U` or `U ∘ conj`, as a matrix.
fn conjugate_matrix(u: &ComplexMatrix, antiunitary: bool, a: &ComplexMatrix) -> ComplexMatrix {
    let inner = if antiunitary { conj(a) } else { a.clone() };
    u * inner * u.adjoint()
}

/// Checks `U δ(A) U* = δ(U A U*)` on every sample, both sides computed independently: the
/// left from eigenspaces, the right by re-diagonalizing the matrix `U A U*`. A matrix `U`
/// that is not unitary usually takes `A` out of its class, which makes the check fail.
pub fn commutation_check(u: &Symmetry, delta: &Permutation, samples: &[SpectralOperator]) -> bool {
    for a in samples {
        let Ok(da) = apply_permutation(delta, a) else { return false };
        let lhs = conjugate_matrix(&u.matrix, u.antiunitary, &da.to_matrix());
        let uau = conjugate_matrix(&u.matrix, u.antiunitary, &a.to_matrix());
        let rhs = match SpectralOperator::from_matrix(&uau, a.signature())
            .and_then(|b| apply_permutation(delta, &b))
        {
            Ok(b) => b.to_matrix(),
            Err(_) => return false,
        };
        let scale = max_abs(&lhs).max(1.0);
        let defect = max_abs(&(lhs - rhs));
        if defect.is_nan() || defect > 1e-8 * scale {
            return false;
        }
    }
    true
}

/// Edge type before and after a map, with the number of sampled edges.
pub type TypeTransport = BTreeMap<((usize, usize), (usize, usize)), usize>;

/// Outcome of [`verify_automorphism`].
#[derive(Debug, Clone, Default)]
pub struct AutomorphismReport {
    pub adjacent_pairs: usize,
    pub nonadjacent_pairs: usize,
    /// Pairs whose adjacency status changed under the map.
    pub adjacency_broken: usize,
    /// Operators the map failed to send into the class (e.g. non-orthogonal image eigenspaces).
    pub class_failures: usize,
    /// Image type of each observed edge type, with counts.
    pub transport: TypeTransport,
    pub messages: Vec<String>,
}

impl AutomorphismReport {
    pub fn preserves_adjacency(&self) -> bool {
        self.adjacency_broken == 0 && self.class_failures == 0
    }

    pub fn preserves_types(&self) -> bool {
        self.preserves_adjacency() && self.transport.keys().all(|(from, to)| from == to)
    }

    fn note(&mut self, msg: String) {
        if self.messages.len() < 8 {
            self.messages.push(msg);
        }
    }
}

fn random_pair_indices<R: Rng + ?Sized>(k: usize, rng: &mut R) -> (usize, usize) {
    let i = rng.random_range(0..k);
    let j = (i + rng.random_range(1..k)) % k;
    (i, j)
}

/// Samples adjacent pairs and non-adjacent pairs of `signature` and checks that `map`
/// preserves adjacency in both directions, recording the observed type transport.
pub fn verify_automorphism<M: OperatorMap + ?Sized, R: Rng + ?Sized>(
    map: &M,
    signature: &ClassSignature,
    trials: usize,
    rng: &mut R,
) -> Result<AutomorphismReport> {
    let mut report = AutomorphismReport::default();
    let k = signature.k();
    for trial in 0..trials {
        let a = random_operator(signature, rng);
        let (i, j) = random_pair_indices(k, rng);
        let b = make_ij_adjacent(&a, i, j, rng)?;
        // a second move on another pair (or a random operator) is generically not adjacent to `a`
        let c = if k >= 3 {
            let (p, q) = loop {
                let t = random_pair_indices(k, rng);
                if (t.0.min(t.1), t.0.max(t.1)) != (i.min(j), i.max(j)) {
                    break t;
                }
            };
            make_ij_adjacent(&b, p, q, rng)?
        } else {
            random_operator(signature, rng)
        };
        let images = [map.map(&a), map.map(&b), map.map(&c)];
        let [Ok(fa), Ok(fb), Ok(fc)] = images else {
            report.class_failures += 1;
            let err = images.into_iter().find_map(|r| r.err()).expect("one image failed");
            report.note(format!("trial {trial}: image left the class: {err}"));
            continue;
        };
        for (x, y, fx, fy) in [(&a, &b, &fa, &fb), (&a, &c, &fa, &fc)] {
            let before = is_adjacent(x, y)?.type_pair;
            let after = is_adjacent(fx, &fx.realign(fy)?)?.type_pair;
            match before {
                Some(_) => report.adjacent_pairs += 1,
                None => report.nonadjacent_pairs += 1,
            }
            match (before, after) {
                (Some(t), Some(u)) => *report.transport.entry((t, u)).or_insert(0) += 1,
                (None, None) => {}
                _ => {
                    report.adjacency_broken += 1;
                    report.note(format!("trial {trial}: adjacency {before:?} became {after:?}"));
                }
            }
        }
    }
    Ok(report)
}

/// The type that `(i,j)`-adjacent pairs have after applying `s`: the eigenspaces moved at
/// `i`, `j` reappear at `δ^{-1}(i)`, `δ^{-1}(j)`. Returned with the smaller index first.
pub fn adjacency_type_transport(
    s: &Symmetry,
    signature: &ClassSignature,
    i: usize,
    j: usize,
) -> Result<(usize, usize)> {
    signature.check_pair(i, j)?;
    if !s.permutation.preserves(signature) {
        return Err(Error::NotInSd);
    }
    let inv = s.permutation.inverse();
    let (p, q) = (inv.image(i), inv.image(j));
    let (ni, nj) = (signature.multiplicity(i), signature.multiplicity(j));
    let (np, nq) = (signature.multiplicity(p), signature.multiplicity(q));
    if (np, nq) != (ni, nj) {
        return Err(Error::InternalInconsistency(format!(
            "transported pair ({p}, {q}) has multiplicities ({np}, {nq}), expected ({ni}, {nj})"
        )));
    }
    Ok((p.min(q), p.max(q)))
}

/// An invertible linear or antilinear map `x ↦ M x` / `x ↦ M conj(x)` of `C^N`.
#[derive(Debug, Clone)]
pub struct SemilinearMap {
    matrix: ComplexMatrix,
    antilinear: bool,
}

impl SemilinearMap {
    pub fn new(matrix: ComplexMatrix, antilinear: bool) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::InvalidInput("semilinear map must be square".into()));
        }
        let s = singular_values(&matrix);
        match (s.first(), s.last()) {
            (Some(&top), Some(&bottom)) if bottom > crate::linalg::Tolerance::DEFAULT.rank_rel * top => {
                Ok(SemilinearMap { matrix, antilinear })
            }
            _ => Err(Error::NotInvertible),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn is_antilinear(&self) -> bool {
        self.antilinear
    }

    pub fn apply_to_frame(&self, f: &ComplexMatrix) -> ComplexMatrix {
        if self.antilinear {
            &self.matrix * conj(f)
        } else {
            &self.matrix * f
        }
    }

    pub fn apply_to_vector(&self, v: &ComplexVector) -> ComplexVector {
        if self.antilinear {
            &self.matrix * v.map(|z| z.conj())
        } else {
            &self.matrix * v
        }
    }

    pub fn image(&self, x: &Subspace) -> Result<Subspace> {
        orthonormalize(&self.apply_to_frame(x.frame()), x.tol())
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &SemilinearMap) -> Result<SemilinearMap> {
        if self.matrix.shape() != inner.matrix.shape() {
            return Err(Error::DimensionMismatch { expected: self.matrix.nrows(), found: inner.matrix.nrows() });
        }
        let second = if self.antilinear { conj(&inner.matrix) } else { inner.matrix.clone() };
        SemilinearMap::new(&self.matrix * second, self.antilinear ^ inner.antilinear)
    }
}

/// `f_V` on a two-eigenvalue class: the `a_1`-eigenspace `X` goes to `V(X)`, the other
/// eigenspace to its orthogonal complement.
#[derive(Debug, Clone)]
pub struct SemilinearK2Map {
    map: SemilinearMap,
    signature: ClassSignature,
}

impl SemilinearK2Map {
    pub fn semilinear(&self) -> &SemilinearMap {
        &self.map
    }
}

impl OperatorMap for SemilinearK2Map {
    fn map(&self, a: &SpectralOperator) -> Result<SpectralOperator> {
        let spaces = a.aligned_to(&self.signature)?;
        let x = self.map.image(spaces[0])?;
        let y = x.complement(None)?;
        SpectralOperator::new(self.signature.clone(), alloc::vec![x, y])
    }
}

pub fn semilinear_k2_automorphism(v: &SemilinearMap, signature: &ClassSignature) -> Result<SemilinearK2Map> {
    if signature.k() != 2 {
        return Err(Error::RequiresKEquals2);
    }
    if v.matrix.nrows() != signature.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: signature.ambient_dim(), found: v.matrix.nrows() });
    }
    Ok(SemilinearK2Map { map: v.clone(), signature: signature.clone() })
}

/// Sends every eigenspace through `V` directly. For `k ≥ 3` and `V` not a multiple of a
/// (anti)unitary map the images are no longer orthogonal, so this is a map that should fail
/// [`verify_automorphism`].
#[derive(Debug, Clone)]
pub struct EigenspaceImageMap {
    pub map: SemilinearMap,
}

impl OperatorMap for EigenspaceImageMap {
    fn map(&self, a: &SpectralOperator) -> Result<SpectralOperator> {
        let spaces = a.eigenspaces().iter().map(|x| self.map.image(x)).collect::<Result<Vec<_>>>()?;
        SpectralOperator::new(a.signature().clone(), spaces)
    }
}

/// Whether `V` keeps sampled orthogonal pairs orthogonal and, if so, the scalar `c` with
/// `V / c` unitary (or antiunitary when `V` is antilinear).
pub fn orthogonality_defect<R: Rng + ?Sized>(
    v: &SemilinearMap,
    trials: usize,
    rng: &mut R,
) -> (bool, Option<f64>) {
    let n = v.matrix.nrows();
    let mut pairs: Vec<(ComplexVector, ComplexVector)> = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let (mut ea, mut eb) = (ComplexVector::zeros(n), ComplexVector::zeros(n));
            ea[a] = real(1.0);
            eb[b] = real(1.0);
            pairs.push((&ea + &eb, &ea - &eb));
            pairs.push((ea, eb));
        }
    }
    for _ in 0..trials {
        let x = random_unit_vector(n, rng);
        let g = complex_gaussian(n, 1, rng).column(0).into_owned();
        let y = &g - &x * x.dotc(&g);
        pairs.push((x, y));
    }
    for (x, y) in &pairs {
        let (vx, vy) = (v.apply_to_vector(x), v.apply_to_vector(y));
        if vx.dotc(&vy).norm() > 1e-8 * vx.norm() * vy.norm() {
            return (false, None);
        }
    }
    if n == 0 {
        return (true, Some(1.0));
    }
    let c = v.matrix.column(0).norm();
    let scaled = &v.matrix * real(1.0 / c);
    if unitarity_defect(&scaled) <= 1e-8 {
        (true, Some(c))
    } else {
        (true, None)
    }
}
