//! Conjugacy classes `G(σ, d)` and their elements.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{
    check_hermitian, columns, hermitian_eigen, max_abs, real, ComplexMatrix, Tolerance,
};
use crate::random::random_unitary;
use crate::subspace::Subspace;

/// Spectrum `σ = (a_1, ..., a_k)` paired positionally with multiplicities `d = (n_1, ..., n_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassSignature {
    eigenvalues: Vec<f64>,
    multiplicities: Vec<usize>,
}

fn same_value(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

impl ClassSignature {
    /// Smallest admissible distance between two eigenvalues.
    pub const MIN_GAP: f64 = 1e-6;

    pub fn new(eigenvalues: Vec<f64>, multiplicities: Vec<usize>) -> Result<Self> {
        if eigenvalues.len() != multiplicities.len() {
            return Err(Error::InvalidSignature(format!(
                "{} eigenvalues but {} multiplicities",
                eigenvalues.len(),
                multiplicities.len()
            )));
        }
        if eigenvalues.len() < 2 {
            return Err(Error::InvalidSignature("at least two eigenvalues are required".into()));
        }
        if eigenvalues.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidSignature("eigenvalues must be finite".into()));
        }
        if multiplicities.contains(&0) {
            return Err(Error::InvalidSignature("multiplicities must be positive".into()));
        }
        let sig = ClassSignature { eigenvalues, multiplicities };
        let gap = sig.min_gap();
        if gap <= Self::MIN_GAP {
            return Err(Error::InvalidSignature(format!("eigenvalue gap {gap:e} is too small")));
        }
        Ok(sig)
    }

    pub fn k(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.multiplicities.iter().sum()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    pub fn eigenvalue(&self, i: usize) -> f64 {
        self.eigenvalues[i]
    }

    pub fn multiplicity(&self, i: usize) -> usize {
        self.multiplicities[i]
    }

    pub fn min_gap(&self) -> f64 {
        let mut sorted = self.eigenvalues.clone();
        sorted.sort_by(f64::total_cmp);
        sorted.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    }

    pub(crate) fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.k() {
            return Err(Error::BadIndices(format!("index {i} out of range for k = {}", self.k())));
        }
        Ok(())
    }

    pub(crate) fn check_pair(&self, i: usize, j: usize) -> Result<()> {
        self.check_index(i)?;
        self.check_index(j)?;
        if i == j {
            return Err(Error::BadIndices(format!("indices must differ, got ({i}, {j})")));
        }
        Ok(())
    }

    /// Index order used for serialization: descending multiplicity, then ascending eigenvalue.
    pub fn canonical_order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.k()).collect();
        idx.sort_by(|&a, &b| {
            self.multiplicities[b]
                .cmp(&self.multiplicities[a])
                .then(self.eigenvalues[a].total_cmp(&self.eigenvalues[b]))
        });
        idx
    }

    pub fn reordered(&self, order: &[usize]) -> ClassSignature {
        ClassSignature {
            eigenvalues: order.iter().map(|&t| self.eigenvalues[t]).collect(),
            multiplicities: order.iter().map(|&t| self.multiplicities[t]).collect(),
        }
    }

    /// For each index of `self`, the index of `other` carrying the same `(a, n)` pair.
    /// `None` when the two signatures describe different classes.
    pub fn alignment_to(&self, other: &ClassSignature) -> Option<Vec<usize>> {
        if self.k() != other.k() {
            return None;
        }
        let mut used = vec![false; other.k()];
        let mut map = Vec::with_capacity(self.k());
        for t in 0..self.k() {
            let hit = (0..other.k()).find(|&s| {
                !used[s]
                    && other.multiplicities[s] == self.multiplicities[t]
                    && same_value(other.eigenvalues[s], self.eigenvalues[t])
            })?;
            used[hit] = true;
            map.push(hit);
        }
        Some(map)
    }

    pub fn same_class_as(&self, other: &ClassSignature) -> bool {
        self.alignment_to(other).is_some()
    }

    pub fn index_of_eigenvalue(&self, a: f64) -> Option<usize> {
        self.eigenvalues.iter().position(|&b| same_value(a, b))
    }
}

/// Clusters the eigenvalues of a Hermitian matrix into a signature, ascending.
///
/// Eigenvalues closer than `merge_rel * max(1, ||M||_max)` are merged.
pub fn signature_from_matrix(m: &ComplexMatrix, merge_rel: f64) -> Result<ClassSignature> {
    check_hermitian(m)?;
    let (values, _) = hermitian_eigen(m);
    let radius = merge_rel * max_abs(m).max(1.0);
    let mut eig: Vec<f64> = Vec::new();
    let mut mult: Vec<usize> = Vec::new();
    let mut sums: Vec<f64> = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for v in values {
        if v - last <= radius && !mult.is_empty() {
            *mult.last_mut().unwrap() += 1;
            *sums.last_mut().unwrap() += v;
        } else {
            mult.push(1);
            sums.push(v);
        }
        last = v;
    }
    for (s, &n) in sums.iter().zip(&mult) {
        let mean = s / n as f64;
        // Snap numerically-zero eigenvalues to exact zero so the kernel keeps its meaning.
        eig.push(if mean.abs() <= radius { 0.0 } else { mean });
    }
    ClassSignature::new(eig, mult).map_err(|e| match e {
        Error::InvalidSignature(msg) => Error::DegenerateInput(msg),
        other => other,
    })
}

/// An element `A = Σ a_i P_{X_i}` of `G(σ, d)`.
#[derive(Debug, Clone)]
pub struct SpectralOperator {
    signature: ClassSignature,
    eigenspaces: Vec<Subspace>,
}

impl SpectralOperator {
    pub fn new(signature: ClassSignature, eigenspaces: Vec<Subspace>) -> Result<Self> {
        let k = signature.k();
        if eigenspaces.len() != k {
            return Err(Error::DimensionMismatch { expected: k, found: eigenspaces.len() });
        }
        let n = signature.ambient_dim();
        for (t, x) in eigenspaces.iter().enumerate() {
            if x.ambient_dim() != n {
                return Err(Error::DimensionMismatch { expected: n, found: x.ambient_dim() });
            }
            if x.dim() != signature.multiplicity(t) {
                return Err(Error::DimensionMismatch {
                    expected: signature.multiplicity(t),
                    found: x.dim(),
                });
            }
        }
        for a in 0..k {
            for b in a + 1..k {
                if !eigenspaces[a].is_orthogonal_to(&eigenspaces[b])? {
                    return Err(Error::NonOrthogonalEigenspaces(a, b));
                }
            }
        }
        Ok(SpectralOperator { signature, eigenspaces })
    }

    pub fn signature(&self) -> &ClassSignature {
        &self.signature
    }

    pub fn eigenspaces(&self) -> &[Subspace] {
        &self.eigenspaces
    }

    pub fn eigenspace(&self, i: usize) -> &Subspace {
        &self.eigenspaces[i]
    }

    pub fn k(&self) -> usize {
        self.signature.k()
    }

    pub fn ambient_dim(&self) -> usize {
        self.signature.ambient_dim()
    }

    pub fn tol(&self) -> Tolerance {
        self.eigenspaces[0].tol()
    }

    pub fn to_matrix(&self) -> ComplexMatrix {
        let n = self.ambient_dim();
        let mut m = ComplexMatrix::zeros(n, n);
        for (t, x) in self.eigenspaces.iter().enumerate() {
            let f = x.frame();
            m += f * f.adjoint() * real(self.signature.eigenvalue(t));
        }
        m
    }

    pub fn from_matrix(m: &ComplexMatrix, signature: &ClassSignature) -> Result<Self> {
        Self::from_matrix_with_tol(m, signature, Tolerance::DEFAULT)
    }

    pub fn from_matrix_with_tol(
        m: &ComplexMatrix,
        signature: &ClassSignature,
        tol: Tolerance,
    ) -> Result<Self> {
        let n = signature.ambient_dim();
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: m.nrows() });
        }
        check_hermitian(m)?;
        let (values, vectors) = hermitian_eigen(m);
        let radius = signature.min_gap() / 4.0;
        let mut clusters: Vec<Vec<usize>> = vec![Vec::new(); signature.k()];
        for (col, &v) in values.iter().enumerate() {
            let (best, dist) = signature
                .eigenvalues()
                .iter()
                .enumerate()
                .map(|(t, &a)| (t, (a - v).abs()))
                .min_by(|x, y| x.1.total_cmp(&y.1))
                .expect("k >= 2");
            if dist > radius {
                return Err(Error::SpectrumMismatch(format!(
                    "eigenvalue {v} is not within {radius:e} of the spectrum"
                )));
            }
            clusters[best].push(col);
        }
        let mut spaces = Vec::with_capacity(signature.k());
        for (t, cols) in clusters.iter().enumerate() {
            if cols.len() != signature.multiplicity(t) {
                return Err(Error::SpectrumMismatch(format!(
                    "eigenvalue {} has multiplicity {} instead of {}",
                    signature.eigenvalue(t),
                    cols.len(),
                    signature.multiplicity(t)
                )));
            }
            spaces.push(Subspace::from_frame(columns(&vectors, cols), tol)?);
        }
        SpectralOperator::new(signature.clone(), spaces)
    }

    pub fn same_class(&self, other: &SpectralOperator) -> bool {
        self.signature.same_class_as(&other.signature)
    }

    /// `other`'s eigenspaces listed in `self`'s index order.
    pub fn aligned_eigenspaces<'a>(&self, other: &'a SpectralOperator) -> Result<Vec<&'a Subspace>> {
        other.aligned_to(&self.signature)
    }

    /// Eigenspaces listed in the index order of `signature` (which must describe the same class).
    pub fn aligned_to(&self, signature: &ClassSignature) -> Result<Vec<&Subspace>> {
        let map = signature.alignment_to(&self.signature).ok_or(Error::ClassMismatch)?;
        Ok(map.iter().map(|&s| &self.eigenspaces[s]).collect())
    }

    /// `other` re-expressed with `self`'s signature ordering (same operator).
    pub fn realign(&self, other: &SpectralOperator) -> Result<SpectralOperator> {
        let spaces = self.aligned_eigenspaces(other)?.into_iter().cloned().collect();
        Ok(SpectralOperator { signature: self.signature.clone(), eigenspaces: spaces })
    }

    /// Equality as operators: same class and equal eigenspaces for equal eigenvalues.
    pub fn equals(&self, other: &SpectralOperator) -> Result<bool> {
        let spaces = self.aligned_eigenspaces(other)?;
        for (x, y) in self.eigenspaces.iter().zip(spaces) {
            if !x.same_as(y)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Copy of `self` with some eigenspaces replaced, re-validated.
    pub fn with_eigenspaces(&self, updates: Vec<(usize, Subspace)>) -> Result<SpectralOperator> {
        let mut spaces = self.eigenspaces.clone();
        for (t, x) in updates {
            self.signature.check_index(t)?;
            spaces[t] = x;
        }
        SpectralOperator::new(self.signature.clone(), spaces)
    }

    /// `Im A`: the sum of eigenspaces for nonzero eigenvalues.
    pub fn image(&self) -> Result<Subspace> {
        let mut acc = Subspace::zero(self.ambient_dim(), self.tol());
        for (t, x) in self.eigenspaces.iter().enumerate() {
            if self.signature.eigenvalue(t) != 0.0 {
                acc = acc.sum(x)?;
            }
        }
        Ok(acc)
    }
}

pub fn make_operator(signature: &ClassSignature, frames: Vec<Subspace>) -> Result<SpectralOperator> {
    SpectralOperator::new(signature.clone(), frames)
}

pub fn from_matrix(m: &ComplexMatrix, signature: &ClassSignature) -> Result<SpectralOperator> {
    SpectralOperator::from_matrix(m, signature)
}

pub fn same_class(a: &SpectralOperator, b: &SpectralOperator) -> bool {
    a.same_class(b)
}

pub(crate) fn require_same_class(a: &SpectralOperator, b: &SpectralOperator) -> Result<()> {
    if a.same_class(b) {
        Ok(())
    } else {
        Err(Error::ClassMismatch)
    }
}

/// A bijection of `{0, ..., k-1}`.
///
/// Acting on an operator, `δ(A)` keeps eigenvalue `a_i` but attaches the eigenspace `X_{δ(i)}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let k = images.len();
        let mut seen = vec![false; k];
        for &i in &images {
            if i >= k || seen[i] {
                return Err(Error::InvalidInput(format!("{images:?} is not a permutation")));
            }
            seen[i] = true;
        }
        Ok(Permutation { images })
    }

    pub fn identity(k: usize) -> Self {
        Permutation { images: (0..k).collect() }
    }

    pub fn transposition(k: usize, a: usize, b: usize) -> Result<Self> {
        if a >= k || b >= k {
            return Err(Error::BadIndices(format!("({a}, {b}) out of range for k = {k}")));
        }
        let mut images: Vec<usize> = (0..k).collect();
        images.swap(a, b);
        Ok(Permutation { images })
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn image(&self, i: usize) -> usize {
        self.images[i]
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &j)| i == j)
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.len()];
        for (i, &j) in self.images.iter().enumerate() {
            inv[j] = i;
        }
        Permutation { images: inv }
    }

    /// The permutation whose action equals acting by `inner` first and then by `self`.
    pub fn compose(&self, inner: &Permutation) -> Result<Permutation> {
        if self.len() != inner.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), found: inner.len() });
        }
        Ok(Permutation { images: self.images.iter().map(|&i| inner.images[i]).collect() })
    }

    pub fn preserves(&self, signature: &ClassSignature) -> bool {
        self.len() == signature.k()
            && self
                .images
                .iter()
                .enumerate()
                .all(|(i, &j)| signature.multiplicity(i) == signature.multiplicity(j))
    }
}

/// All multiplicity-preserving permutations, identity first.
pub fn sd_group(signature: &ClassSignature) -> Result<Vec<Permutation>> {
    let k = signature.k();
    if k > 8 {
        return Err(Error::TooManyEigenvalues(k));
    }
    fn extend(
        sig: &ClassSignature,
        prefix: &mut Vec<usize>,
        used: &mut [bool],
        out: &mut Vec<Permutation>,
    ) {
        let i = prefix.len();
        if i == sig.k() {
            out.push(Permutation { images: prefix.clone() });
            return;
        }
        for j in 0..sig.k() {
            if !used[j] && sig.multiplicity(j) == sig.multiplicity(i) {
                used[j] = true;
                prefix.push(j);
                extend(sig, prefix, used, out);
                prefix.pop();
                used[j] = false;
            }
        }
    }
    let mut out = Vec::new();
    extend(signature, &mut Vec::with_capacity(k), &mut vec![false; k], &mut out);
    Ok(out)
}

pub fn apply_permutation(delta: &Permutation, a: &SpectralOperator) -> Result<SpectralOperator> {
    if !delta.preserves(a.signature()) {
        return Err(Error::NotInSd);
    }
    let spaces = delta.images.iter().map(|&s| a.eigenspace(s).clone()).collect();
    Ok(SpectralOperator { signature: a.signature.clone(), eigenspaces: spaces })
}

/// Haar-random element of the class: a random unitary split into column blocks of sizes `n_i`.
pub fn random_operator<R: Rng + ?Sized>(signature: &ClassSignature, rng: &mut R) -> SpectralOperator {
    random_operator_with_tol(signature, Tolerance::DEFAULT, rng)
}

pub fn random_operator_with_tol<R: Rng + ?Sized>(
    signature: &ClassSignature,
    tol: Tolerance,
    rng: &mut R,
) -> SpectralOperator {
    let u = random_unitary(signature.ambient_dim(), rng);
    let mut start = 0;
    let mut spaces = Vec::with_capacity(signature.k());
    for &n in signature.multiplicities() {
        let idx: Vec<usize> = (start..start + n).collect();
        spaces.push(
            Subspace::from_frame(columns(&u, &idx), tol).expect("unitary columns are orthonormal"),
        );
        start += n;
    }
    SpectralOperator { signature: signature.clone(), eigenspaces: spaces }
}

/// Uniformly random element of `S(d)`.
pub fn random_sd_element<R: Rng + ?Sized>(
    signature: &ClassSignature,
    rng: &mut R,
) -> Result<Permutation> {
    let group = sd_group(signature)?;
    let pick = rng.random_range(0..group.len());
    Ok(group[pick].clone())
}
