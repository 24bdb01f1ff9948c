//! Dense complex linear algebra helpers shared by the rest of the crate.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;

/// Numerical cutoffs for rank and subspace equality decisions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    /// Singular values at or below `rank_rel * sigma_max` count as zero.
    pub rank_rel: f64,
    /// Subspaces whose largest principal angle is below this are equal (radians).
    pub angle_abs: f64,
}

impl Tolerance {
    pub const DEFAULT: Tolerance = Tolerance { rank_rel: 1e-9, angle_abs: 1e-8 };

    pub fn new(rank_rel: f64, angle_abs: f64) -> Result<Self> {
        let ok = |x: f64| x > 0.0 && x < 1e-3;
        if !ok(rank_rel) || !ok(angle_abs) {
            return Err(Error::InvalidInput(format!(
                "tolerances must lie in (0, 1e-3), got rank_rel={rank_rel:e}, angle_abs={angle_abs:e}"
            )));
        }
        Ok(Tolerance { rank_rel, angle_abs })
    }

    /// Residual threshold matching `angle_abs` (the sine of the cutoff angle).
    pub(crate) fn residual(&self) -> f64 {
        sin(self.angle_abs)
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance::DEFAULT
    }
}

// Float math routed through nalgebra so the crate stays no_std.
pub(crate) fn sin(x: f64) -> f64 {
    nalgebra::ComplexField::sin(x)
}
pub(crate) fn cos(x: f64) -> f64 {
    nalgebra::ComplexField::cos(x)
}
pub(crate) fn asin(x: f64) -> f64 {
    nalgebra::ComplexField::asin(x)
}
pub(crate) fn acos(x: f64) -> f64 {
    nalgebra::ComplexField::acos(x)
}
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn ensure_finite(m: &ComplexMatrix) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput("matrix has non-finite entries".into()))
    }
}

pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Thin SVD with singular values sorted in descending order.
pub(crate) struct Svd {
    pub u: ComplexMatrix,
    pub s: Vec<f64>,
    pub v: ComplexMatrix,
}

fn to_faer(m: &ComplexMatrix) -> faer::Mat<C64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn from_faer(m: faer::MatRef<'_, C64>) -> ComplexMatrix {
    ComplexMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Thin SVD, singular values descending.
///
/// nalgebra's SVD (real and complex) returns inaccurate singular pairs on some
/// rank-deficient inputs, so this goes through faer.
pub(crate) fn svd(m: &ComplexMatrix) -> Svd {
    let (rows, cols) = m.shape();
    let r = rows.min(cols);
    if r == 0 {
        return Svd {
            u: ComplexMatrix::zeros(rows, 0),
            s: Vec::new(),
            v: ComplexMatrix::zeros(cols, 0),
        };
    }
    let dec = to_faer(m).thin_svd().expect("SVD of a finite matrix converges");
    let s = dec.S().column_vector();
    Svd {
        u: from_faer(dec.U()),
        s: (0..r).map(|k| s[k].re).collect(),
        v: from_faer(dec.V()),
    }
}

pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    if m.nrows().min(m.ncols()) == 0 {
        return Vec::new();
    }
    let mut s = to_faer(m)
        .singular_values()
        .expect("SVD of a finite matrix converges");
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

pub fn spectral_norm(m: &ComplexMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Number of singular values above `tol.rank_rel` times the largest one.
pub fn numerical_rank(m: &ComplexMatrix, tol: &Tolerance) -> Result<usize> {
    ensure_finite(m)?;
    let s = singular_values(m);
    Ok(rank_of_values(&s, tol.rank_rel))
}

pub(crate) fn rank_of_values(s: &[f64], rank_rel: f64) -> usize {
    match s.first() {
        Some(&top) if top > 0.0 => s.iter().filter(|&&x| x > rank_rel * top).count(),
        _ => 0,
    }
}

/// `max |M - M^H| <= rel * max |M|`.
pub fn hermitian_defect(m: &ComplexMatrix) -> f64 {
    if m.nrows() != m.ncols() {
        return f64::INFINITY;
    }
    max_abs(&(m - m.adjoint()))
}

pub(crate) fn check_hermitian(m: &ComplexMatrix) -> Result<()> {
    ensure_finite(m)?;
    let defect = hermitian_defect(m);
    if defect.is_infinite() {
        return Err(Error::InvalidInput("matrix is not square".into()));
    }
    if defect > 1e-10 * max_abs(m) {
        return Err(Error::NotHermitian(defect));
    }
    Ok(())
}

/// Eigenpairs of a Hermitian matrix, eigenvalues ascending.
pub(crate) fn hermitian_eigen(m: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), ComplexMatrix::zeros(0, 0));
    }
    let sym = (m + m.adjoint()) * real(0.5);
    let eig = to_faer(&sym)
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("Hermitian eigensolver converges");
    let s = eig.S().column_vector();
    let values = (0..n).map(|k| s[k].re).collect();
    (values, from_faer(eig.U()))
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    check_hermitian(m)?;
    Ok(hermitian_eigen(m).0)
}

/// `max |F^H F - I|`.
pub fn orthonormality_defect(frame: &ComplexMatrix) -> f64 {
    let g = frame.adjoint() * frame;
    let n = g.nrows();
    max_abs(&(g - ComplexMatrix::identity(n, n)))
}

/// Columns of `m` selected by index.
pub(crate) fn columns(m: &ComplexMatrix, idx: &[usize]) -> ComplexMatrix {
    ComplexMatrix::from_fn(m.nrows(), idx.len(), |i, j| m[(i, idx[j])])
}

/// Horizontal concatenation.
pub(crate) fn hcat(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    debug_assert_eq!(a.nrows(), b.nrows());
    let (n, p) = a.shape();
    let q = b.ncols();
    ComplexMatrix::from_fn(n, p + q, |i, j| if j < p { a[(i, j)] } else { b[(i, j - p)] })
}

/// `(I - F F^H) G`, projected twice so the result is orthogonal to `F` to working precision.
pub(crate) fn project_out(frame: &ComplexMatrix, g: &ComplexMatrix) -> ComplexMatrix {
    if frame.ncols() == 0 {
        return g.clone();
    }
    let r = g - frame * (frame.adjoint() * g);
    &r - frame * (frame.adjoint() * &r)
}

/// Q factor with a positive-real diagonal R, so the result is a deterministic function of `m`.
pub(crate) fn orthonormal_q(m: &ComplexMatrix) -> ComplexMatrix {
    if m.ncols() == 0 {
        return m.clone();
    }
    let qr = m.clone().qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..q.ncols().min(r.nrows()) {
        let d = r[(j, j)];
        let n = d.norm();
        if n > 0.0 {
            let phase = d / n;
            for i in 0..q.nrows() {
                q[(i, j)] *= phase;
            }
        }
    }
    q
}

pub(crate) fn conj(m: &ComplexMatrix) -> ComplexMatrix {
    m.map(|z| z.conj())
}

/// `||U^H U - I||_max`, used to validate (anti)unitary matrices.
pub fn unitarity_defect(u: &ComplexMatrix) -> f64 {
    if u.nrows() != u.ncols() {
        return f64::INFINITY;
    }
    orthonormality_defect(u)
}
