//! Subspaces of `C^N` carried by orthonormal frames.

use alloc::vec::Vec;

use core::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::linalg::{
    acos, asin, columns, ensure_finite, hcat, orthonormal_q, orthonormality_defect, project_out,
    rank_of_values, spectral_norm, svd, ComplexMatrix, ComplexVector, Tolerance,
};

/// A linear subspace of `C^N`, stored as an `N x m` matrix with orthonormal columns.
///
/// Frames are not canonical: two `Subspace` values are the same space when
/// [`Subspace::same_as`] says so, never by comparing entries.
#[derive(Debug, Clone)]
pub struct Subspace {
    frame: ComplexMatrix,
    tol: Tolerance,
}

impl Subspace {
    pub fn zero(ambient_dim: usize, tol: Tolerance) -> Self {
        Subspace { frame: ComplexMatrix::zeros(ambient_dim, 0), tol }
    }

    pub fn full(ambient_dim: usize, tol: Tolerance) -> Self {
        Subspace { frame: ComplexMatrix::identity(ambient_dim, ambient_dim), tol }
    }

    /// Wraps a frame that is already orthonormal (checked to `10 * angle_abs`).
    pub fn from_frame(frame: ComplexMatrix, tol: Tolerance) -> Result<Self> {
        ensure_finite(&frame)?;
        if frame.ncols() > frame.nrows() {
            return Err(Error::DimensionMismatch { expected: frame.nrows(), found: frame.ncols() });
        }
        let defect = orthonormality_defect(&frame);
        if defect > 10.0 * tol.angle_abs {
            return Err(Error::NotOrthonormal(defect));
        }
        Ok(Subspace { frame, tol })
    }

    /// Column span of arbitrary vectors.
    pub fn span(vectors: &ComplexMatrix, tol: Tolerance) -> Result<Self> {
        orthonormalize(vectors, tol)
    }

    /// Span of the given coordinate axes `e_i` (0-based).
    pub fn coordinate(ambient_dim: usize, axes: &[usize], tol: Tolerance) -> Result<Self> {
        let mut frame = ComplexMatrix::zeros(ambient_dim, axes.len());
        for (j, &a) in axes.iter().enumerate() {
            if a >= ambient_dim {
                return Err(Error::DimensionMismatch { expected: ambient_dim, found: a + 1 });
            }
            frame[(a, j)] = crate::linalg::real(1.0);
        }
        orthonormalize(&frame, tol)
    }

    pub fn ambient_dim(&self) -> usize {
        self.frame.nrows()
    }

    pub fn dim(&self) -> usize {
        self.frame.ncols()
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    pub fn frame(&self) -> &ComplexMatrix {
        &self.frame
    }

    pub fn into_frame(self) -> ComplexMatrix {
        self.frame
    }

    pub fn tol(&self) -> Tolerance {
        self.tol
    }

    pub fn with_tol(mut self, tol: Tolerance) -> Self {
        self.tol = tol;
        self
    }

    /// Orthogonal projector `F F^H`.
    pub fn projector(&self) -> ComplexMatrix {
        &self.frame * self.frame.adjoint()
    }

    pub fn project(&self, v: &ComplexVector) -> ComplexVector {
        &self.frame * (self.frame.adjoint() * v)
    }

    fn check_ambient(&self, other: &Subspace) -> Result<()> {
        if self.ambient_dim() != other.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim(),
                found: other.ambient_dim(),
            });
        }
        Ok(())
    }

    /// Spectral norm of the part of `other`'s frame lying outside `self`,
    /// i.e. the sine of the largest angle from `other` into `self`.
    pub(crate) fn escape(&self, other: &Subspace) -> f64 {
        if other.is_zero() {
            return 0.0;
        }
        spectral_norm(&project_out(&self.frame, &other.frame))
    }

    /// `other ⊆ self`.
    pub fn contains(&self, other: &Subspace) -> Result<bool> {
        self.check_ambient(other)?;
        Ok(other.dim() <= self.dim() && self.escape(other) < self.tol.residual())
    }

    pub fn contains_vector(&self, v: &ComplexVector) -> bool {
        let n = v.norm();
        if n == 0.0 {
            return true;
        }
        let r = v - self.project(v);
        r.norm() < self.tol.residual() * n
    }

    /// Equality of subspaces: equal dimension and every principal angle below `angle_abs`.
    pub fn same_as(&self, other: &Subspace) -> Result<bool> {
        self.check_ambient(other)?;
        Ok(self.dim() == other.dim() && self.escape(other) < self.tol.residual())
    }

    pub fn is_orthogonal_to(&self, other: &Subspace) -> Result<bool> {
        self.check_ambient(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(true);
        }
        Ok(spectral_norm(&(self.frame.adjoint() * &other.frame)) < self.tol.residual())
    }

    pub fn intersect(&self, other: &Subspace) -> Result<Subspace> {
        self.check_ambient(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(Subspace::zero(self.ambient_dim(), self.tol));
        }
        let r = project_out(&self.frame, &other.frame);
        let dec = svd(&r);
        let cut = self.tol.residual();
        // `r` has at least as many rows as columns, so `v` is square.
        let small: Vec<usize> = (0..dec.s.len()).filter(|&k| dec.s[k] < cut).collect();
        if small.is_empty() {
            return Ok(Subspace::zero(self.ambient_dim(), self.tol));
        }
        let v = columns(&dec.v, &small);
        Ok(Subspace { frame: orthonormal_q(&(&other.frame * v)), tol: self.tol })
    }

    pub fn sum(&self, other: &Subspace) -> Result<Subspace> {
        self.check_ambient(other)?;
        if other.is_zero() {
            return Ok(self.clone());
        }
        if self.is_zero() {
            return Ok(other.clone().with_tol(self.tol));
        }
        let r = project_out(&self.frame, &other.frame);
        let dec = svd(&r);
        let cut = self.tol.residual();
        let large: Vec<usize> = (0..dec.s.len()).filter(|&k| dec.s[k] >= cut).collect();
        if large.is_empty() {
            return Ok(self.clone());
        }
        let extra = orthonormal_q(&project_out(&self.frame, &columns(&dec.u, &large)));
        Ok(Subspace { frame: hcat(&self.frame, &extra), tol: self.tol })
    }

    /// Orthogonal complement of `self` inside `within` (the whole space when `None`).
    pub fn complement(&self, within: Option<&Subspace>) -> Result<Subspace> {
        let n = self.ambient_dim();
        let owned;
        let w = match within {
            Some(w) => {
                if !w.contains(self)? {
                    return Err(Error::NotContained);
                }
                w
            }
            None => {
                owned = Subspace::full(n, self.tol);
                &owned
            }
        };
        let want = w.dim() - self.dim();
        if want == 0 {
            return Ok(Subspace::zero(n, self.tol));
        }
        if self.is_zero() {
            return Ok(w.clone().with_tol(self.tol));
        }
        let r = project_out(&self.frame, &w.frame);
        let dec = svd(&r);
        let keep: Vec<usize> = (0..want).collect();
        let frame = orthonormal_q(&project_out(&self.frame, &columns(&dec.u, &keep)));
        Ok(Subspace { frame, tol: self.tol })
    }

    /// Principal angles in ascending order; `min(dim)` of them.
    pub fn principal_angles(&self, other: &Subspace) -> Result<Vec<f64>> {
        self.check_ambient(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(Vec::new());
        }
        // Put the larger space first so the residual SVD has exactly min(dim) values.
        let (big, small) = if self.dim() >= other.dim() { (self, other) } else { (other, self) };
        let cosines = svd(&(big.frame.adjoint() * &small.frame)).s;
        let mut sines = svd(&project_out(&big.frame, &small.frame)).s;
        sines.reverse();
        let angles = cosines
            .iter()
            .zip(sines.iter())
            .map(|(&c, &s)| {
                let c = c.clamp(0.0, 1.0);
                let s = s.clamp(0.0, 1.0);
                if c * c >= 0.5 {
                    asin(s)
                } else {
                    acos(c)
                }
            })
            .map(|t: f64| t.clamp(0.0, FRAC_PI_2))
            .collect();
        Ok(angles)
    }

    /// Adjacency in the Grassmann graph: equal dimension `m` and an `(m-1)`-dimensional intersection.
    pub fn adjacent_to(&self, other: &Subspace) -> Result<bool> {
        subspaces_adjacent(self, other)
    }
}

/// Orthonormal basis of the column span, dimension equal to the numerical rank.
pub fn orthonormalize(vectors: &ComplexMatrix, tol: Tolerance) -> Result<Subspace> {
    ensure_finite(vectors)?;
    let n = vectors.nrows();
    if vectors.ncols() == 0 || n == 0 {
        return Ok(Subspace::zero(n, tol));
    }
    let dec = svd(vectors);
    let r = rank_of_values(&dec.s, tol.rank_rel);
    let keep: Vec<usize> = (0..r).collect();
    Ok(Subspace { frame: orthonormal_q(&columns(&dec.u, &keep)), tol })
}

pub fn subspaces_adjacent(a: &Subspace, b: &Subspace) -> Result<bool> {
    a.check_ambient(b)?;
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    let m = a.dim();
    Ok(m > 0 && a.intersect(b)?.dim() == m - 1)
}

/// A path `X = Z_0, Z_1, ..., Z_s = Y` of pairwise adjacent subspaces inside `ambient`,
/// with `s = m - dim(X ∩ Y)`.
///
/// Step `t` swaps the `t`-th principal vector of `X ⊖ (X ∩ Y)` for its partner in
/// `Y ⊖ (X ∩ Y)`, pairs taken in order of increasing principal angle.
pub fn grassmann_path(x: &Subspace, y: &Subspace, ambient: &Subspace) -> Result<Vec<Subspace>> {
    x.check_ambient(y)?;
    x.check_ambient(ambient)?;
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch { expected: x.dim(), found: y.dim() });
    }
    if !ambient.contains(x)? || !ambient.contains(y)? {
        return Err(Error::NotContained);
    }
    let common = x.intersect(y)?;
    if common.dim() == x.dim() {
        return Ok(alloc::vec![x.clone()]);
    }
    let xc = common.complement(Some(x))?;
    let yc = common.complement(Some(y))?;
    let s = xc.dim();
    let dec = svd(&(xc.frame.adjoint() * &yc.frame));
    let xs = &xc.frame * &dec.u;
    let ys = &yc.frame * &dec.v;

    let mut path = Vec::with_capacity(s + 1);
    path.push(x.clone());
    for t in 1..s {
        let idx_y: Vec<usize> = (0..t).collect();
        let idx_x: Vec<usize> = (t..s).collect();
        let frame = hcat(&hcat(&common.frame, &columns(&ys, &idx_y)), &columns(&xs, &idx_x));
        path.push(Subspace::from_frame(frame, x.tol)?);
    }
    path.push(y.clone().with_tol(x.tol));
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c64, real};
    use core::f64::consts::FRAC_PI_4;

    fn tol() -> Tolerance {
        Tolerance::DEFAULT
    }

    fn axes(n: usize, a: &[usize]) -> Subspace {
        Subspace::coordinate(n, a, tol()).unwrap()
    }

    #[test]
    fn orthonormalize_examples() {
        let mut m = ComplexMatrix::zeros(3, 2);
        m[(0, 0)] = real(1.0);
        m[(0, 1)] = real(2.0);
        let s = orthonormalize(&m, tol()).unwrap();
        assert_eq!(s.dim(), 1);
        assert!(s.same_as(&axes(3, &[0])).unwrap());

        let mut m = ComplexMatrix::zeros(3, 2);
        m[(0, 0)] = real(1.0);
        m[(1, 0)] = real(1.0);
        m[(0, 1)] = real(1.0);
        m[(1, 1)] = real(-1.0);
        let s = orthonormalize(&m, tol()).unwrap();
        assert!(s.same_as(&axes(3, &[0, 1])).unwrap());

        assert_eq!(orthonormalize(&ComplexMatrix::zeros(3, 0), tol()).unwrap().dim(), 0);
    }

    #[test]
    fn lattice_examples() {
        let a = axes(4, &[0, 1]);
        let b = axes(4, &[1, 2]);
        assert!(a.intersect(&b).unwrap().same_as(&axes(4, &[1])).unwrap());
        assert!(a.intersect(&a).unwrap().same_as(&a).unwrap());
        assert!(axes(4, &[0]).intersect(&axes(4, &[1])).unwrap().is_zero());

        assert!(axes(4, &[0]).sum(&axes(4, &[1])).unwrap().same_as(&axes(4, &[0, 1])).unwrap());
        assert!(a.sum(&Subspace::zero(4, tol())).unwrap().same_as(&a).unwrap());
        assert!(a.sum(&b).unwrap().same_as(&axes(4, &[0, 1, 2])).unwrap());
    }

    #[test]
    fn complement_examples() {
        let e1 = axes(3, &[0]);
        assert!(e1.complement(None).unwrap().same_as(&axes(3, &[1, 2])).unwrap());
        let w = axes(3, &[0, 1]);
        assert!(e1.complement(Some(&w)).unwrap().same_as(&axes(3, &[1])).unwrap());
        let z = Subspace::zero(3, tol());
        assert!(z.complement(None).unwrap().same_as(&Subspace::full(3, tol())).unwrap());
        assert!(matches!(axes(3, &[2]).complement(Some(&w)), Err(Error::NotContained)));
    }

    #[test]
    fn angle_examples() {
        let e1 = axes(3, &[0]);
        let mut v = ComplexMatrix::zeros(3, 1);
        v[(0, 0)] = real(1.0);
        v[(1, 0)] = real(1.0);
        let diag = orthonormalize(&v, tol()).unwrap();
        let a = e1.principal_angles(&e1).unwrap();
        assert!(a.len() == 1 && a[0] < 1e-12);
        assert!((e1.principal_angles(&diag).unwrap()[0] - FRAC_PI_4).abs() < 1e-12);
        assert!((e1.principal_angles(&axes(3, &[1])).unwrap()[0] - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn tiny_angles_resolve() {
        let eps = 1e-10;
        let mut v = ComplexMatrix::zeros(3, 1);
        v[(0, 0)] = real(1.0);
        v[(1, 0)] = c64(0.0, eps);
        let tilted = orthonormalize(&v, tol()).unwrap();
        let a = axes(3, &[0]).principal_angles(&tilted).unwrap()[0];
        assert!((a - eps).abs() < 1e-15);
    }

    #[test]
    fn adjacency_examples() {
        assert!(subspaces_adjacent(&axes(4, &[0, 1]), &axes(4, &[0, 2])).unwrap());
        assert!(!subspaces_adjacent(&axes(4, &[0, 1]), &axes(4, &[2, 3])).unwrap());
        let s = axes(4, &[0, 1]);
        assert!(!subspaces_adjacent(&s, &s).unwrap());
        assert!(matches!(
            subspaces_adjacent(&s, &axes(4, &[0])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn path_examples() {
        let full = Subspace::full(4, tol());
        let x = axes(4, &[0, 1]);
        assert_eq!(grassmann_path(&x, &x, &full).unwrap().len(), 1);
        let y = axes(4, &[0, 2]);
        assert_eq!(grassmann_path(&x, &y, &full).unwrap().len(), 2);
        let y = axes(4, &[2, 3]);
        let p = grassmann_path(&x, &y, &full).unwrap();
        assert_eq!(p.len(), 3);
        for w in p.windows(2) {
            assert!(subspaces_adjacent(&w[0], &w[1]).unwrap());
        }
        assert!(p[0].same_as(&x).unwrap() && p[2].same_as(&y).unwrap());
        assert!(matches!(grassmann_path(&x, &y, &axes(4, &[0, 1, 2])), Err(Error::NotContained)));
    }
}
