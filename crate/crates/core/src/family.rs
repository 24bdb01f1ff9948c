//! Sets of operators pinned everywhere except at two indices.
//!
//! Components and cliques are both of this shape: all eigenspaces except `X_i`, `X_j` are
//! fixed, `X_i + X_j` is a fixed subspace `M`, and `X_i` ranges over the `n_i`-dimensional
//! subspaces of `M` lying between two fixed subspaces `L ⊆ U`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::spectral::{ClassSignature, SpectralOperator};
use crate::subspace::Subspace;

/// `(σ, d)^m_{-i,+j}`: `m` dimensions moved from `a_i` to `a_j`. When `m = n_i` the
/// eigenvalue `a_i` disappears.
pub fn reduced_signature(
    signature: &ClassSignature,
    i: usize,
    j: usize,
    m: usize,
) -> Result<ClassSignature> {
    signature.check_pair(i, j)?;
    let ni = signature.multiplicity(i);
    if m == 0 || m > ni {
        return Err(Error::InvalidInput(alloc::format!("cannot move {m} of {ni} dimensions")));
    }
    let mut values = signature.eigenvalues().to_vec();
    let mut mult = signature.multiplicities().to_vec();
    mult[j] += m;
    mult[i] -= m;
    if m == ni {
        values.remove(i);
        mult.remove(i);
    }
    ClassSignature::new(values, mult)
}

/// Position of parent index `t` in a reduced signature that dropped `removed` (if any).
pub(crate) fn reduced_index(t: usize, removed: Option<usize>) -> Option<usize> {
    match removed {
        Some(r) if t == r => None,
        Some(r) if t > r => Some(t - 1),
        _ => Some(t),
    }
}

/// Builds the reduced operator from parent-indexed eigenspaces (`spaces[i]` is skipped when
/// `m = n_i`).
pub(crate) fn reduced_operator(
    parent: &ClassSignature,
    i: usize,
    j: usize,
    m: usize,
    spaces: Vec<Subspace>,
) -> Result<SpectralOperator> {
    let sig = reduced_signature(parent, i, j, m)?;
    let removed = m == parent.multiplicity(i);
    let list = spaces
        .into_iter()
        .enumerate()
        .filter(|(t, _)| !(removed && *t == i))
        .map(|(_, x)| x)
        .collect();
    SpectralOperator::new(sig, list)
}

/// Parent-indexed eigenspaces of a reduced operator; index `i` gets the zero subspace when
/// it was removed.
pub(crate) fn parent_spaces(
    parent: &ClassSignature,
    i: usize,
    j: usize,
    m: usize,
    base: &SpectralOperator,
) -> Result<Vec<Subspace>> {
    let expected = reduced_signature(parent, i, j, m)?;
    if base.signature() != &expected {
        return Err(Error::SignatureMismatch);
    }
    let removed = (m == parent.multiplicity(i)).then_some(i);
    Ok((0..parent.k())
        .map(|t| match reduced_index(t, removed) {
            Some(r) => base.eigenspace(r).clone(),
            None => Subspace::zero(base.ambient_dim(), base.tol()),
        })
        .collect())
}

#[derive(Debug, Clone)]
pub(crate) struct Band {
    pub parent: ClassSignature,
    /// Counted index: members have `a_i`-eigenspace between `lower` and `upper`.
    pub i: usize,
    pub j: usize,
    /// Parent-indexed; entries `i` and `j` are unused.
    pub fixed: Vec<Subspace>,
    pub merged: Subspace,
    pub lower: Subspace,
    pub upper: Subspace,
}

pub(crate) enum Meet {
    Empty,
    Single(SpectralOperator),
    Band(Band),
}

impl Band {
    pub fn flipped(&self) -> Result<Band> {
        Ok(Band {
            parent: self.parent.clone(),
            i: self.j,
            j: self.i,
            fixed: self.fixed.clone(),
            merged: self.merged.clone(),
            lower: self.upper.complement(Some(&self.merged))?,
            upper: self.lower.complement(Some(&self.merged))?,
        })
    }

    pub fn counting(&self, i: usize) -> Result<Band> {
        if i == self.i {
            Ok(self.clone())
        } else {
            self.flipped()
        }
    }

    pub fn same_pair(&self, other: &Band) -> bool {
        (self.i, self.j) == (other.i, other.j) || (self.i, self.j) == (other.j, other.i)
    }

    pub fn free(&self, t: usize) -> bool {
        t == self.i || t == self.j
    }

    /// Same fixed eigenspaces and merged space (pairs must agree).
    pub fn same_frame(&self, other: &Band) -> Result<bool> {
        if !self.merged.same_as(&other.merged)? {
            return Ok(false);
        }
        for t in 0..self.parent.k() {
            if !self.free(t) && !self.fixed[t].same_as(&other.fixed[t])? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn member(&self, e: &Subspace) -> Result<SpectralOperator> {
        let n = self.parent.multiplicity(self.i);
        if e.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: e.dim() });
        }
        if !self.upper.contains(e)? || !e.contains(&self.lower)? {
            return Err(Error::NotContained);
        }
        let mut spaces = self.fixed.clone();
        spaces[self.j] = e.complement(Some(&self.merged))?;
        spaces[self.i] = e.clone();
        SpectralOperator::new(self.parent.clone(), spaces)
    }

    pub fn contains(&self, op: &SpectralOperator) -> Result<bool> {
        let spaces = op.aligned_to(&self.parent)?;
        for (t, (x, fixed)) in spaces.iter().zip(&self.fixed).enumerate() {
            if !self.free(t) && !x.same_as(fixed)? {
                return Ok(false);
            }
        }
        let e = spaces[self.i];
        Ok(self.upper.contains(e)? && e.contains(&self.lower)?)
    }

    pub fn equals(&self, other: &Band) -> Result<bool> {
        if !self.same_pair(other) {
            return Ok(false);
        }
        let other = other.counting(self.i)?;
        Ok(self.same_frame(&other)?
            && self.lower.same_as(&other.lower)?
            && self.upper.same_as(&other.upper)?)
    }
}

/// Intersection of two bands of the same parent signature.
pub(crate) fn meet(b1: &Band, b2: &Band) -> Result<Meet> {
    if b1.same_pair(b2) {
        let b2 = b2.counting(b1.i)?;
        if !b1.same_frame(&b2)? {
            return Ok(Meet::Empty);
        }
        let lower = b1.lower.sum(&b2.lower)?;
        let upper = b1.upper.intersect(&b2.upper)?;
        let n = b1.parent.multiplicity(b1.i);
        if !upper.contains(&lower)? || lower.dim() > n || upper.dim() < n {
            return Ok(Meet::Empty);
        }
        if lower.dim() == n {
            return Ok(Meet::Single(b1.member(&lower)?));
        }
        if upper.dim() == n {
            return Ok(Meet::Single(b1.member(&upper)?));
        }
        return Ok(Meet::Band(Band { lower, upper, ..b1.clone() }));
    }

    // Different pairs: at most one index is free in both, and it is determined by the
    // other free index of its band, which the other band pins.
    let k = b1.parent.k();
    let mut spaces: Vec<Option<Subspace>> = alloc::vec![None; k];
    for (t, slot) in spaces.iter_mut().enumerate() {
        if !b1.free(t) {
            *slot = Some(b1.fixed[t].clone());
        }
        if !b2.free(t) {
            match slot {
                Some(x) if !x.same_as(&b2.fixed[t])? => return Ok(Meet::Empty),
                Some(_) => {}
                None => *slot = Some(b2.fixed[t].clone()),
            }
        }
    }
    for (band, other) in [(b1, b2), (b2, b1)] {
        for (s, o) in [(band.i, band.j), (band.j, band.i)] {
            if spaces[s].is_none() && other.free(s) {
                let known = spaces[o].clone().ok_or_else(|| {
                    Error::InternalInconsistency("two bands share both free indices".into())
                })?;
                spaces[s] = match known.complement(Some(&band.merged)) {
                    Ok(x) => Some(x),
                    Err(Error::NotContained) => return Ok(Meet::Empty),
                    Err(e) => return Err(e),
                };
            }
        }
    }
    let spaces: Vec<Subspace> = spaces.into_iter().map(|x| x.expect("all indices solved")).collect();
    let op = match SpectralOperator::new(b1.parent.clone(), spaces) {
        Ok(op) => op,
        Err(Error::NonOrthogonalEigenspaces(..)) | Err(Error::DimensionMismatch { .. }) => {
            return Ok(Meet::Empty)
        }
        Err(e) => return Err(e),
    };
    Ok(if b1.contains(&op)? && b2.contains(&op)? { Meet::Single(op) } else { Meet::Empty })
}
