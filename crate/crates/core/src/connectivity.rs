//! Paths, `(i,j)`-connected components and adjacency between components.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::adjacency::is_adjacent;
use crate::error::{Error, Result};
use crate::family::{meet, parent_spaces, reduced_index, reduced_operator, Band, Meet};
use crate::linalg::{ComplexMatrix, ComplexVector};
use crate::random::random_subspace_in;
use crate::spectral::{require_same_class, ClassSignature, SpectralOperator};
use crate::subspace::{grassmann_path, Subspace};

pub use crate::family::reduced_signature;

fn sorted(i: usize, j: usize) -> (usize, usize) {
    (i.min(j), i.max(j))
}

/// A walk in the graph; `edge_types[t]` is the type of the edge from vertex `t` to `t + 1`.
#[derive(Debug, Clone)]
pub struct OperatorPath {
    pub vertices: Vec<SpectralOperator>,
    pub edge_types: Vec<(usize, usize)>,
}

impl OperatorPath {
    pub fn trivial(a: SpectralOperator) -> Self {
        OperatorPath { vertices: vec![a], edge_types: Vec::new() }
    }

    /// Number of edges.
    pub fn len(&self) -> usize {
        self.edge_types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edge_types.is_empty()
    }

    pub fn first(&self) -> &SpectralOperator {
        &self.vertices[0]
    }

    pub fn last(&self) -> &SpectralOperator {
        self.vertices.last().expect("a path has at least one vertex")
    }

    fn push(&mut self, op: SpectralOperator, i: usize, j: usize) {
        self.vertices.push(op);
        self.edge_types.push(sorted(i, j));
    }

    fn append(&mut self, tail: OperatorPath) {
        self.vertices.extend(tail.vertices.into_iter().skip(1));
        self.edge_types.extend(tail.edge_types);
    }

    /// Checks every edge with [`is_adjacent`] against its recorded type.
    pub fn validate(&self) -> Result<()> {
        if self.vertices.len() != self.edge_types.len() + 1 {
            return Err(Error::InvalidInput("vertex and edge counts disagree".into()));
        }
        for (t, pair) in self.edge_types.iter().enumerate() {
            let v = is_adjacent(&self.vertices[t], &self.vertices[t + 1])?;
            if v.type_pair != Some(*pair) {
                return Err(Error::InternalInconsistency(format!(
                    "edge {t}: recorded type {pair:?}, verdict {:?} (rank {})",
                    v.type_pair, v.diff_rank
                )));
            }
        }
        Ok(())
    }
}

/// `X_p = Y_p` for every `p ∉ {i, j}`.
pub fn ij_connected(a: &SpectralOperator, b: &SpectralOperator, i: usize, j: usize) -> Result<bool> {
    require_same_class(a, b)?;
    a.signature().check_pair(i, j)?;
    let ys = a.aligned_eigenspaces(b)?;
    for (t, (x, y)) in a.eigenspaces().iter().zip(ys).enumerate() {
        if t != i && t != j && !x.same_as(y)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A path of `(i,j)`-edges from `a` to `b`, lifted from a Grassmann path of the
/// eigenspace with the smaller multiplicity inside `X_i + X_j`.
pub fn ij_path(a: &SpectralOperator, b: &SpectralOperator, i: usize, j: usize) -> Result<OperatorPath> {
    if !ij_connected(a, b, i, j)? {
        return Err(Error::NotIJConnected(i, j));
    }
    let target = a.realign(b)?;
    let sig = a.signature();
    let (s, o) = if sig.multiplicity(i) <= sig.multiplicity(j) { (i, j) } else { (j, i) };
    let merged = a.eigenspace(i).sum(a.eigenspace(j))?;
    let steps = grassmann_path(a.eigenspace(s), target.eigenspace(s), &merged)?;
    let mut path = OperatorPath::trivial(a.clone());
    let last = steps.len() - 1;
    for (t, z) in steps.into_iter().enumerate().skip(1) {
        let next = if t == last {
            target.clone()
        } else {
            let zc = z.complement(Some(&merged))?;
            a.with_eigenspaces(vec![(s, z), (o, zc)])?
        };
        path.push(next, i, j);
    }
    Ok(path)
}

fn differing(a: &SpectralOperator, b: &SpectralOperator) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for t in 0..a.k() {
        if !a.eigenspace(t).same_as(b.eigenspace(t))? {
            out.push(t);
        }
    }
    Ok(out)
}

fn column(v: &ComplexVector) -> ComplexMatrix {
    ComplexMatrix::from_column_slice(v.len(), 1, v.as_slice())
}

const NEGLIGIBLE: f64 = 1e-10;

/// One `(u,q)`-edge that moves the `X_u`-component of `z` into `X_q`.
fn absorb(path: &mut OperatorPath, u: usize, q: usize, z: &ComplexVector) -> Result<()> {
    let cur = path.last().clone();
    let tol = cur.tol();
    let xq = cur.eigenspace(q);
    let xu = cur.eigenspace(u);
    let zu = xu.project(z);
    let c = xq.project(z);
    let (hole, v) = if c.norm() > NEGLIGIBLE {
        (Subspace::span(&column(&c), tol)?, &c + &zu)
    } else {
        (Subspace::span(&xq.frame().columns(0, 1).into_owned(), tol)?, zu)
    };
    let keep = hole.complement(Some(xq))?;
    let new_q = keep.sum(&Subspace::span(&column(&v), tol)?)?;
    let new_u = new_q.complement(Some(&xq.sum(xu)?))?;
    let next = cur.with_eigenspaces(vec![(q, new_q), (u, new_u)])?;
    path.push(next, u, q);
    Ok(())
}

/// Moves `X_t` to `goal` through edges among the indices in `active`, all other
/// eigenspaces being final already.
fn move_eigenspace(path: &mut OperatorPath, active: &[usize], t: usize, goal: &Subspace) -> Result<()> {
    let start = path.last().clone();
    let mut region = Subspace::zero(start.ambient_dim(), start.tol());
    for &u in active {
        region = region.sum(start.eigenspace(u))?;
    }
    let steps = grassmann_path(start.eigenspace(t), goal, &region)?;
    let others: Vec<usize> = active.iter().copied().filter(|&u| u != t).collect();
    for w_next in steps.into_iter().skip(1) {
        let w = path.last().eigenspace(t).clone();
        let zs = w.complement(Some(&w.sum(&w_next)?))?;
        let z: ComplexVector = zs.frame().column(0).into_owned();

        // Gather z into the eigenspace that already holds most of it, then trade it for
        // a direction of X_t.
        let cur = path.last();
        let q = *others
            .iter()
            .max_by(|&&a, &&b| {
                let na = cur.eigenspace(a).project(&z).norm();
                let nb = cur.eigenspace(b).project(&z).norm();
                na.total_cmp(&nb).then(b.cmp(&a))
            })
            .expect("at least two other indices");
        for &u in &others {
            if u != q && path.last().eigenspace(u).project(&z).norm() > NEGLIGIBLE {
                absorb(path, u, q, &z)?;
            }
        }
        let cur = path.last().clone();
        let xq = cur.eigenspace(q);
        let new_q = w_next.complement(Some(&xq.sum(&w)?))?;
        let next = cur.with_eigenspaces(vec![(t, w_next), (q, new_q)])?;
        path.push(next, q, t);
    }
    Ok(())
}

/// A path from `a` to `b`.
///
/// While three or more eigenspaces differ, the differing eigenspace of smallest
/// multiplicity (highest index on ties) is walked to its target along a Grassmann path
/// inside the sum of the differing eigenspaces; each step first gathers the new direction
/// into a single other eigenspace and then swaps it in. Two remaining differences are
/// closed with [`ij_path`].
pub fn connect(a: &SpectralOperator, b: &SpectralOperator) -> Result<OperatorPath> {
    require_same_class(a, b)?;
    let target = a.realign(b)?;
    let sig = a.signature().clone();
    let mut path = OperatorPath::trivial(a.clone());
    loop {
        let cur = path.last().clone();
        let diff = differing(&cur, &target)?;
        match diff.len() {
            0 => break,
            1 | 2 => {
                let i = diff[0];
                let j = if diff.len() == 2 { diff[1] } else if i == 0 { 1 } else { 0 };
                path.append(ij_path(&cur, &target, i, j)?);
                break;
            }
            _ => {
                let t = *diff
                    .iter()
                    .min_by(|&&x, &&y| sig.multiplicity(x).cmp(&sig.multiplicity(y)).then(y.cmp(&x)))
                    .expect("nonempty");
                move_eigenspace(&mut path, &diff, t, target.eigenspace(t))?;
            }
        }
    }
    Ok(path)
}

/// The `(i,j)`-connected component of an operator, stored as its base `T`: the operator
/// of the reduced class `(σ,d)^{n_i}_{-i,+j}` with `a_j`-eigenspace `X_i + X_j`.
#[derive(Debug, Clone)]
pub struct ComponentDescriptor {
    parent: ClassSignature,
    pair: (usize, usize),
    base: SpectralOperator,
}

impl ComponentDescriptor {
    pub fn from_base(parent: &ClassSignature, i: usize, j: usize, base: SpectralOperator) -> Result<Self> {
        parent.check_pair(i, j)?;
        parent_spaces(parent, i, j, parent.multiplicity(i), &base)?;
        Ok(ComponentDescriptor { parent: parent.clone(), pair: (i, j), base })
    }

    pub fn parent(&self) -> &ClassSignature {
        &self.parent
    }

    pub fn pair(&self) -> (usize, usize) {
        self.pair
    }

    pub fn base(&self) -> &SpectralOperator {
        &self.base
    }

    /// `X_i + X_j`, shared by all members.
    pub fn merged_space(&self) -> &Subspace {
        let (i, j) = self.pair;
        self.base.eigenspace(reduced_index(j, Some(i)).expect("j survives"))
    }

    /// The common `a_t`-eigenspace of all members, `t ∉ {i, j}`.
    pub fn fixed_eigenspace(&self, t: usize) -> Option<&Subspace> {
        let (i, j) = self.pair;
        if t == i || t == j || t >= self.parent.k() {
            return None;
        }
        Some(self.base.eigenspace(reduced_index(t, Some(i))?))
    }

    pub(crate) fn band(&self) -> Band {
        let (i, j) = self.pair;
        let n = self.base.ambient_dim();
        let tol = self.base.tol();
        let fixed = (0..self.parent.k())
            .map(|t| self.fixed_eigenspace(t).cloned().unwrap_or_else(|| Subspace::zero(n, tol)))
            .collect();
        let merged = self.merged_space().clone();
        Band {
            parent: self.parent.clone(),
            i,
            j,
            fixed,
            lower: Subspace::zero(n, tol),
            upper: merged.clone(),
            merged,
        }
    }

    /// The same component with the pair listed as `(i, j)`.
    pub fn oriented(&self, i: usize, j: usize) -> Result<ComponentDescriptor> {
        if (i, j) == self.pair {
            return Ok(self.clone());
        }
        if (j, i) != self.pair {
            return Err(Error::BadIndices(format!("({i}, {j}) is not the pair {:?}", self.pair)));
        }
        let mut spaces = self.band().fixed;
        spaces[j] = self.merged_space().clone();
        spaces[i] = Subspace::zero(self.base.ambient_dim(), self.base.tol());
        let base = reduced_operator(&self.parent, i, j, self.parent.multiplicity(i), spaces)?;
        Ok(ComponentDescriptor { parent: self.parent.clone(), pair: (i, j), base })
    }

    /// Member with `a_i`-eigenspace `x` (and `a_j`-eigenspace `M ⊖ x`), for the first index of the pair.
    pub fn member(&self, x: &Subspace) -> Result<SpectralOperator> {
        self.band().member(x)
    }

    /// Member whose `a_t`-eigenspace is `x`, `t` either index of the pair.
    pub fn member_with(&self, t: usize, x: &Subspace) -> Result<SpectralOperator> {
        let (i, j) = self.pair;
        if t != i && t != j {
            return Err(Error::BadIndices(format!("{t} is not in the pair {:?}", self.pair)));
        }
        self.band().counting(t)?.member(x)
    }

    pub fn contains(&self, op: &SpectralOperator) -> Result<bool> {
        self.band().contains(op)
    }

    /// Equality of the underlying sets of operators.
    pub fn same_as(&self, other: &ComponentDescriptor) -> Result<bool> {
        if !self.parent.same_class_as(&other.parent) {
            return Err(Error::ClassMismatch);
        }
        let other = other.realigned(&self.parent)?;
        self.band().equals(&other.band())
    }

    /// The same descriptor expressed against an equivalent parent signature ordering.
    pub fn realigned(&self, parent: &ClassSignature) -> Result<ComponentDescriptor> {
        if parent == &self.parent {
            return Ok(self.clone());
        }
        let map = parent.alignment_to(&self.parent).ok_or(Error::ClassMismatch)?;
        let inv = |s: usize| map.iter().position(|&x| x == s).expect("bijection");
        let band = self.band();
        let (i, j) = (inv(self.pair.0), inv(self.pair.1));
        let mut spaces: Vec<Subspace> = map.iter().map(|&s| band.fixed[s].clone()).collect();
        spaces[j] = band.merged.clone();
        spaces[i] = Subspace::zero(self.base.ambient_dim(), self.base.tol());
        let base = reduced_operator(parent, i, j, parent.multiplicity(i), spaces)?;
        Ok(ComponentDescriptor { parent: parent.clone(), pair: (i, j), base })
    }
}

pub fn component_of(a: &SpectralOperator, i: usize, j: usize) -> Result<ComponentDescriptor> {
    let sig = a.signature();
    sig.check_pair(i, j)?;
    let mut spaces: Vec<Subspace> = a.eigenspaces().to_vec();
    spaces[j] = a.eigenspace(i).sum(a.eigenspace(j))?;
    let base = reduced_operator(sig, i, j, sig.multiplicity(i), spaces)?;
    Ok(ComponentDescriptor { parent: sig.clone(), pair: (i, j), base })
}

pub fn component_member(d: &ComponentDescriptor, x: &Subspace) -> Result<SpectralOperator> {
    d.member(x)
}

/// How two components relate.
#[derive(Debug, Clone)]
pub enum ComponentRelation {
    Identical,
    NotAdjacent,
    /// Same family, adjacent bases; `a ∈ D1` and `b ∈ D2` form one of the many adjacent pairs.
    Adjacent { a: SpectralOperator, b: SpectralOperator, base_type: (usize, usize) },
    /// Different families sharing exactly this operator.
    Intersecting(SpectralOperator),
    /// Different families, disjoint, joined by exactly one adjacent pair.
    UniqueBridge { a: SpectralOperator, b: SpectralOperator, edge_type: (usize, usize) },
}

/// Decides whether some member of `d1` is adjacent to some member of `d2` and produces
/// witnesses. Every returned witness has been checked with [`is_adjacent`].
pub fn components_adjacent<R: Rng + ?Sized>(
    d1: &ComponentDescriptor,
    d2: &ComponentDescriptor,
    rng: &mut R,
) -> Result<ComponentRelation> {
    if !d1.parent.same_class_as(&d2.parent) {
        return Err(Error::ClassMismatch);
    }
    let d2 = d2.realigned(&d1.parent)?;
    if d1.same_as(&d2)? {
        return Ok(ComponentRelation::Identical);
    }
    let (i, j) = d1.pair;
    if sorted(i, j) == sorted(d2.pair.0, d2.pair.1) {
        let d2 = d2.oriented(i, j)?;
        let v = is_adjacent(&d1.base, &d2.base)?;
        let Some(base_type) = v.type_pair else {
            return Ok(ComponentRelation::NotAdjacent);
        };
        let (mt, mq) = (d1.merged_space(), d2.merged_space());
        let room = if mt.same_as(mq)? { mt.clone() } else { mt.intersect(mq)? };
        let x = random_subspace_in(&room, d1.parent.multiplicity(i), rng)?;
        let a = d1.member(&x)?;
        let b = d2.member(&x)?;
        if !is_adjacent(&a, &b)?.adjacent() {
            return Err(Error::InternalInconsistency(
                "witness built from adjacent bases is not adjacent".into(),
            ));
        }
        return Ok(ComponentRelation::Adjacent { a, b, base_type });
    }

    let (b1, b2) = (d1.band(), d2.band());
    if let Meet::Single(op) = meet(&b1, &b2)? {
        return Ok(ComponentRelation::Intersecting(op));
    }
    let mut found: Vec<(SpectralOperator, SpectralOperator, (usize, usize))> = Vec::new();
    let k = d1.parent.k();
    for u in 0..k {
        for w in u + 1..k {
            if (u, w) == sorted(b1.i, b1.j) || (u, w) == sorted(b2.i, b2.j) {
                continue;
            }
            let Some((a, b)) = solve_bridge(&b1, &b2, u, w)? else { continue };
            if !b1.contains(&a)? || !b2.contains(&b)? {
                continue;
            }
            if is_adjacent(&a, &b)?.type_pair != Some((u, w)) {
                continue;
            }
            let mut duplicate = false;
            for (fa, fb, _) in &found {
                if fa.equals(&a)? && fb.equals(&b)? {
                    duplicate = true;
                }
            }
            if !duplicate {
                found.push((a, b, (u, w)));
            }
        }
    }
    match found.len() {
        0 => Ok(ComponentRelation::NotAdjacent),
        1 => {
            let (a, b, edge_type) = found.pop().expect("one bridge");
            Ok(ComponentRelation::UniqueBridge { a, b, edge_type })
        }
        n => Err(Error::InternalInconsistency(format!("{n} distinct bridges between components"))),
    }
}

/// Candidate `A ∈ b1`, `B ∈ b2` that are `(u,w)`-adjacent, if the constraints pin them down.
fn solve_bridge(b1: &Band, b2: &Band, u: usize, w: usize) -> Result<Option<(SpectralOperator, SpectralOperator)>> {
    let k = b1.parent.k();
    let mut a: Vec<Option<Subspace>> = (0..k).map(|t| (!b1.free(t)).then(|| b1.fixed[t].clone())).collect();
    let mut b: Vec<Option<Subspace>> = (0..k).map(|t| (!b2.free(t)).then(|| b2.fixed[t].clone())).collect();

    fn close(band: &Band, x: &mut [Option<Subspace>]) -> Result<bool> {
        let mut changed = false;
        for (s, o) in [(band.i, band.j), (band.j, band.i)] {
            if x[s].is_none() {
                if let Some(known) = x[o].clone() {
                    match known.complement(Some(&band.merged)) {
                        Ok(c) => x[s] = Some(c),
                        Err(Error::NotContained) => return Err(Error::NotContained),
                        Err(e) => return Err(e),
                    }
                    changed = true;
                }
            }
        }
        Ok(changed)
    }

    let propagate = |a: &mut Vec<Option<Subspace>>, b: &mut Vec<Option<Subspace>>| -> Result<()> {
        loop {
            let mut changed = false;
            for t in 0..k {
                if t == u || t == w {
                    continue;
                }
                match (&a[t], &b[t]) {
                    (Some(x), None) => {
                        b[t] = Some(x.clone());
                        changed = true;
                    }
                    (None, Some(y)) => {
                        a[t] = Some(y.clone());
                        changed = true;
                    }
                    _ => {}
                }
            }
            changed |= close(b1, a)?;
            changed |= close(b2, b)?;
            if !changed {
                return Ok(());
            }
        }
    };

    let outcome = (|| -> Result<()> {
        propagate(&mut a, &mut b)?;
        if a.iter().chain(b.iter()).any(Option::is_none) {
            // Shared free index s, other free indices p (of b1) and q (of b2), edge {p, q}:
            // both new eigenspaces live in R = X_q + Y_p.
            let shared: Vec<usize> = [b1.i, b1.j].into_iter().filter(|&t| b2.free(t)).collect();
            if shared.len() == 1 {
                let s = shared[0];
                let p = if b1.i == s { b1.j } else { b1.i };
                let q = if b2.i == s { b2.j } else { b2.i };
                if sorted(p, q) == (u, w) {
                    if let (Some(xq), Some(yp)) = (a[q].clone(), b[p].clone()) {
                        let r = xq.sum(&yp)?;
                        let np = b1.parent.multiplicity(p);
                        let nq = b1.parent.multiplicity(q);
                        if r.dim() == np + nq {
                            a[p] = Some(xq.complement(Some(&r))?);
                            b[q] = Some(yp.complement(Some(&r))?);
                            propagate(&mut a, &mut b)?;
                        }
                    }
                }
            }
        }
        Ok(())
    })();
    match outcome {
        Ok(()) => {}
        Err(Error::NotContained) => return Ok(None),
        Err(e) => return Err(e),
    }
    if a.iter().chain(b.iter()).any(Option::is_none) {
        return Ok(None);
    }
    let build = |x: Vec<Option<Subspace>>| -> Result<Option<SpectralOperator>> {
        let spaces = x.into_iter().map(|s| s.expect("solved")).collect();
        match SpectralOperator::new(b1.parent.clone(), spaces) {
            Ok(op) => Ok(Some(op)),
            Err(Error::NonOrthogonalEigenspaces(..)) | Err(Error::DimensionMismatch { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    };
    match (build(a)?, build(b)?) {
        (Some(x), Some(y)) => Ok(Some((x, y))),
        _ => Ok(None),
    }
}
