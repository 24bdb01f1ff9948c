//! Cliques, lines and clique chains.
//!
//! A `(-i,+j)`-clique is the set of operators `T + (a_i - a_j) P_X` where `T` lies in the
//! reduced class `(σ,d)^1_{-i,+j}` and `X` runs over the lines of the `a_j`-eigenspace of
//! `T`. Its members have `a_i`-eigenspaces forming a star (all contain `M^T_i`); the
//! `(-j,+i)`-cliques give tops. Like components, cliques are stored as their base operator.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::adjacency::is_adjacent;
use crate::connectivity::ComponentDescriptor;
use crate::error::{Error, Result};
use crate::family::{meet, parent_spaces, reduced_operator, Band, Meet};
use crate::linalg::{columns, hermitian_eigen, max_abs, numerical_rank, real};
use crate::random::random_subspace_in;
use crate::spectral::{ClassSignature, SpectralOperator};
use crate::subspace::{grassmann_path, Subspace};

/// Whether the `a_i`-eigenspaces of a clique's members form a star or a top.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Star,
    Top,
}

/// The `(-i,+j)`-clique `G(T)`; `pair = (i, j)` is ordered.
#[derive(Debug, Clone)]
pub struct CliqueDescriptor {
    parent: ClassSignature,
    pair: (usize, usize),
    base: SpectralOperator,
}

impl CliqueDescriptor {
    pub fn from_base(parent: &ClassSignature, i: usize, j: usize, base: SpectralOperator) -> Result<Self> {
        parent_spaces(parent, i, j, 1, &base)?;
        Ok(CliqueDescriptor { parent: parent.clone(), pair: (i, j), base })
    }

    /// Builds the descriptor from parent-indexed eigenspaces of the base.
    fn from_spaces(parent: &ClassSignature, i: usize, j: usize, spaces: Vec<Subspace>) -> Result<Self> {
        let base = reduced_operator(parent, i, j, 1, spaces)?;
        Ok(CliqueDescriptor { parent: parent.clone(), pair: (i, j), base })
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

    fn spaces(&self) -> Vec<Subspace> {
        let (i, j) = self.pair;
        parent_spaces(&self.parent, i, j, 1, &self.base).expect("validated at construction")
    }

    /// `M^T_i`, contained in the `a_i`-eigenspace of every member.
    pub fn shrunk_space(&self) -> Subspace {
        self.spaces().swap_remove(self.pair.0)
    }

    /// `M^T_j`, containing the `a_j`-eigenspace of every member.
    pub fn grown_space(&self) -> Subspace {
        self.spaces().swap_remove(self.pair.1)
    }

    /// `M^T_i + M^T_j`.
    pub fn merged_space(&self) -> Subspace {
        let s = self.spaces();
        s[self.pair.0].sum(&s[self.pair.1]).expect("same ambient space")
    }

    pub(crate) fn band(&self) -> Band {
        let (i, j) = self.pair;
        let fixed = self.spaces();
        let lower = fixed[i].clone();
        let merged = lower.sum(&fixed[j]).expect("same ambient space");
        Band { parent: self.parent.clone(), i, j, fixed, upper: merged.clone(), merged, lower }
    }

    /// `T + (a_i - a_j) P_X` for a line `x` of `M^T_j`.
    pub fn member(&self, x: &Subspace) -> Result<SpectralOperator> {
        if x.dim() != 1 {
            return Err(Error::DimensionMismatch { expected: 1, found: x.dim() });
        }
        let grown = self.grown_space();
        if !grown.contains(x)? {
            return Err(Error::NotContained);
        }
        self.band().member(&self.shrunk_space().sum(x)?)
    }

    pub fn random_member<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<SpectralOperator> {
        self.member(&random_subspace_in(&self.grown_space(), 1, rng)?)
    }

    pub fn contains(&self, op: &SpectralOperator) -> Result<bool> {
        self.band().contains(op)
    }

    /// Equality of the underlying sets of operators.
    pub fn same_as(&self, other: &CliqueDescriptor) -> Result<bool> {
        if !self.parent.same_class_as(&other.parent) {
            return Err(Error::ClassMismatch);
        }
        self.band().equals(&other.realigned(&self.parent)?.band())
    }

    /// A `(-i,+j)`-clique is not maximal when `n_j = 1 < n_i`: it then lies inside the
    /// `(-j,+i)`-clique that is the whole `(i,j)`-connected component.
    pub fn is_maximal(&self) -> bool {
        let (i, j) = self.pair;
        !(self.parent.multiplicity(j) == 1 && self.parent.multiplicity(i) > 1)
    }

    /// The same clique expressed against an equivalent parent signature ordering.
    pub fn realigned(&self, parent: &ClassSignature) -> Result<CliqueDescriptor> {
        if parent == &self.parent {
            return Ok(self.clone());
        }
        let map = parent.alignment_to(&self.parent).ok_or(Error::ClassMismatch)?;
        let inv = |s: usize| map.iter().position(|&x| x == s).expect("bijection");
        let spaces = self.spaces();
        let aligned = map.iter().map(|&s| spaces[s].clone()).collect();
        CliqueDescriptor::from_spaces(parent, inv(self.pair.0), inv(self.pair.1), aligned)
    }
}

pub fn star_clique(
    parent: &ClassSignature,
    t: &SpectralOperator,
    i: usize,
    j: usize,
) -> Result<CliqueDescriptor> {
    CliqueDescriptor::from_base(parent, i, j, t.clone())
}

pub fn clique_member(d: &CliqueDescriptor, x: &Subspace) -> Result<SpectralOperator> {
    d.member(x)
}

/// An `(i,j)`-line: the intersection of the `(-i,+j)`-clique of `star_base` and the
/// `(-j,+i)`-clique of `top_base`, where `top_base - star_base = (a_i - a_j) P_X`, `dim X = 2`.
#[derive(Debug, Clone)]
pub struct LineDescriptor {
    parent: ClassSignature,
    pair: (usize, usize),
    star_base: SpectralOperator,
    top_base: SpectralOperator,
}

impl LineDescriptor {
    pub fn new(
        parent: &ClassSignature,
        i: usize,
        j: usize,
        star_base: SpectralOperator,
        top_base: SpectralOperator,
    ) -> Result<Self> {
        let star = CliqueDescriptor::from_base(parent, i, j, star_base)?;
        let top = CliqueDescriptor::from_base(parent, j, i, top_base)?;
        // (Q - T) / (a_i - a_j) must be a rank-2 orthogonal projector.
        let p = (top.base.to_matrix() - star.base.to_matrix())
            * real(1.0 / (parent.eigenvalue(i) - parent.eigenvalue(j)));
        let defect = max_abs(&(&p * &p - &p));
        let rank = numerical_rank(&p, &star.base.tol())?;
        if rank != 2 || defect > 1e-8 {
            return Err(Error::PreconditionViolated(format!(
                "top - star is not (a_i - a_j) times a rank-2 projector (rank {rank}, defect {defect:.2e})"
            )));
        }
        let line = LineDescriptor {
            parent: parent.clone(),
            pair: (i, j),
            star_base: star.base,
            top_base: top.base,
        };
        let b = line.band();
        if !b.upper.contains(&b.lower)? {
            return Err(Error::PreconditionViolated("top does not contain the star's core".into()));
        }
        Ok(line)
    }

    fn from_band(b: &Band) -> Result<Self> {
        let (i, j) = (b.i, b.j);
        let mut star = b.fixed.clone();
        star[i] = b.lower.clone();
        star[j] = b.lower.complement(Some(&b.merged))?;
        let mut top = b.fixed.clone();
        top[i] = b.upper.clone();
        top[j] = b.upper.complement(Some(&b.merged))?;
        Ok(LineDescriptor {
            parent: b.parent.clone(),
            pair: (i, j),
            star_base: reduced_operator(&b.parent, i, j, 1, star)?,
            top_base: reduced_operator(&b.parent, j, i, 1, top)?,
        })
    }

    pub fn parent(&self) -> &ClassSignature {
        &self.parent
    }

    pub fn pair(&self) -> (usize, usize) {
        self.pair
    }

    pub fn star_base(&self) -> &SpectralOperator {
        &self.star_base
    }

    pub fn top_base(&self) -> &SpectralOperator {
        &self.top_base
    }

    pub fn star(&self) -> CliqueDescriptor {
        let (i, j) = self.pair;
        CliqueDescriptor { parent: self.parent.clone(), pair: (i, j), base: self.star_base.clone() }
    }

    pub fn top(&self) -> CliqueDescriptor {
        let (i, j) = self.pair;
        CliqueDescriptor { parent: self.parent.clone(), pair: (j, i), base: self.top_base.clone() }
    }

    /// Members have `a_i`-eigenspace between `lower` and `upper` (dimensions `n_i ∓ 1`).
    pub(crate) fn band(&self) -> Band {
        let star = self.star().band();
        let upper = self.top().band().flipped().expect("complements inside the merged space").upper;
        Band { upper, ..star }
    }

    /// `X_i ∩ Y_i` for any two distinct members.
    pub fn lower(&self) -> Subspace {
        self.band().lower
    }

    /// `X_i + Y_i` for any two distinct members.
    pub fn upper(&self) -> Subspace {
        self.band().upper
    }

    /// The member with `a_i`-eigenspace `x`.
    pub fn member(&self, x: &Subspace) -> Result<SpectralOperator> {
        self.band().member(x)
    }

    pub fn random_member<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<SpectralOperator> {
        let b = self.band();
        let free = b.lower.complement(Some(&b.upper))?;
        self.member(&b.lower.sum(&random_subspace_in(&free, 1, rng)?)?)
    }

    pub fn contains(&self, op: &SpectralOperator) -> Result<bool> {
        self.band().contains(op)
    }

    pub fn same_as(&self, other: &LineDescriptor) -> Result<bool> {
        if !self.parent.same_class_as(&other.parent) {
            return Err(Error::ClassMismatch);
        }
        let (s, t) = (other.star().realigned(&self.parent)?, other.top().realigned(&self.parent)?);
        let other = LineDescriptor {
            parent: self.parent.clone(),
            pair: s.pair,
            star_base: s.base,
            top_base: t.base,
        };
        self.band().equals(&other.band())
    }
}

/// The unordered pair `(i, j)` (`i < j`) such that all pairs of `ops` are `(i,j)`-adjacent.
fn common_type(ops: &[SpectralOperator]) -> Result<Option<(usize, usize)>> {
    let mut types = Vec::new();
    for a in 0..ops.len() {
        for b in a + 1..ops.len() {
            match is_adjacent(&ops[a], &ops[b])?.type_pair {
                Some(t) => types.push(t),
                None => return Ok(None),
            }
        }
    }
    match types.iter().find(|&&t| t != types[0]) {
        Some(t) => Err(Error::InternalInconsistency(format!(
            "mutually adjacent operators with types {:?} and {t:?}",
            types[0]
        ))),
        None => Ok(types.first().copied()),
    }
}

/// Common type of three mutually adjacent operators. Disagreeing pairwise types would
/// refute the triangle property and are reported as `InternalInconsistency`.
pub fn triangle_type(
    a: &SpectralOperator,
    b: &SpectralOperator,
    c: &SpectralOperator,
) -> Result<(usize, usize)> {
    let ops = [a.clone(), a.realign(b)?, a.realign(c)?];
    common_type(&ops)?.ok_or(Error::NotMutuallyAdjacent)
}

/// Finds the pair, orientation and clique containing at least three mutually adjacent
/// operators. The returned pair is `(i, j)` with `i < j`; the descriptor is the
/// `(-i,+j)`-clique for a star and the `(-j,+i)`-clique for a top.
pub fn classify_clique(ops: &[SpectralOperator]) -> Result<((usize, usize), Orientation, CliqueDescriptor)> {
    if ops.len() < 3 {
        return Err(Error::AmbiguousOrientation);
    }
    let first = &ops[0];
    let aligned: Vec<SpectralOperator> = ops.iter().map(|o| first.realign(o)).collect::<Result<_>>()?;
    let (i, j) = match common_type(&aligned) {
        Ok(Some(t)) => t,
        Ok(None) | Err(Error::InternalInconsistency(_)) => {
            return Err(Error::NotAClique("operators are not mutually adjacent with one type".into()))
        }
        Err(e) => return Err(e),
    };
    let parent = first.signature();
    let (ni, nj) = (parent.multiplicity(i), parent.multiplicity(j));
    if ni == 1 || nj == 1 {
        return Err(Error::AmbiguousOrientation);
    }
    let merged = first.eigenspace(i).sum(first.eigenspace(j))?;
    let mut common = first.eigenspace(i).clone();
    let mut span = first.eigenspace(i).clone();
    for op in &aligned[1..] {
        common = common.intersect(op.eigenspace(i))?;
        span = span.sum(op.eigenspace(i))?;
    }
    let mut spaces = first.eigenspaces().to_vec();
    // Star is tried first: three members of one line pass both tests.
    if common.dim() == ni - 1 {
        spaces[j] = common.complement(Some(&merged))?;
        spaces[i] = common;
        let d = CliqueDescriptor::from_spaces(parent, i, j, spaces)?;
        return Ok(((i, j), Orientation::Star, d));
    }
    if span.dim() == ni + 1 {
        spaces[j] = span.complement(Some(&merged))?;
        spaces[i] = span;
        let d = CliqueDescriptor::from_spaces(parent, j, i, spaces)?;
        return Ok(((i, j), Orientation::Top, d));
    }
    Err(Error::NotAClique(format!(
        "a_{i}-eigenspaces meet in dimension {} and span dimension {}",
        common.dim(),
        span.dim()
    )))
}

/// The `(i,j)`-line through two `(i,j)`-adjacent operators.
pub fn line_through(a: &SpectralOperator, b: &SpectralOperator) -> Result<LineDescriptor> {
    let b = a.realign(b)?;
    let (i, j) = is_adjacent(a, &b)?.type_pair.ok_or(Error::NotAdjacent)?;
    let parent = a.signature();
    if parent.multiplicity(i) < 2 || parent.multiplicity(j) < 2 {
        return Err(Error::MultiplicityTooSmall);
    }
    let mut fixed = a.eigenspaces().to_vec();
    let merged = fixed[i].sum(&fixed[j])?;
    let lower = a.eigenspace(i).intersect(b.eigenspace(i))?;
    let upper = a.eigenspace(i).sum(b.eigenspace(i))?;
    fixed[i] = lower.clone();
    fixed[j] = lower.complement(Some(&merged))?;
    LineDescriptor::from_band(&Band { parent: parent.clone(), i, j, fixed, merged, lower, upper })
}

#[derive(Debug, Clone)]
pub enum CliqueIntersection {
    Empty,
    Singleton(SpectralOperator),
    Line(LineDescriptor),
    Equal,
}

pub fn clique_intersection(d1: &CliqueDescriptor, d2: &CliqueDescriptor) -> Result<CliqueIntersection> {
    if !d1.parent.same_class_as(&d2.parent) {
        return Err(Error::ClassMismatch);
    }
    let d2 = d2.realigned(&d1.parent)?;
    let (b1, b2) = (d1.band(), d2.band());
    if b1.equals(&b2)? {
        return Ok(CliqueIntersection::Equal);
    }
    Ok(match meet(&b1, &b2)? {
        Meet::Empty => CliqueIntersection::Empty,
        Meet::Single(op) => CliqueIntersection::Singleton(op),
        Meet::Band(b) => CliqueIntersection::Line(LineDescriptor::from_band(&b)?),
    })
}

// A clique of a component seen in the Grassmann graph of the merged space, counting index `i`.
enum Shape {
    Star(Subspace),
    Top(Subspace),
}

/// The `dim`-dimensional subspace of `within` closest to `target`.
fn closest_in(within: &Subspace, target: &Subspace, dim: usize) -> Result<Subspace> {
    let f = within.frame();
    let (_, vectors) = hermitian_eigen(&(f.adjoint() * target.projector() * f));
    let w = within.dim();
    let idx: Vec<usize> = (w - dim..w).collect();
    Subspace::from_frame(f * columns(&vectors, &idx), within.tol())
}

/// Maximal cliques from `d1` to `d2` inside `component`, consecutive ones meeting in an
/// `(i,j)`-line. Stars and tops alternate.
pub fn clique_chain(
    d1: &CliqueDescriptor,
    d2: &CliqueDescriptor,
    component: &ComponentDescriptor,
) -> Result<Vec<CliqueDescriptor>> {
    let parent = component.parent().clone();
    let (d1, d2) = (d1.realigned(&parent)?, d2.realigned(&parent)?);
    let comp = component.band();
    for d in [&d1, &d2] {
        let b = d.band();
        if !b.same_pair(&comp) || !b.same_frame(&comp.counting(b.i)?)? {
            return Err(Error::DifferentComponents);
        }
    }
    let (i, j) = d1.pair;
    let n = parent.multiplicity(i);
    if n < 2 || parent.multiplicity(j) < 2 {
        return Err(Error::MultiplicityTooSmall);
    }
    if d1.same_as(&d2)? {
        return Ok(vec![d1]);
    }
    let merged = comp.merged.clone();
    let shape = |d: &CliqueDescriptor| -> Shape {
        if d.pair.0 == i {
            Shape::Star(d.shrunk_space())
        } else {
            Shape::Top(d.grown_space())
        }
    };
    let (s1, s2) = (shape(&d1), shape(&d2));
    let (start, end) = match (&s1, &s2) {
        (Shape::Star(l1), Shape::Star(l2)) => (l1.clone(), l2.clone()),
        (Shape::Star(l1), Shape::Top(u2)) => (l1.clone(), closest_in(u2, l1, n - 1)?),
        (Shape::Top(u1), Shape::Star(l2)) => (closest_in(u1, l2, n - 1)?, l2.clone()),
        (Shape::Top(u1), Shape::Top(u2)) => {
            let l1 = closest_in(u1, u2, n - 1)?;
            let l2 = closest_in(u2, &l1, n - 1)?;
            (l1, l2)
        }
    };

    let star = |l: &Subspace| -> Result<CliqueDescriptor> {
        let mut spaces = comp.fixed.clone();
        spaces[i] = l.clone();
        spaces[j] = l.complement(Some(&merged))?;
        CliqueDescriptor::from_spaces(&parent, i, j, spaces)
    };
    let top = |u: &Subspace| -> Result<CliqueDescriptor> {
        let mut spaces = comp.fixed.clone();
        spaces[i] = u.clone();
        spaces[j] = u.complement(Some(&merged))?;
        CliqueDescriptor::from_spaces(&parent, j, i, spaces)
    };

    let mut chain = Vec::new();
    if let Shape::Top(_) = s1 {
        chain.push(d1.clone());
    }
    let stars = grassmann_path(&start, &end, &merged)?;
    for (t, l) in stars.iter().enumerate() {
        chain.push(star(l)?);
        if let Some(next) = stars.get(t + 1) {
            let pair_span = l.sum(next)?;
            let rest = pair_span.complement(Some(&merged))?;
            let extra = Subspace::from_frame(columns(rest.frame(), &[0]), rest.tol())?;
            chain.push(top(&pair_span.sum(&extra)?)?);
        }
    }
    if let Shape::Top(_) = s2 {
        chain.push(d2.clone());
    }
    // Endpoints are the inputs themselves, not re-derived copies.
    chain[0] = d1;
    let last = chain.len() - 1;
    chain[last] = d2;

    for w in chain.windows(2) {
        if !matches!(clique_intersection(&w[0], &w[1])?, CliqueIntersection::Line(_)) {
            return Err(Error::InternalInconsistency("consecutive cliques do not meet in a line".into()));
        }
    }
    Ok(chain)
}
