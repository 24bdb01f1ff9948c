//! Seeded property suite.
//!
//! Every named test runs `trials` independent trials. Trial `t` of test `name` draws from a
//! ChaCha8 generator seeded with `seed ^ fnv1a(name)` on stream `t`, so any failure can be
//! replayed alone with [`run_trial`] and the report does not depend on scheduling.

use std::f64::consts::FRAC_PI_2;
use std::time::Instant;

use grassop_core::adjacency::{
    adjacency_oracle, image_direct_sum_check, is_adjacent, make_ij_adjacent, pseudo_adjacent_c3,
    pseudo_adjacent_general, random_hermitian_on, rotate_between,
};
use grassop_core::cliques::{
    classify_clique, clique_chain, clique_intersection, line_through, star_clique, triangle_type,
    CliqueDescriptor, CliqueIntersection, Orientation,
};
use grassop_core::connectivity::{
    component_of, components_adjacent, connect, ij_connected, ij_path, reduced_signature,
    ComponentDescriptor, ComponentRelation,
};
use grassop_core::linalg::{c64, real, singular_values};
use grassop_core::random::{
    complex_gaussian, random_subspace, random_subspace_in, random_unitary, random_vector_in,
};
use grassop_core::spectral::{random_operator_with_tol, random_sd_element};
use grassop_core::symmetry::{
    adjacency_type_transport, commutation_check, orthogonality_defect, semilinear_k2_automorphism,
    verify_automorphism, SemilinearMap, Symmetry,
};
use grassop_core::{
    make_operator, orthonormalize, ClassSignature, ComplexMatrix, ComplexVector, Error,
    Permutation, SpectralOperator, Subspace, Tolerance,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::io::OperatorDoc;

pub const MAX_AMBIENT_LIMIT: usize = 64;

#[derive(Debug, thiserror::Error)]
pub enum SuiteError {
    #[error("invalid suite configuration: {0}")]
    InvalidConfig(String),
    #[error("unknown test {0:?}")]
    UnknownTest(String),
}

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub seed: u64,
    pub trials: usize,
    /// Largest ambient dimension any test may use.
    pub max_ambient: usize,
    pub signatures: Vec<ClassSignature>,
    /// Overrides the tolerance of sampled operators.
    pub tolerance: Option<Tolerance>,
    /// Pairs sampled per map in the symmetry tests.
    pub pairs_per_map: usize,
    /// Run only these tests (all when `None`).
    pub only: Option<Vec<String>>,
    /// Record per-test wall time. Off by default because it breaks byte-identical reports.
    pub timing: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 0,
            trials: 100,
            max_ambient: 12,
            signatures: default_signatures(),
            tolerance: None,
            pairs_per_map: 10,
            only: None,
            timing: false,
        }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<(), SuiteError> {
        if self.trials == 0 {
            return Err(SuiteError::InvalidConfig("trials must be at least 1".into()));
        }
        if self.max_ambient == 0 || self.max_ambient > MAX_AMBIENT_LIMIT {
            return Err(SuiteError::InvalidConfig(format!(
                "max_ambient must lie in 1..={MAX_AMBIENT_LIMIT}, got {}",
                self.max_ambient
            )));
        }
        if self.pairs_per_map == 0 {
            return Err(SuiteError::InvalidConfig("pairs_per_map must be at least 1".into()));
        }
        if let Some(names) = &self.only {
            for n in names {
                if !TESTS.iter().any(|t| t.name == n) {
                    return Err(SuiteError::UnknownTest(n.clone()));
                }
            }
        }
        Ok(())
    }

    fn tol(&self) -> Tolerance {
        self.tolerance.unwrap_or_default()
    }
}

/// Classes with `k ∈ {2, 3, 4}` and `N ≤ 12`.
pub fn default_signatures() -> Vec<ClassSignature> {
    let s = |a: &[f64], d: &[usize]| ClassSignature::new(a.to_vec(), d.to_vec()).expect("valid signature");
    vec![
        s(&[0.0, 1.0], &[2, 2]),
        s(&[-1.0, 2.0], &[2, 3]),
        s(&[0.0, 1.0], &[1, 3]),
        s(&[1.0, 2.0, 3.0], &[2, 2, 2]),
        s(&[-1.0, 0.5, 3.0], &[2, 1, 3]),
        s(&[0.0, 1.0, -2.0], &[3, 2, 4]),
        s(&[1.0, 2.0, 3.0, 4.0], &[2, 2, 2, 2]),
        s(&[1.0, 2.0, 3.0, 4.0], &[2, 1, 2, 3]),
        s(&[0.0, 1.0, 5.0, -1.0], &[2, 3, 2, 3]),
    ]
}

#[derive(Debug, Clone, Serialize)]
pub struct Failure {
    pub trial: usize,
    pub message: String,
    pub operators: Vec<OperatorDoc>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TestReport {
    pub name: String,
    pub property: String,
    pub trials: usize,
    pub passed: usize,
    pub skipped: usize,
    pub failures: Vec<Failure>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SignatureDoc {
    pub sigma: Vec<f64>,
    pub d: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub trials: usize,
    pub max_ambient: usize,
    pub signatures: Vec<SignatureDoc>,
    pub tests: Vec<TestReport>,
    pub total_failures: usize,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.total_failures == 0
    }

    pub fn test(&self, name: &str) -> Option<&TestReport> {
        self.tests.iter().find(|t| t.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }
}

/// Result of one trial.
#[derive(Debug, Clone)]
pub enum Outcome {
    Pass,
    Skip(String),
    Fail { message: String, operators: Vec<SpectralOperator> },
}

enum Stop {
    Skip(String),
    Fail { message: String, operators: Vec<SpectralOperator> },
}

impl From<Error> for Stop {
    fn from(e: Error) -> Self {
        Stop::Fail { message: e.to_string(), operators: Vec::new() }
    }
}

type Check = Result<(), Stop>;

fn fail(ops: &[&SpectralOperator], message: String) -> Stop {
    Stop::Fail { message, operators: ops.iter().map(|&a| a.clone()).collect() }
}

fn ensure(cond: bool, ops: &[&SpectralOperator], message: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(fail(ops, message()))
    }
}

/// Attaches the operators under test to a core error.
trait Witness<T> {
    fn on(self, ops: &[&SpectralOperator]) -> Result<T, Stop>;
}

impl<T> Witness<T> for grassop_core::Result<T> {
    fn on(self, ops: &[&SpectralOperator]) -> Result<T, Stop> {
        self.map_err(|e| fail(ops, e.to_string()))
    }
}

struct Trial<'a> {
    cfg: &'a SuiteConfig,
    index: usize,
}

impl Trial<'_> {
    fn tol(&self) -> Tolerance {
        self.cfg.tol()
    }

    /// Cycles through the configured signatures that fit and satisfy `keep`.
    fn signature(&self, keep: impl Fn(&ClassSignature) -> bool) -> Result<&ClassSignature, Stop> {
        let fits: Vec<&ClassSignature> = self
            .cfg
            .signatures
            .iter()
            .filter(|s| s.ambient_dim() <= self.cfg.max_ambient && keep(s))
            .collect();
        if fits.is_empty() {
            return Err(Stop::Skip("no configured signature applies".into()));
        }
        Ok(fits[self.index % fits.len()])
    }

    fn operator(&self, s: &ClassSignature, rng: &mut ChaCha8Rng) -> SpectralOperator {
        random_operator_with_tol(s, self.tol(), rng)
    }
}

type Body = fn(&Trial, &mut ChaCha8Rng) -> Check;

struct TestDef {
    name: &'static str,
    property: &'static str,
    body: Body,
}

const TESTS: &[TestDef] = &[
    TestDef {
        name: "pseudo_adjacency_c3",
        property: "the explicit 3x3 pair (and its unitary conjugates) has rank(B - A) = 2 but fails invariance",
        body: pseudo_adjacency_c3,
    },
    TestDef {
        name: "pseudo_adjacency_general",
        property: "C + aP_X and C + aP_Y differ by rank 2, and are adjacent iff X is orthogonal to Im C",
        body: pseudo_adjacency_general,
    },
    TestDef {
        name: "adjacency_oracle",
        property: "rank-2 difference with invariant image holds iff the eigenspaces are (i,j)-adjacent",
        body: adjacency_oracle_test,
    },
    TestDef {
        name: "image_direct_sum",
        property: "Im T and Im Q meeting trivially gives rank(T + Q) = rank T + rank Q",
        body: image_direct_sum,
    },
    TestDef {
        name: "ij_path",
        property: "members of one (i,j)-component are joined by a path of (i,j)-edges",
        body: ij_path_test,
    },
    TestDef {
        name: "connectedness",
        property: "any two operators of a class are joined by a validated path",
        body: connectedness,
    },
    TestDef {
        name: "component_disjointness",
        property: "distinct (i,j)-components are disjoint; components of different families share at most one operator",
        body: component_disjointness,
    },
    TestDef {
        name: "component_adjacency",
        property: "components with adjacent bases contain adjacent members; different families are bridged by a unique edge",
        body: component_adjacency,
    },
    TestDef {
        name: "triangle",
        property: "three mutually adjacent operators share one edge type",
        body: triangle,
    },
    TestDef {
        name: "clique_classification",
        property: "members of a (-i,+j)-clique recover the clique and its star/top orientation",
        body: clique_classification,
    },
    TestDef {
        name: "clique_intersection",
        property: "two cliques meet in nothing, one operator, an (i,j)-line, or coincide",
        body: clique_intersection_test,
    },
    TestDef {
        name: "clique_chain",
        property: "cliques of one component are joined by a chain whose neighbours meet in lines",
        body: clique_chain_test,
    },
    TestDef {
        name: "symmetry_unitary",
        property: "A -> U A U* and A -> U conj(A) U* preserve adjacency and edge type",
        body: symmetry_unitary,
    },
    TestDef {
        name: "symmetry_relabeling",
        property: "A -> U delta(A) U* preserves adjacency, transports types through delta and commutes with conjugation",
        body: symmetry_relabeling,
    },
    TestDef {
        name: "semilinear_k2",
        property: "for k = 2, X -> V(X) preserves adjacency although V is not a multiple of an (anti)unitary",
        body: semilinear_k2,
    },
];

/// Names and property statements of every test, in report order.
pub fn test_catalog() -> Vec<(&'static str, &'static str)> {
    TESTS.iter().map(|t| (t.name, t.property)).collect()
}

fn fnv1a(name: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// The generator used by trial `trial` of test `name`.
pub fn trial_rng(seed: u64, name: &str, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ fnv1a(name));
    rng.set_stream(trial as u64);
    rng
}

fn execute(cfg: &SuiteConfig, def: &TestDef, trial: usize) -> Outcome {
    let mut rng = trial_rng(cfg.seed, def.name, trial);
    match (def.body)(&Trial { cfg, index: trial }, &mut rng) {
        Ok(()) => Outcome::Pass,
        Err(Stop::Skip(why)) => Outcome::Skip(why),
        Err(Stop::Fail { message, operators }) => Outcome::Fail { message, operators },
    }
}

/// Re-runs a single trial.
pub fn run_trial(cfg: &SuiteConfig, name: &str, trial: usize) -> Result<Outcome, SuiteError> {
    cfg.validate()?;
    let def = TESTS.iter().find(|t| t.name == name).ok_or_else(|| SuiteError::UnknownTest(name.into()))?;
    Ok(execute(cfg, def, trial))
}

pub fn run_suite(cfg: &SuiteConfig) -> Result<SuiteReport, SuiteError> {
    cfg.validate()?;
    let selected: Vec<&TestDef> = TESTS
        .iter()
        .filter(|t| cfg.only.as_ref().is_none_or(|names| names.iter().any(|n| n == t.name)))
        .collect();
    let jobs: Vec<(usize, usize)> =
        (0..selected.len()).flat_map(|t| (0..cfg.trials).map(move |k| (t, k))).collect();
    let results: Vec<(Outcome, f64)> = jobs
        .par_iter()
        .map(|&(t, k)| {
            let start = Instant::now();
            let out = execute(cfg, selected[t], k);
            (out, start.elapsed().as_secs_f64() * 1e3)
        })
        .collect();

    let mut tests = Vec::with_capacity(selected.len());
    for (t, def) in selected.iter().enumerate() {
        let mut report = TestReport {
            name: def.name.into(),
            property: def.property.into(),
            trials: cfg.trials,
            passed: 0,
            skipped: 0,
            failures: Vec::new(),
            wall_ms: None,
        };
        let mut ms = 0.0;
        for (k, (out, elapsed)) in results[t * cfg.trials..(t + 1) * cfg.trials].iter().enumerate() {
            ms += elapsed;
            match out {
                Outcome::Pass => report.passed += 1,
                Outcome::Skip(_) => report.skipped += 1,
                Outcome::Fail { message, operators } => report.failures.push(Failure {
                    trial: k,
                    message: message.clone(),
                    operators: operators.iter().map(OperatorDoc::from_operator).collect(),
                }),
            }
        }
        if cfg.timing {
            report.wall_ms = Some(ms);
        }
        tests.push(report);
    }
    let total_failures = tests.iter().map(|t| t.failures.len()).sum();
    Ok(SuiteReport {
        seed: cfg.seed,
        trials: cfg.trials,
        max_ambient: cfg.max_ambient,
        signatures: cfg
            .signatures
            .iter()
            .map(|s| SignatureDoc { sigma: s.eigenvalues().to_vec(), d: s.multiplicities().to_vec() })
            .collect(),
        tests,
        total_failures,
    })
}

// ---- helpers ----

fn sorted(i: usize, j: usize) -> (usize, usize) {
    (i.min(j), i.max(j))
}

fn random_pair(k: usize, rng: &mut ChaCha8Rng) -> (usize, usize) {
    let i = rng.random_range(0..k);
    let j = (i + rng.random_range(1..k)) % k;
    (i, j)
}

/// Ordered pairs whose multiplicities are both at least 2.
fn wide_pairs(s: &ClassSignature) -> Vec<(usize, usize)> {
    let k = s.k();
    (0..k)
        .flat_map(|i| (0..k).map(move |j| (i, j)))
        .filter(|&(i, j)| i != j && s.multiplicity(i) >= 2 && s.multiplicity(j) >= 2)
        .collect()
}

fn wide_pair(s: &ClassSignature, rng: &mut ChaCha8Rng) -> (usize, usize) {
    let pairs = wide_pairs(s);
    pairs[rng.random_range(0..pairs.len())]
}

fn has_wide_pair(s: &ClassSignature) -> bool {
    !wide_pairs(s).is_empty()
}

fn random_clique(
    parent: &ClassSignature,
    i: usize,
    j: usize,
    tol: Tolerance,
    rng: &mut ChaCha8Rng,
) -> grassop_core::Result<CliqueDescriptor> {
    let t = random_operator_with_tol(&reduced_signature(parent, i, j, 1)?, tol, rng);
    star_clique(parent, &t, i, j)
}

/// The `(-i,+j)`-clique inside merged space `m` whose members' `a_i`-eigenspaces contain `lower`;
/// every other eigenspace is copied from `a`.
fn star_around(
    a: &SpectralOperator,
    m: &Subspace,
    i: usize,
    j: usize,
    lower: Subspace,
) -> grassop_core::Result<CliqueDescriptor> {
    let s = a.signature();
    let mut spaces = a.eigenspaces().to_vec();
    spaces[j] = lower.complement(Some(m))?;
    spaces[i] = lower;
    let t = make_operator(&reduced_signature(s, i, j, 1)?, spaces)?;
    star_clique(s, &t, i, j)
}

/// A random `(-i,+j)`-clique inside merged space `m`.
fn clique_in(
    a: &SpectralOperator,
    m: &Subspace,
    i: usize,
    j: usize,
    rng: &mut ChaCha8Rng,
) -> grassop_core::Result<CliqueDescriptor> {
    let lower = random_subspace_in(m, a.signature().multiplicity(i) - 1, rng)?;
    star_around(a, m, i, j, lower)
}

/// The space `a_i + a_j` eigenspaces fill: the merged space of the component, or everything when k = 2.
fn merged(a: &SpectralOperator, i: usize, j: usize) -> grassop_core::Result<Subspace> {
    a.eigenspace(i).sum(a.eigenspace(j))
}

fn members(d: &CliqueDescriptor, count: usize, rng: &mut ChaCha8Rng) -> grassop_core::Result<Vec<SpectralOperator>> {
    (0..count).map(|_| d.random_member(rng)).collect()
}

fn angle(rng: &mut ChaCha8Rng) -> f64 {
    rng.random_range(0.05..FRAC_PI_2 - 0.05)
}

/// A unitary close to the identity: the Cayley transform of `eps * H` for a random Hermitian `H`.
fn near_identity(n: usize, eps: f64, rng: &mut ChaCha8Rng) -> grassop_core::Result<ComplexMatrix> {
    let g = complex_gaussian(n, n, rng);
    let h = (&g + g.adjoint()) * real(0.5);
    let id = ComplexMatrix::identity(n, n);
    let step = h * c64(0.0, eps);
    let inv = (&id + &step).try_inverse().ok_or(Error::NotInvertible)?;
    Ok((&id - &step) * inv)
}

/// Draws an instance of the `C + aP_X` recipe, retrying degenerate draws.
fn general_instance(
    t: &Trial,
    orthogonal: bool,
    rng: &mut ChaCha8Rng,
) -> Result<grassop_core::adjacency::PseudoAdjacentInstance, Stop> {
    let nmax = t.cfg.max_ambient.min(10);
    if nmax < 4 {
        return Err(Stop::Skip("the recipe needs N >= 4".into()));
    }
    let tol = t.tol();
    for _ in 0..20 {
        let n = rng.random_range(4..=nmax);
        let r = rng.random_range(1..=n - 2);
        let c = random_hermitian_on(&Subspace::full(n, tol), r, rng)?;
        let core = orthonormalize(&c, tol)?;
        let x = if orthogonal {
            random_subspace_in(&core.complement(None)?, 1, rng)?
        } else {
            random_subspace(n, 1, tol, rng)?
        };
        let a = if rng.random_bool(0.5) { 2.5 } else { -3.5 };
        match pseudo_adjacent_general(&c, &x, a, rng) {
            Ok(inst) => return Ok(inst),
            Err(Error::DegenerateInput(_) | Error::InvalidSignature(_)) => continue,
            Err(e) => return Err(e.into()),
        }
    }
    Err(Stop::Skip("no non-degenerate instance in 20 draws".into()))
}

// ---- adjacency ----

fn pseudo_adjacency_c3(t: &Trial, rng: &mut ChaCha8Rng) -> Check {
    let (a0, b0) = pseudo_adjacent_c3();
    let k = a0.k();
    // trial 0 checks the printed matrices, later trials a random (anti)unitary image
    let u = if t.index == 0 {
        Symmetry::identity(3, k)
    } else {
        Symmetry::new(random_unitary(3, rng), rng.random_bool(0.5), Permutation::identity(k))?
    };
    let a = u.apply(&a0)?;
    let b = u.apply(&b0)?;
    let ops = [&a, &b];
    ensure(a.same_class(&b), &ops, || "pair is not in one class".into())?;
    let diff = b.to_matrix() - a.to_matrix();
    let s = singular_values(&diff);
    let h = 3f64.sqrt() / 2.0;
    ensure(
        (s[0] - h).abs() < 1e-8 && (s[1] - h).abs() < 1e-8 && s[2] < 1e-8,
        &ops,
        || format!("singular values {s:?}, expected [{h}, {h}, 0]"),
    )?;
    let v = is_adjacent(&a, &b).on(&ops)?;
    ensure(v.a1 && !v.a2 && v.diff_rank == 2 && v.type_pair.is_none(), &ops, || {
        format!("verdict a1={} a2={} rank={} type={:?}", v.a1, v.a2, v.diff_rank, v.type_pair)
    })?;
    // kernel witness -e1 + e2 + e3 is sent to -e1 by both operators
    let w = ComplexVector::from_vec(vec![real(-1.0), real(1.0), real(1.0)]);
    let e1 = ComplexVector::from_vec(vec![real(-1.0), real(0.0), real(0.0)]);
    let (w, e1) = (u.matrix() * w, u.matrix() * e1);
    let defect = [(&diff * &w).norm(), (a.to_matrix() * &w - &e1).norm(), (b.to_matrix() * &w - &e1).norm()];
    ensure(defect.iter().all(|&d| d < 1e-8), &ops, || format!("kernel witness defects {defect:?}"))
}

fn pseudo_adjacency_general(t: &Trial, rng: &mut ChaCha8Rng) -> Check {
    let orthogonal = t.index.is_multiple_of(2);
    let inst = general_instance(t, orthogonal, rng)?;
    let (a, b) = (&inst.a, &inst.b);
    let d = inst.diagnostics;
    ensure(d.x_orthogonal_to_core == orthogonal && d.a1 && d.a2 == orthogonal, &[a, b], || {
        format!("orthogonal={orthogonal}, diagnostics {d:?}")
    })?;
    let v = is_adjacent(a, b).on(&[a, b])?;
    ensure(v.adjacent() == orthogonal, &[a, b], || {
        format!("is_adjacent={} with X orthogonal to Im C = {orthogonal}", v.adjacent())
    })
}

fn adjacency_oracle_test(t: &Trial, rng: &mut ChaCha8Rng) -> Check {
    let (a, b, expected) = match t.index % 4 {
        0 => {
            let s = t.signature(|_| true)?;
            let a = t.operator(s, rng);
            let (i, j) = random_pair(s.k(), rng);
            let b = make_ij_adjacent(&a, i, j, rng).on(&[&a])?;
            (a, b, Some(Some(sorted(i, j))))
        }
        1 => {
            // two moves: adjacency depends on the multiplicities and the pairs involved
            let s = t.signature(|_| true)?;
            let a = t.operator(s, rng);
            let (i, j) = random_pair(s.k(), rng);
            let (p, q) = if rng.random_bool(0.5) { (i, j) } else { random_pair(s.k(), rng) };
            let mid = make_ij_adjacent(&a, i, j, rng).on(&[&a])?;
            let b = make_ij_adjacent(&mid, p, q, rng).on(&[&a, &mid])?;
            (a, b, None)
        }
        2 => {
            let s = t.signature(|_| true)?;
            let a = t.operator(s, rng);
            let eps = rng.random_range(1e-3..0.3);
            let u = near_identity(s.ambient_dim(), eps, rng)?;
            let b = Symmetry::unitary(u, s.k())?.apply(&a).on(&[&a])?;
            (a, b, None)
        }
        _ => {
            let orthogonal = rng.random_bool(0.5);
            let inst = general_instance(t, orthogonal, rng)?;
            let expected = if orthogonal { None } else { Some(None) };
            (inst.a, inst.b, expected)
        }
    };
    let ops = [&a, &b];
    let ok = adjacency_oracle(&a, &b).on(&ops)?;
    ensure(ok, &ops, || "matrix predicate and eigenspace classification disagree".into())?;
    let v = is_adjacent(&a, &b).on(&ops)?;
    let w = is_adjacent(&b, &a).on(&ops)?;
    ensure(v.type_pair == w.type_pair && v.diff_rank == w.diff_rank, &ops, || {
        format!("verdict is not symmetric: {:?} vs {:?}", v.type_pair, w.type_pair)
    })?;
    if let Some(want) = expected {
        ensure(v.type_pair == want, &ops, || format!("type {:?}, expected {want:?}", v.type_pair))?;
    }
    Ok(())
}

fn image_direct_sum(t: &Trial, rng: &mut ChaCha8Rng) -> Check {
    let nmax = t.cfg.max_ambient.min(12);
    if nmax < 2 {
        return Err(Stop::Skip("needs N >= 2".into()));
    }
    let tol = t.tol();
    let n = rng.random_range(2..=nmax);
    let s = rng.random_range(1..n);
    let u = rng.random_range(1..=n - s);
    let tm = random_hermitian_on(&Subspace::full(n, tol), s, rng)?;
    let it = orthonormalize(&tm, tol)?;
    // Im Q is tilted towards Im T but keeps a full-rank component orthogonal to it
    let v = random_subspace_in(&it.complement(None)?, u, rng)?;
    let tilt = v.frame() + it.frame() * complex_gaussian(s, u, rng);
    let w = Subspace::span(&tilt, tol)?;
    let qm = random_hermitian_on(&w, u, rng)?;
    let ok = image_direct_sum_check(&tm, &qm, tol)?;
    ensure(ok, &[], || format!("rank(T + Q) != {s} + {u} on C^{n}"))
}

// ---- connectivity ----

fn ij_path_test(t: &Trial, rng: &mut ChaCha8Rng) -> Check {
    let s = t.signature(|_| true)?;
    let a = t.operator(s, rng);
    let (i, j) = random_pair(s.k(), rng);
    // with two eigenvalues the whole class is one component
    let b = if s.k() == 2 {
        t.operator(s, rng)
    } else {
        let d = component_of(&a, i, j).on(&[&a])?;
        let x = random_subspace_in(d.merged_space(), s.multiplicity(i), rng)?;
        d.member_with(i, &x).on(&[&a])?
    };
    let ops = [&a, &b];
    ensure(ij_connected(&a, &b, i, j).on(&ops)?, &ops, || "member is not (i,j)-connected".into())?;
    let p = ij_path(&a, &b, i, j).on(&ops)?;
    p.validate().on(&ops)?;
    ensure(p.edge_types.iter().all(|&e| e == sorted(i, j)), &ops, || {
        format!("edge types {:?}, expected only {:?}", p.edge_types, sorted(i, j))
    })?;
    let ends = p.first().equals(&a).on(&ops)? && p.last().equals(&b).on(&ops)?;
    ensure(ends, &ops, || "path endpoints differ from the inputs".into())
}

fn connectedness(t: &Trial, rng: &mut ChaCha8Rng) -> Check {
    let s = t.signature(|_| true)?;
    let a = t.operator(s, rng);
    let b = t.operator(s, rng);
    let ops = [&a, &b];
    let p = connect(&a, &b).on(&ops)?;
    p.validate().on(&ops)?;
    let ends = p.first().equals(&a).on(&ops)? && p.last().equals(&b).on(&ops)?;
    ensure(ends, &ops, || "path endpoints differ from the inputs".into())
}

fn component_disjointness(t: &Trial, rng: &mut ChaCha8Rng) -> Check {
    // components are proper subsets only when k >= 3
    let s = t.signature(|s| s.k() >= 3)?;
    let a = t.operator(s, rng);
    let b = t.operator(s, rng);
    let ops = [&a, &b];
    let (i, j) = random_pair(s.k(), rng);
    let d1 = component_of(&a, i, j).on(&ops)?;
    let d2 = component_of(&b, i, j).on(&ops)?;
    ensure(!d1.same_as(&d2).on(&ops)?, &ops, || "random components coincide".into())?;
    let x = d1.member_with(i, &random_subspace_in(d1.merged_space(), s.multiplicity(i), rng)?).on(&ops)?;
    let y = d2.member_with(i, &random_subspace_in(d2.merged_space(), s.multiplicity(i), rng)?).on(&ops)?;
    let ops = [&a, &b, &x, &y];
    ensure(d1.contains(&x).on(&ops)? && !d2.contains(&x).on(&ops)?, &ops, || {
        "a member of one component is reported in the other".into()
    })?;
    ensure(!ij_connected(&x, &y, i, j).on(&ops)?, &ops, || "members of distinct components are (i,j)-connected".into())?;
    let (p, q) = loop {
        let pq = random_pair(s.k(), rng);
        if sorted(pq.0, pq.1) != sorted(i, j) {
            break pq;
        }
    };
    let e = component_of(&x, p, q).on(&ops)?;
    match components_adjacent(&d1, &e, rng).on(&ops)? {
        ComponentRelation::Intersecting(z) => {
            let ok = z.equals(&x).on(&ops)? && d1.contains(&z).on(&ops)? && e.contains(&z).on(&ops)?;
            ensure(ok, &ops, || "shared operator is not the common member".into())
        }
        other => Err(fail(&ops, format!("({i},{j}) and ({p},{q}) components through one operator: {other:?}"))),
    }
}

fn component_adjacency(t: &Trial, rng: &mut ChaCha8Rng) -> Check {
    let s = t.signature(|s| s.k() >= 3)?;
    let a = t.operator(s, rng);
    let (i, j) = random_pair(s.k(), rng);
    let d1 = component_of(&a, i, j).on(&[&a])?;
    let base = d1.base();
    let (p, q) = random_pair(base.k(), rng);
    let moved = make_ij_adjacent(base, p, q, rng).on(&[&a])?;
    let d2 = ComponentDescriptor::from_base(s, d1.pair().0, d1.pair().1, moved).on(&[&a])?;
    match components_adjacent(&d1, &d2, rng).on(&[&a])? {
        ComponentRelation::Adjacent { a: x, b: y, .. } => {
            let ops = [&a, &x, &y];
            let ok = d1.contains(&x).on(&ops)? && d2.contains(&y).on(&ops)? && is_adjacent(&x, &y).on(&ops)?.adjacent();
            ensure(ok, &ops, || "same-family witness is not an adjacent pair of members".into())?;
        }
        other => return Err(fail(&[&a], format!("components with adjacent bases: {other:?}"))),
    }

    // a (j,p)-edge leaving the (i,j)-component of `a` reaches a disjoint (i,p)-component
    let p = loop {
        let p = rng.random_range(0..s.k());
        if p != i && p != j {
            break p;
        }
    };
    let b = make_ij_adjacent(&a, j, p, rng).on(&[&a])?;
    let e = component_of(&b, i, p).on(&[&a, &b])?;
    match components_adjacent(&d1, &e, rng).on(&[&a, &b])? {
        ComponentRelation::UniqueBridge { a: x, b: y, edge_type } => {
            let ops = [&a, &b, &x, &y];
            let v = is_adjacent(&x, &y).on(&ops)?;
            let ok = edge_type == sorted(j, p)
                && v.type_pair == Some(edge_type)
                && d1.contains(&x).on(&ops)?
                && e.contains(&y).on(&ops)?;
            ensure(ok, &ops, || format!("bridge of type {edge_type:?} fails validation"))
        }
        other => Err(fail(&[&a, &b], format!("({i},{j}) and ({i},{p}) components: {other:?}"))),
    }
}

// ---- cliques ----

fn triangle(t: &Trial, rng: &mut ChaCha8Rng) -> Check {
    let s = t.signature(|_| true)?;
    let (i, j) = random_pair(s.k(), rng);
    let star = if t.index.is_multiple_of(2) { random_clique(s, i, j, t.tol(), rng).ok() } else { None };
    let [a, b, c] = match star {
        Some(d) => {
            let mut ms = members(&d, 3, rng)?;
            let c = ms.pop().expect("three members");
            let b = ms.pop().expect("three members");
            [ms.pop().expect("three members"), b, c]
        }
        None => {
            // three points on one rotation circle
            let a = t.operator(s, rng);
            let u = random_vector_in(a.eigenspace(i), rng)?;
            let w = random_vector_in(a.eigenspace(j), rng)?;
            let t1 = angle(rng);
            let t2 = loop {
                let x = angle(rng);
                if (x - t1).abs() > 0.05 {
                    break x;
                }
            };
            let b = rotate_between(&a, i, j, &u, &w, t1).on(&[&a])?;
            let c = rotate_between(&a, i, j, &u, &w, t2).on(&[&a])?;
            [a, b, c]
        }
    };
    let ops = [&a, &b, &c];
    let ty = triangle_type(&a, &b, &c).on(&ops)?;
    ensure(ty == sorted(i, j), &ops, || format!("triangle type {ty:?}, expected {:?}", sorted(i, j)))
}

fn clique_classification(t: &Trial, rng: &mut ChaCha8Rng) -> Check {
    let s = t.signature(|s| s.k() >= 3 || s.multiplicities().iter().all(|&n| n >= 2))?;
    let (i, j) = random_pair(s.k(), rng);
    let d = match random_clique(s, i, j, t.tol(), rng) {
        Ok(d) => d,
        // moving the only dimension of a_i out of a two-eigenvalue class leaves one eigenvalue
        Err(Error::InvalidSignature(_)) => return Err(Stop::Skip("reduced class is degenerate".into())),
        Err(e) => return Err(e.into()),
    };
    let ms = members(&d, 4, rng)?;
    let refs: Vec<&SpectralOperator> = ms.iter().collect();
    let found = classify_clique(&ms);
    if s.multiplicity(i) == 1 || s.multiplicity(j) == 1 {
        return ensure(matches!(found, Err(Error::AmbiguousOrientation)), &refs, || {
            format!("multiplicity 1 on ({i},{j}) but classification gave {found:?}")
        });
    }
    let (pair, orientation, back) = found.on(&refs)?;
    let want = if i < j { Orientation::Star } else { Orientation::Top };
    let ok = pair == sorted(i, j) && orientation == want && back.pair() == (i, j) && back.same_as(&d).on(&refs)?;
    ensure(ok, &refs, || format!("classified as {pair:?} {orientation:?} from a ({i},{j}) clique"))
}

fn intersection_kind(r: &CliqueIntersection) -> &'static str {
    match r {
        CliqueIntersection::Empty => "empty",
        CliqueIntersection::Singleton(_) => "singleton",
        CliqueIntersection::Line(_) => "line",
        CliqueIntersection::Equal => "equal",
    }
}

fn clique_intersection_test(t: &Trial, rng: &mut ChaCha8Rng) -> Check {
    let s = t.signature(has_wide_pair)?;
    let (i, j) = wide_pair(s, rng);
    let a = t.operator(s, rng);
    let b = make_ij_adjacent(&a, i, j, rng).on(&[&a])?;
    let ops = [&a, &b];
    let l = line_through(&a, &b).on(&ops)?;
    let (star, top) = (l.star(), l.top());

    let mut cases: Vec<(CliqueDescriptor, CliqueDescriptor, &str)> = vec![
        (star.clone(), star.clone(), "equal"),
        (star.clone(), top.clone(), "line"),
        (top.clone(), star.clone(), "line"),
    ];
    // Stars of one component meet in one operator when their lower spaces are adjacent
    // (they then span an n_p-space) and not at all when those spaces span more.
    let m = merged(&a, i, j)?;
    let (p, q) = star.pair();
    let lower = star.shrunk_space();
    let np = s.multiplicity(p);
    let keep = random_subspace_in(&lower, np - 2, rng)?;
    let extra = random_subspace_in(&lower.complement(Some(&m))?, 1, rng)?;
    cases.push((star.clone(), star_around(&a, &m, p, q, keep.sum(&extra)?).on(&ops)?, "singleton"));
    if np >= 3 {
        let spread = random_subspace_in(&m, np - 1, rng)?;
        cases.push((star.clone(), star_around(&a, &m, p, q, spread).on(&ops)?, "empty"));
    }
    if s.k() >= 3 {
        // another clique of the same pair whose fixed eigenspaces differ
        cases.push((star.clone(), random_clique(s, p, q, t.tol(), rng).on(&ops)?, "empty"));
    }
    for (x, y, want) in &cases {
        let r = clique_intersection(x, y).on(&ops)?;
        let back = clique_intersection(y, x).on(&ops)?;
        let kind = intersection_kind(&r);
        ensure(kind == *want && intersection_kind(&back) == kind, &ops, || {
            format!("intersection {kind} / {}, expected {want}", intersection_kind(&back))
        })?;
        match r {
            CliqueIntersection::Line(m) => {
                ensure(m.same_as(&l).on(&ops)?, &ops, || "intersection is not the line through the pair".into())?;
            }
            CliqueIntersection::Singleton(z) => {
                let ok = x.contains(&z).on(&ops)? && y.contains(&z).on(&ops)?;
                ensure(ok, &[&a, &b, &z], || "singleton is not in both cliques".into())?;
            }
            _ => {}
        }
    }
    Ok(())
}

fn clique_chain_test(t: &Trial, rng: &mut ChaCha8Rng) -> Check {
    // chains are described relative to a component descriptor, which needs k >= 3
    let s = t.signature(|s| s.k() >= 3 && has_wide_pair(s))?;
    let (i, j) = wide_pair(s, rng);
    let a = t.operator(s, rng);
    let comp = component_of(&a, i, j).on(&[&a])?;
    let m = comp.merged_space().clone();
    let orient = |rng: &mut ChaCha8Rng| if rng.random_bool(0.5) { (i, j) } else { (j, i) };
    let (p, q) = orient(rng);
    let d1 = clique_in(&a, &m, p, q, rng).on(&[&a])?;
    let (p, q) = orient(rng);
    let d2 = clique_in(&a, &m, p, q, rng).on(&[&a])?;
    let chain = clique_chain(&d1, &d2, &comp).on(&[&a])?;
    let ends = chain[0].same_as(&d1).on(&[&a])? && chain[chain.len() - 1].same_as(&d2).on(&[&a])?;
    ensure(ends, &[&a], || "chain does not start and end at the given cliques".into())?;
    for (n, w) in chain.windows(2).enumerate() {
        let r = clique_intersection(&w[0], &w[1]).on(&[&a])?;
        ensure(matches!(r, CliqueIntersection::Line(_)), &[&a], || {
            format!("links {n} and {} meet in {}", n + 1, intersection_kind(&r))
        })?;
        let x = w[0].random_member(rng)?;
        ensure(comp.contains(&x).on(&[&a, &x])?, &[&a, &x], || format!("link {n} leaves the component"))?;
    }
    Ok(())
}

// ---- symmetries ----

fn symmetry_unitary(t: &Trial, rng: &mut ChaCha8Rng) -> Check {
    let s = t.signature(|_| true)?;
    let id = Permutation::identity(s.k());
    let u = Symmetry::new(random_unitary(s.ambient_dim(), rng), rng.random_bool(0.5), id.clone())?;
    let report = verify_automorphism(&u, s, t.cfg.pairs_per_map, rng)?;
    ensure(report.preserves_types() && report.adjacent_pairs >= t.cfg.pairs_per_map, &[], || {
        format!("{report:?}")
    })?;
    let samples: Vec<SpectralOperator> = (0..3).map(|_| t.operator(s, rng)).collect();
    let refs: Vec<&SpectralOperator> = samples.iter().collect();
    ensure(commutation_check(&u, &id, &samples), &refs, || "conjugation does not commute with the identity relabeling".into())
}

fn symmetry_relabeling(t: &Trial, rng: &mut ChaCha8Rng) -> Check {
    let s = t.signature(|_| true)?;
    let delta = random_sd_element(s, rng)?;
    let sym = Symmetry::new(random_unitary(s.ambient_dim(), rng), rng.random_bool(0.5), delta.clone())?;
    let report = verify_automorphism(&sym, s, t.cfg.pairs_per_map, rng)?;
    ensure(report.preserves_adjacency(), &[], || format!("{report:?}"))?;
    for &(from, to) in report.transport.keys() {
        let want = adjacency_type_transport(&sym, s, from.0, from.1)?;
        ensure(to == want, &[], || format!("type {from:?} went to {to:?}, expected {want:?}"))?;
    }
    let samples: Vec<SpectralOperator> = (0..3).map(|_| t.operator(s, rng)).collect();
    let refs: Vec<&SpectralOperator> = samples.iter().collect();
    ensure(commutation_check(&sym, &delta, &samples), &refs, || {
        format!("U delta(A) U* != delta(U A U*) for delta = {:?}", delta.images())
    })
}

fn semilinear_k2(t: &Trial, rng: &mut ChaCha8Rng) -> Check {
    let s = t.signature(|s| s.k() == 2)?;
    let n = s.ambient_dim();
    let v = if t.index == 0 && n >= 2 {
        let mut m = ComplexMatrix::identity(n, n);
        m[(1, 1)] = real(2.0);
        m
    } else {
        complex_gaussian(n, n, rng)
    };
    let v = SemilinearMap::new(v, t.index > 0 && rng.random_bool(0.5))?;
    let f = semilinear_k2_automorphism(&v, s)?;
    let report = verify_automorphism(&f, s, t.cfg.pairs_per_map, rng)?;
    ensure(report.preserves_adjacency(), &[], || format!("{report:?}"))?;
    let defect = orthogonality_defect(&v, 8, rng);
    ensure(defect == (false, None), &[], || format!("orthogonality_defect = {defect:?}, expected (false, None)"))
}
