//! One PASS/FAIL line per acceptance criterion. Exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use grassop::suite::{default_signatures, run_suite, SuiteConfig, SuiteReport};
use grassop_core::adjacency::{condition_a1, condition_a2, is_adjacent, pseudo_adjacent_c3_matrices};
use grassop_core::linalg::{max_abs, real, singular_values};
use grassop_core::random::random_unitary;
use grassop_core::spectral::{random_sd_element, signature_from_matrix};
use grassop_core::symmetry::{
    adjacency_type_transport, orthogonality_defect, semilinear_k2_automorphism, verify_automorphism,
    SemilinearMap, Symmetry,
};
use grassop_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20_240_601;

struct Verdict {
    ok: bool,
    detail: String,
}

fn verdict(ok: bool, detail: impl Into<String>) -> Verdict {
    Verdict { ok, detail: detail.into() }
}

fn only(names: &[&str]) -> Option<Vec<String>> {
    Some(names.iter().map(|s| s.to_string()).collect())
}

fn suite(names: &[&str], trials: usize, signatures: Vec<ClassSignature>) -> SuiteReport {
    let cfg = SuiteConfig { seed: SEED, trials, signatures, only: only(names), ..SuiteConfig::default() };
    run_suite(&cfg).expect("valid configuration")
}

/// `Ok` when every selected test ran `want` trials with no failures and no skips.
fn clean(report: &SuiteReport, want: usize) -> std::result::Result<String, String> {
    let mut parts = Vec::new();
    for t in &report.tests {
        if !t.failures.is_empty() {
            let f = &t.failures[0];
            return Err(format!("{}: {} failures, first at trial {}: {}", t.name, t.failures.len(), f.trial, f.message));
        }
        if t.passed < want {
            return Err(format!("{}: only {} of {want} trials ran ({} skipped)", t.name, t.passed, t.skipped));
        }
        parts.push(format!("{} {}/{}", t.name, t.passed, t.trials));
    }
    Ok(parts.join(", "))
}

fn timed(limit: f64, f: impl FnOnce() -> Verdict) -> Verdict {
    let start = Instant::now();
    let v = f();
    let secs = start.elapsed().as_secs_f64();
    let within = secs < limit;
    verdict(v.ok && within, format!("{} [{secs:.3} s, limit {limit} s]", v.detail))
}

fn c3_reproduction() -> Verdict {
    let (ma, mb) = pseudo_adjacent_c3_matrices();
    let Ok(sig) = signature_from_matrix(&ma, 1e-9) else { return verdict(false, "spectrum of A") };
    let (Ok(a), Ok(b)) = (from_matrix(&ma, &sig), from_matrix(&mb, &sig)) else {
        return verdict(false, "B is not in the class of A");
    };
    let diff = &mb - &ma;
    let s = singular_values(&diff);
    let h = 3f64.sqrt() / 2.0;
    let sv_ok = (s[0] - h).abs() < 1e-8 && (s[1] - h).abs() < 1e-8 && s[2] < 1e-8;
    let rank = numerical_rank(&diff, &Tolerance::DEFAULT).unwrap_or(usize::MAX);
    let a1 = condition_a1(&a, &b).map(|r| r.0).unwrap_or(false);
    let a2 = condition_a2(&a, &b).unwrap_or(true);
    // kernel of B - A is spanned by -e1 + e2 + e3, which both operators send to -e1
    let u = ComplexVector::from_vec(vec![real(-1.0), real(1.0), real(1.0)]);
    let e1 = ComplexVector::from_vec(vec![real(-1.0), real(0.0), real(0.0)]);
    let witness = (&diff * &u).norm() < 1e-8 && (&ma * &u - &e1).norm() < 1e-8 && (&mb * &u - &e1).norm() < 1e-8;
    let adjacent = is_adjacent(&a, &b).map(|v| v.adjacent()).unwrap_or(true);
    let ok = rank == 2 && sv_ok && same_class(&a, &b) && a1 && !a2 && witness && !adjacent;
    verdict(
        ok,
        format!(
            "rank {rank}, singular values [{:.12}, {:.12}, {:.1e}], a1 {a1}, a2 {a2}, kernel witness {witness}, adjacent {adjacent}",
            s[0], s[1], s[2]
        ),
    )
}

fn oracle() -> Verdict {
    let r = suite(&["adjacency_oracle"], 1000, default_signatures());
    match clean(&r, 1000) {
        Ok(s) => verdict(true, format!("{s} pairs agree (constructed, two-move, perturbed, recipe instances)")),
        Err(e) => verdict(false, e),
    }
}

fn connectedness() -> Verdict {
    let sigs: Vec<ClassSignature> = default_signatures()
        .into_iter()
        .filter(|s| (3..=4).contains(&s.k()) && s.multiplicities().iter().all(|&n| n >= 2) && s.ambient_dim() <= 12)
        .collect();
    let count = sigs.len();
    let r = suite(&["connectedness"], 200, sigs);
    match clean(&r, 200) {
        Ok(s) => verdict(true, format!("{s} paths validated over {count} classes")),
        Err(e) => verdict(false, e),
    }
}

fn triangles() -> Verdict {
    let r = suite(&["triangle"], 300, default_signatures());
    match clean(&r, 300) {
        Ok(s) => verdict(true, s),
        Err(e) => verdict(false, e),
    }
}

fn direct_sum() -> Verdict {
    let r = suite(&["image_direct_sum"], 200, default_signatures());
    match clean(&r, 200) {
        Ok(s) => verdict(true, format!("{s}, rank_rel = {:e}", Tolerance::DEFAULT.rank_rel)),
        Err(e) => verdict(false, e),
    }
}

fn symmetries() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let sig = ClassSignature::new(vec![1.0, 2.0, 3.0], vec![2, 2, 2]).expect("valid");
    let (mut pairs, mut worst) = (0usize, 0f64);
    for n in 0..100 {
        let u = random_unitary(6, &mut rng);
        let anti = rng.random_bool(0.5);
        let delta = random_sd_element(&sig, &mut rng).expect("k = 3");
        let sym = Symmetry::new(u.clone(), anti, delta.clone()).expect("unitary");
        let plain = Symmetry::new(u.clone(), anti, Permutation::identity(3)).expect("unitary");
        // 25 trials give 25 adjacent and 25 non-adjacent pairs
        let Ok(report) = verify_automorphism(&sym, &sig, 25, &mut rng) else {
            return verdict(false, format!("symmetry {n}: sampling failed"));
        };
        pairs += report.adjacent_pairs + report.nonadjacent_pairs;
        if !report.preserves_adjacency() || report.adjacent_pairs + report.nonadjacent_pairs < 50 {
            return verdict(false, format!("symmetry {n}: {report:?}"));
        }
        for &(from, to) in report.transport.keys() {
            if adjacency_type_transport(&sym, &sig, from.0, from.1).ok() != Some(to) {
                return verdict(false, format!("symmetry {n}: type {from:?} went to {to:?}"));
            }
        }
        let Ok(report) = verify_automorphism(&plain, &sig, 25, &mut rng) else {
            return verdict(false, format!("symmetry {n}: sampling failed"));
        };
        if !report.preserves_types() {
            return verdict(false, format!("symmetry {n} with identity relabeling: {report:?}"));
        }
        // U delta(A) U* against delta(U A U*), the latter re-diagonalized from the matrix
        for _ in 0..5 {
            let a = random_operator(&sig, &mut rng);
            let Ok(lhs) = sym.apply(&a) else { return verdict(false, "apply failed") };
            let am = a.to_matrix();
            let am = if anti { am.map(|z| z.conj()) } else { am };
            let conj = &u * am * u.adjoint();
            let rhs = from_matrix(&conj, &sig).and_then(|b| apply_permutation(&delta, &b));
            let Ok(rhs) = rhs else { return verdict(false, "U A U* left the class") };
            worst = worst.max(max_abs(&(lhs.to_matrix() - rhs.to_matrix())));
        }
    }
    verdict(worst <= 1e-9, format!("100 symmetries, {pairs} pairs preserved, max commutation defect {worst:.1e}"))
}

fn k2_counterpoint() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let sig = ClassSignature::new(vec![0.0, 1.0], vec![2, 2]).expect("valid");
    let mut v = ComplexMatrix::identity(4, 4);
    v[(1, 1)] = real(2.0);
    let v = SemilinearMap::new(v, false).expect("invertible");
    let f = semilinear_k2_automorphism(&v, &sig).expect("k = 2");
    let report = match verify_automorphism(&f, &sig, 200, &mut rng) {
        Ok(r) => r,
        Err(e) => return verdict(false, e.to_string()),
    };
    let defect = orthogonality_defect(&v, 16, &mut rng);
    let ok = report.preserves_adjacency() && report.adjacent_pairs == 200 && defect == (false, None);
    verdict(
        ok,
        format!(
            "f_V kept {} adjacent and {} non-adjacent pairs, orthogonality_defect = {defect:?}",
            report.adjacent_pairs, report.nonadjacent_pairs
        ),
    )
}

fn structure() -> Verdict {
    let names = ["component_disjointness", "component_adjacency", "clique_intersection", "clique_chain"];
    let r = suite(&names, 100, default_signatures());
    let structural = clean(&r, 100);
    let start = Instant::now();
    let full = run_suite(&SuiteConfig { seed: SEED, ..SuiteConfig::default() }).expect("valid configuration");
    let secs = start.elapsed().as_secs_f64();
    let full_ok = full.passed() && secs < 120.0;
    match structural {
        Ok(s) => verdict(
            full_ok,
            format!("{s}; full suite ({} trials per test) {} failures in {secs:.1} s", full.trials, full.total_failures),
        ),
        Err(e) => verdict(false, e),
    }
}

type Criterion = (&'static str, f64, fn() -> Verdict);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("explicit 3x3 rank-2 pair is not adjacent", 0.1, c3_reproduction),
        ("adjacency predicate matches (i,j)-classification on 1000 pairs", 30.0, oracle),
        ("200 random pairs connected by validated paths", 30.0, connectedness),
        ("300 mutually adjacent triples have one common type", 10.0, triangles),
        ("rank(T + Q) = rank T + rank Q on 200 trivially intersecting pairs", 30.0, direct_sum),
        ("(anti)unitary symmetries with relabeling are automorphisms", 60.0, symmetries),
        ("k = 2 automorphism not induced by an (anti)unitary", 30.0, k2_counterpoint),
        ("component and clique structure, full suite under 2 minutes", 180.0, structure),
    ];
    let mut failed = 0;
    for (n, (name, limit, check)) in criteria.into_iter().enumerate() {
        let v = timed(limit, check);
        let tag = if v.ok { "PASS" } else { "FAIL" };
        if !v.ok {
            failed += 1;
        }
        println!("{tag} criterion {}: {name}: {}", n + 1, v.detail);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
