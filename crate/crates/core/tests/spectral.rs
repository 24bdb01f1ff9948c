use grassop_core::linalg::{hermitian_defect, hermitian_eigenvalues, max_abs, real};
use grassop_core::random::random_unitary;
use grassop_core::spectral::random_sd_element;
use grassop_core::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sig(a: &[f64], d: &[usize]) -> ClassSignature {
    ClassSignature::new(a.to_vec(), d.to_vec()).unwrap()
}

fn axes(n: usize, a: &[usize]) -> Subspace {
    Subspace::coordinate(n, a, Tolerance::DEFAULT).unwrap()
}

fn diag(values: &[f64]) -> ComplexMatrix {
    let n = values.len();
    ComplexMatrix::from_fn(n, n, |r, c| if r == c { real(values[r]) } else { real(0.0) })
}

/// Random signature with k in 2..=4, multiplicities in 1..=3 and well separated eigenvalues.
fn random_signature(rng: &mut ChaCha8Rng) -> ClassSignature {
    let k = rng.random_range(2..=4);
    let mut a: Vec<f64> = Vec::new();
    while a.len() < k {
        let v = f64::from(rng.random_range(-8i32..=8)) * 0.5;
        if !a.contains(&v) {
            a.push(v);
        }
    }
    let d = (0..k).map(|_| rng.random_range(1..=3)).collect();
    ClassSignature::new(a, d).unwrap()
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

#[test]
fn matrix_examples() {
    let s = sig(&[1.0, 0.0], &[1, 2]);
    let a = make_operator(&s, vec![axes(3, &[0]), axes(3, &[1, 2])]).unwrap();
    assert!(max_abs(&(a.to_matrix() - diag(&[1.0, 0.0, 0.0]))) < 1e-15);

    let s = sig(&[2.0, 5.0], &[2, 1]);
    let a = make_operator(&s, vec![axes(3, &[0, 1]), axes(3, &[2])]).unwrap();
    assert!(max_abs(&(a.to_matrix() - diag(&[2.0, 2.0, 5.0]))) < 1e-14);
    let b = from_matrix(&diag(&[2.0, 2.0, 5.0]), &s).unwrap();
    assert!(b.eigenspace(0).same_as(&axes(3, &[0, 1])).unwrap());
    assert!(b.eigenspace(1).same_as(&axes(3, &[2])).unwrap());
    assert!(matches!(from_matrix(&diag(&[2.0, 5.0, 5.0]), &s), Err(Error::SpectrumMismatch(_))));
}

#[test]
fn construction_errors() {
    let s = sig(&[1.0, 0.0], &[1, 2]);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut f = ComplexMatrix::zeros(3, 2);
    f[(0, 0)] = real(h);
    f[(1, 0)] = real(h);
    f[(2, 1)] = real(1.0);
    let tilted = Subspace::from_frame(f, Tolerance::DEFAULT).unwrap();
    assert!(matches!(
        make_operator(&s, vec![axes(3, &[0]), tilted]),
        Err(Error::NonOrthogonalEigenspaces(..))
    ));
    assert!(matches!(
        make_operator(&s, vec![axes(3, &[0, 1]), axes(3, &[2])]),
        Err(Error::DimensionMismatch { .. })
    ));
    assert!(matches!(ClassSignature::new(vec![1.0], vec![3]), Err(Error::InvalidSignature(_))));
    assert!(matches!(ClassSignature::new(vec![1.0, 1.0], vec![1, 1]), Err(Error::InvalidSignature(_))));
    assert!(matches!(ClassSignature::new(vec![1.0, 2.0], vec![1, 0]), Err(Error::InvalidSignature(_))));
}

#[test]
fn class_membership() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let s = sig(&[0.0, 1.0], &[2, 1]);
    let (a, b) = (random_operator(&s, &mut rng), random_operator(&s, &mut rng));
    assert!(same_class(&a, &b));
    let c = random_operator(&sig(&[0.0, 2.0], &[2, 1]), &mut rng);
    assert!(!same_class(&a, &c));
    // the multiplicity travels with its eigenvalue
    let swapped = random_operator(&sig(&[0.0, 1.0], &[1, 2]), &mut rng);
    assert!(!same_class(&a, &swapped));
    let reordered = random_operator(&sig(&[1.0, 0.0], &[1, 2]), &mut rng);
    assert!(same_class(&a, &reordered));
}

#[test]
fn sd_group_sizes() {
    assert_eq!(sd_group(&sig(&[0.0, 1.0], &[3, 3])).unwrap().len(), 2);
    assert_eq!(sd_group(&sig(&[0.0, 1.0, 2.0], &[1, 2, 3])).unwrap().len(), 1);
    assert_eq!(sd_group(&sig(&[0.0, 1.0, 2.0], &[2, 2, 2])).unwrap().len(), 6);
    assert_eq!(sd_group(&sig(&[0.0, 1.0, 2.0, 3.0, 4.0], &[1, 2, 1, 2, 1])).unwrap().len(), 12);
    let g = sd_group(&sig(&[0.0, 1.0, 2.0, 3.0], &[1, 1, 2, 2])).unwrap();
    assert!(g[0].is_identity());
    assert!(g.iter().all(|p| p.preserves(&sig(&[0.0, 1.0, 2.0, 3.0], &[1, 1, 2, 2]))));
}

#[test]
fn swap_sends_projection_to_complement() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let s = sig(&[0.0, 1.0], &[2, 2]);
    let a = random_operator(&s, &mut rng);
    let swap = Permutation::transposition(2, 0, 1).unwrap();
    let b = apply_permutation(&swap, &a).unwrap();
    // a = P_X with X the 1-eigenspace; the image is P_{X^perp}
    let x = a.eigenspace(1);
    assert!(b.eigenspace(1).same_as(&x.complement(None).unwrap()).unwrap());
    let id = Permutation::identity(2);
    assert!(apply_permutation(&id, &a).unwrap().equals(&a).unwrap());
    let bad = sig(&[0.0, 1.0], &[1, 3]);
    assert!(matches!(apply_permutation(&swap, &random_operator(&bad, &mut rng)), Err(Error::NotInSd)));
}

#[test]
fn sampling_is_deterministic() {
    let s = sig(&[-1.0, 0.5, 2.0], &[2, 1, 3]);
    let a = random_operator(&s, &mut ChaCha8Rng::seed_from_u64(9));
    let b = random_operator(&s, &mut ChaCha8Rng::seed_from_u64(9));
    for (x, y) in a.eigenspaces().iter().zip(b.eigenspaces()) {
        assert_eq!(x.frame(), y.frame());
    }
}

#[test]
fn samples_pass_validation() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..1000 {
        let s = random_signature(&mut rng);
        let a = random_operator(&s, &mut rng);
        make_operator(&s, a.eigenspaces().to_vec()).unwrap();
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn spectrum_matches_signature(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_signature(&mut rng);
        let m = random_operator(&s, &mut rng).to_matrix();
        prop_assert!(hermitian_defect(&m) < 1e-12);
        let mut want: Vec<f64> = s
            .eigenvalues()
            .iter()
            .zip(s.multiplicities())
            .flat_map(|(&a, &n)| std::iter::repeat_n(a, n))
            .collect();
        want.sort_by(f64::total_cmp);
        let got = hermitian_eigenvalues(&m).unwrap();
        for (g, w) in got.iter().zip(&want) {
            prop_assert!((g - w).abs() < 1e-8, "{got:?} vs {want:?}");
        }
        // power traces do not go through any eigensolver
        let mut p = ComplexMatrix::identity(m.nrows(), m.ncols());
        for power in 1..=s.k() as i32 {
            p = &p * &m;
            let expected: f64 = want.iter().map(|a| a.powi(power)).sum();
            prop_assert!((p.trace().re - expected).abs() < 1e-8 * expected.abs().max(1.0));
        }
    }

    #[test]
    fn matrix_round_trip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_signature(&mut rng);
        let a = random_operator(&s, &mut rng);
        let b = from_matrix(&a.to_matrix(), &s).unwrap();
        prop_assert!(b.equals(&a).unwrap());
        prop_assert!(max_abs(&(b.to_matrix() - a.to_matrix())) < 1e-10);
    }

    #[test]
    fn group_size_is_product_of_factorials(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = rng.random_range(2..=6);
        let d: Vec<usize> = (0..k).map(|_| rng.random_range(1..=3)).collect();
        let s = ClassSignature::new((0..k).map(|i| i as f64).collect(), d.clone()).unwrap();
        let want: usize = (1..=3).map(|m| factorial(d.iter().filter(|&&x| x == m).count())).product();
        let g = sd_group(&s).unwrap();
        prop_assert_eq!(g.len(), want);
        prop_assert_eq!(factorial(k) % g.len(), 0);
    }

    #[test]
    fn permutations_act_consistently(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = sig(&[0.0, 1.0, 2.0, 3.0], &[2, 1, 2, 2]);
        let a = random_operator(&s, &mut rng);
        let d1 = random_sd_element(&s, &mut rng).unwrap();
        let d2 = random_sd_element(&s, &mut rng).unwrap();
        let two_steps = apply_permutation(&d1, &apply_permutation(&d2, &a).unwrap()).unwrap();
        let composed = apply_permutation(&d1.compose(&d2).unwrap(), &a).unwrap();
        prop_assert!(two_steps.equals(&composed).unwrap());
        prop_assert!(same_class(&a, &composed));
        // the matrix of delta(A) is the sum of a_i P_{X_delta(i)}
        let mut m = ComplexMatrix::zeros(7, 7);
        for i in 0..4 {
            m += a.eigenspace(d1.image(i)).projector() * real(s.eigenvalue(i));
        }
        prop_assert!(max_abs(&(apply_permutation(&d1, &a).unwrap().to_matrix() - m)) < 1e-12);
        let back = apply_permutation(&d1.inverse(), &apply_permutation(&d1, &a).unwrap()).unwrap();
        prop_assert!(back.equals(&a).unwrap());
    }

    #[test]
    fn conjugation_stays_in_class(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_signature(&mut rng);
        let a = random_operator(&s, &mut rng);
        let u = random_unitary(s.ambient_dim(), &mut rng);
        let m = &u * a.to_matrix() * u.adjoint();
        let b = from_matrix(&m, &s).unwrap();
        for t in 0..s.k() {
            let moved = Subspace::from_frame(&u * a.eigenspace(t).frame(), Tolerance::DEFAULT).unwrap();
            prop_assert!(b.eigenspace(t).same_as(&moved).unwrap());
        }
    }
}
