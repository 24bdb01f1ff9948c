use grassop_core::linalg::{orthonormality_defect, real};
use grassop_core::random::{complex_gaussian, random_subspace, random_subspace_in};
use grassop_core::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: Tolerance = Tolerance::DEFAULT;

/// Two random subspaces of `C^n` sharing a random subspace of dimension `overlap`.
fn overlapping(n: usize, rng: &mut ChaCha8Rng) -> (Subspace, Subspace) {
    let overlap = rng.random_range(0..=n / 2);
    let common = random_subspace(n, overlap, TOL, rng).unwrap();
    let rest = common.complement(None).unwrap();
    let a = rng.random_range(0..=rest.dim());
    let b = rng.random_range(0..=rest.dim());
    let x = random_subspace_in(&rest, a, rng).unwrap();
    let y = random_subspace_in(&rest, b, rng).unwrap();
    (common.sum(&x).unwrap(), common.sum(&y).unwrap())
}

fn frame_ok(s: &Subspace) -> bool {
    orthonormality_defect(s.frame()) < 10.0 * TOL.angle_abs
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn modular_law(seed in any::<u64>(), n in 2usize..9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, y) = overlapping(n, &mut rng);
        let s = x.sum(&y).unwrap();
        let i = x.intersect(&y).unwrap();
        prop_assert_eq!(s.dim() + i.dim(), x.dim() + y.dim());
        prop_assert!(s.contains(&x).unwrap() && s.contains(&y).unwrap());
        prop_assert!(x.contains(&i).unwrap() && y.contains(&i).unwrap());
        prop_assert!(frame_ok(&s) && frame_ok(&i));
    }

    #[test]
    fn complement_is_involutive(seed in any::<u64>(), n in 1usize..9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = rng.random_range(0..=n);
        let s = random_subspace(n, m, TOL, &mut rng).unwrap();
        let c = s.complement(None).unwrap();
        prop_assert_eq!(c.dim(), n - m);
        prop_assert!(c.is_orthogonal_to(&s).unwrap());
        prop_assert!(frame_ok(&c));
        let cc = c.complement(None).unwrap();
        prop_assert!(cc.principal_angles(&s).unwrap().iter().all(|&t| t < TOL.angle_abs));
    }

    #[test]
    fn relative_complement(seed in any::<u64>(), n in 2usize..9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = random_subspace(n, rng.random_range(1..=n), TOL, &mut rng).unwrap();
        let s = random_subspace_in(&w, rng.random_range(0..=w.dim()), &mut rng).unwrap();
        let c = s.complement(Some(&w)).unwrap();
        prop_assert!(w.contains(&c).unwrap());
        prop_assert!(c.is_orthogonal_to(&s).unwrap());
        prop_assert!(c.sum(&s).unwrap().same_as(&w).unwrap());
    }

    #[test]
    fn projector_rank_is_dimension(seed in any::<u64>(), n in 1usize..13) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = rng.random_range(0..=n);
        let s = random_subspace(n, m, TOL, &mut rng).unwrap();
        prop_assert_eq!(numerical_rank(&s.projector(), &TOL).unwrap(), m);
    }

    #[test]
    fn orthonormalize_spans_columns(seed in any::<u64>(), n in 2usize..9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // r independent columns followed by random combinations of them
        let r = rng.random_range(1..=n);
        let cols = rng.random_range(r..=n + 2);
        let base = complex_gaussian(n, r, &mut rng);
        let mix = complex_gaussian(r, cols - r, &mut rng);
        let mut m = ComplexMatrix::zeros(n, cols);
        m.columns_mut(0, r).copy_from(&base);
        m.columns_mut(r, cols - r).copy_from(&(&base * mix));
        let s = orthonormalize(&m, TOL).unwrap();
        prop_assert_eq!(s.dim(), r);
        prop_assert!(frame_ok(&s));
        for c in 0..cols {
            prop_assert!(s.contains_vector(&m.column(c).into_owned()));
        }
    }

    #[test]
    fn grassmann_path_steps(seed in any::<u64>(), n in 2usize..9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = rng.random_range(1..n);
        let overlap = rng.random_range(0..=m);
        let common = random_subspace(n, overlap, TOL, &mut rng).unwrap();
        let rest = common.complement(None).unwrap();
        let free = (m - overlap).min(rest.dim() / 2);
        let m = overlap + free;
        let x = common.sum(&random_subspace_in(&rest, free, &mut rng).unwrap()).unwrap();
        let y = common.sum(&random_subspace_in(&rest, free, &mut rng).unwrap()).unwrap();
        let path = grassmann_path(&x, &y, &Subspace::full(n, TOL)).unwrap();
        let meet = x.intersect(&y).unwrap().dim();
        prop_assert_eq!(path.len() - 1, m - meet);
        prop_assert!(path[0].same_as(&x).unwrap());
        prop_assert!(path[path.len() - 1].same_as(&y).unwrap());
        for w in path.windows(2) {
            prop_assert!(subspaces_adjacent(&w[0], &w[1]).unwrap());
            prop_assert!(frame_ok(&w[1]));
        }
    }
}

#[test]
fn grassmann_path_stays_inside_ambient() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let ambient = random_subspace(7, 5, TOL, &mut rng).unwrap();
    let x = random_subspace_in(&ambient, 2, &mut rng).unwrap();
    let y = random_subspace_in(&ambient, 2, &mut rng).unwrap();
    let path = grassmann_path(&x, &y, &ambient).unwrap();
    assert_eq!(path.len(), 3);
    assert!(path.iter().all(|z| ambient.contains(z).unwrap()));
    let outside = random_subspace(7, 2, TOL, &mut rng).unwrap();
    assert!(matches!(grassmann_path(&x, &outside, &ambient), Err(Error::NotContained)));
}

#[test]
fn rank_cutoff_is_relative() {
    let mut m = ComplexMatrix::zeros(3, 3);
    m[(0, 0)] = real(1e6);
    m[(1, 1)] = real(1e-4);
    assert_eq!(numerical_rank(&m, &TOL).unwrap(), 1);
    m[(1, 1)] = real(1e-2);
    assert_eq!(numerical_rank(&m, &TOL).unwrap(), 2);
}
