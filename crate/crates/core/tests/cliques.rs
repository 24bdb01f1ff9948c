use grassop_core::adjacency::{is_adjacent, make_ij_adjacent};
use grassop_core::cliques::*;
use grassop_core::connectivity::{component_of, reduced_signature};
use grassop_core::random::random_subspace_in;
use grassop_core::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn sig(a: &[f64], d: &[usize]) -> ClassSignature {
    ClassSignature::new(a.to_vec(), d.to_vec()).unwrap()
}

fn parent() -> ClassSignature {
    sig(&[1.0, 2.0, 3.0], &[2, 2, 2])
}

/// A random `(-i,+j)`-clique of `parent`.
fn random_clique(parent: &ClassSignature, i: usize, j: usize, rng: &mut ChaCha8Rng) -> CliqueDescriptor {
    let t = random_operator(&reduced_signature(parent, i, j, 1).unwrap(), rng);
    star_clique(parent, &t, i, j).unwrap()
}

fn members(d: &CliqueDescriptor, count: usize, rng: &mut ChaCha8Rng) -> Vec<SpectralOperator> {
    (0..count).map(|_| d.random_member(rng).unwrap()).collect()
}

#[test]
fn star_members_are_pairwise_adjacent() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let s = parent();
    let d = random_clique(&s, 0, 1, &mut rng);
    let ms = members(&d, 5, &mut rng);
    for (a, x) in ms.iter().enumerate() {
        assert_eq!(x.signature(), &s);
        assert!(d.contains(x).unwrap());
        // a_i-eigenspaces form a star around M^T_i, a_j-eigenspaces a top inside M^T_j
        assert!(x.eigenspace(0).contains(&d.shrunk_space()).unwrap());
        assert!(d.grown_space().contains(x.eigenspace(1)).unwrap());
        assert!(d.merged_space().same_as(&x.eigenspace(0).sum(x.eigenspace(1)).unwrap()).unwrap());
        for y in &ms[a + 1..] {
            assert_eq!(is_adjacent(x, y).unwrap().type_pair, Some((0, 1)));
        }
    }
    let line = random_subspace_in(&d.grown_space(), 1, &mut rng).unwrap();
    let other = random_subspace_in(&d.grown_space(), 1, &mut rng).unwrap();
    let m1 = clique_member(&d, &line).unwrap();
    assert!(m1.equals(&d.member(&line).unwrap()).unwrap());
    assert!(!m1.equals(&d.member(&other).unwrap()).unwrap());
}

#[test]
fn member_errors() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let s = parent();
    let d = random_clique(&s, 0, 1, &mut rng);
    let inside_shrunk = d.shrunk_space();
    assert!(matches!(d.member(&inside_shrunk), Err(Error::NotContained)));
    let plane = random_subspace_in(&d.grown_space(), 2, &mut rng).unwrap();
    assert!(matches!(d.member(&plane), Err(Error::DimensionMismatch { .. })));
    let wrong = random_operator(&s, &mut rng);
    assert!(matches!(star_clique(&s, &wrong, 0, 1), Err(Error::SignatureMismatch)));
}

#[test]
fn triangles() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let s = parent();
    let d = random_clique(&s, 1, 2, &mut rng);
    let ms = members(&d, 3, &mut rng);
    assert_eq!(triangle_type(&ms[0], &ms[1], &ms[2]).unwrap(), (1, 2));

    for _ in 0..10 {
        let a = random_operator(&s, &mut rng);
        let b = make_ij_adjacent(&a, 0, 1, &mut rng).unwrap();
        let c = line_through(&a, &b).unwrap().random_member(&mut rng).unwrap();
        assert_eq!(triangle_type(&a, &b, &c).unwrap(), (0, 1));
        let far = make_ij_adjacent(&a, 1, 2, &mut rng).unwrap();
        assert!(matches!(triangle_type(&a, &b, &far), Err(Error::NotMutuallyAdjacent)));
    }
}

#[test]
fn classification_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let s = sig(&[1.0, 2.0, 3.0, 4.0], &[2, 3, 2, 1]);
    for (i, j) in [(0, 1), (1, 0), (0, 2), (2, 1)] {
        let d = random_clique(&s, i, j, &mut rng);
        let (pair, orientation, found) = classify_clique(&members(&d, 4, &mut rng)).unwrap();
        assert_eq!(pair, (i.min(j), i.max(j)));
        assert_eq!(orientation, if i < j { Orientation::Star } else { Orientation::Top });
        assert_eq!(found.pair(), (i, j));
        assert!(found.same_as(&d).unwrap());
    }
    let d = random_clique(&s, 0, 1, &mut rng);
    let mut mixed = members(&d, 3, &mut rng);
    mixed.push(make_ij_adjacent(&mixed[0], 0, 2, &mut rng).unwrap());
    assert!(matches!(classify_clique(&mixed), Err(Error::NotAClique(_))));
    assert!(matches!(classify_clique(&mixed[..2]), Err(Error::AmbiguousOrientation)));
    // n_3 = 1: a single edge type cannot fix the orientation
    let d = random_clique(&s, 0, 3, &mut rng);
    assert!(matches!(classify_clique(&members(&d, 3, &mut rng)), Err(Error::AmbiguousOrientation)));
}

#[test]
fn maximality_flag() {
    let s = sig(&[0.0, 1.0, 2.0], &[2, 1, 2]);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    assert!(!random_clique(&s, 0, 1, &mut rng).is_maximal());
    assert!(random_clique(&s, 1, 0, &mut rng).is_maximal());
    assert!(random_clique(&s, 0, 2, &mut rng).is_maximal());
}

#[test]
fn lines() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let s = parent();
    for _ in 0..10 {
        let a = random_operator(&s, &mut rng);
        let b = make_ij_adjacent(&a, 2, 0, &mut rng).unwrap();
        let l = line_through(&a, &b).unwrap();
        assert!(l.contains(&a).unwrap() && l.contains(&b).unwrap());
        assert!(l.same_as(&line_through(&b, &a).unwrap()).unwrap());
        let c = l.random_member(&mut rng).unwrap();
        for x in [&a, &b] {
            assert_eq!(is_adjacent(x, &c).unwrap().type_pair, Some((0, 2)));
        }
        assert!(l.star().contains(&c).unwrap() && l.top().contains(&c).unwrap());
        let rebuilt = LineDescriptor::new(&s, l.pair().0, l.pair().1, l.star_base().clone(), l.top_base().clone());
        assert!(rebuilt.unwrap().same_as(&l).unwrap());
    }
    let a = random_operator(&s, &mut rng);
    assert!(matches!(line_through(&a, &random_operator(&s, &mut rng)), Err(Error::NotAdjacent)));
    let thin = sig(&[0.0, 1.0, 2.0], &[1, 2, 2]);
    let a = random_operator(&thin, &mut rng);
    let b = make_ij_adjacent(&a, 0, 1, &mut rng).unwrap();
    assert!(matches!(line_through(&a, &b), Err(Error::MultiplicityTooSmall)));
}

#[test]
fn intersections() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let s = parent();
    for _ in 0..10 {
        let a = random_operator(&s, &mut rng);
        let b = make_ij_adjacent(&a, 0, 1, &mut rng).unwrap();
        let l = line_through(&a, &b).unwrap();
        let (star, top) = (l.star(), l.top());
        assert!(matches!(clique_intersection(&star, &star).unwrap(), CliqueIntersection::Equal));
        for (x, y) in [(&star, &top), (&top, &star)] {
            match clique_intersection(x, y).unwrap() {
                CliqueIntersection::Line(m) => assert!(m.same_as(&l).unwrap()),
                other => panic!("{other:?}"),
            }
        }
        // two stars of one component share exactly one operator
        let comp = component_of(&a, 0, 1).unwrap();
        let m = comp.merged_space();
        let other_star = {
            let mut spaces = a.eigenspaces().to_vec();
            spaces[0] = random_subspace_in(m, 1, &mut rng).unwrap();
            spaces[1] = spaces[0].complement(Some(m)).unwrap();
            let t = make_operator(&reduced_signature(&s, 0, 1, 1).unwrap(), spaces).unwrap();
            star_clique(&s, &t, 0, 1).unwrap()
        };
        match clique_intersection(&star, &other_star).unwrap() {
            CliqueIntersection::Singleton(x) => {
                assert!(star.contains(&x).unwrap() && other_star.contains(&x).unwrap());
            }
            other => panic!("{other:?}"),
        }
        // different fixed eigenspace at index 2
        let elsewhere = random_clique(&s, 0, 1, &mut rng);
        assert!(matches!(clique_intersection(&star, &elsewhere).unwrap(), CliqueIntersection::Empty));
    }
    let other_class = random_clique(&sig(&[1.0, 2.0, 5.0], &[2, 2, 2]), 0, 1, &mut rng);
    let d = random_clique(&s, 0, 1, &mut rng);
    assert!(matches!(clique_intersection(&d, &other_class), Err(Error::ClassMismatch)));
}

#[test]
fn chains() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let s = parent();
    let a = random_operator(&s, &mut rng);
    let comp = component_of(&a, 0, 1).unwrap();
    let m = comp.merged_space().clone();
    let clique_in = |i: usize, j: usize, rng: &mut ChaCha8Rng| {
        let mut spaces = a.eigenspaces().to_vec();
        spaces[i] = random_subspace_in(&m, s.multiplicity(i) - 1, rng).unwrap();
        spaces[j] = spaces[i].complement(Some(&m)).unwrap();
        let t = make_operator(&reduced_signature(&s, i, j, 1).unwrap(), spaces).unwrap();
        star_clique(&s, &t, i, j).unwrap()
    };
    let d = clique_in(0, 1, &mut rng);
    assert_eq!(clique_chain(&d, &d, &comp).unwrap().len(), 1);

    let b = make_ij_adjacent(&a, 0, 1, &mut rng).unwrap();
    let l = line_through(&a, &b).unwrap();
    assert_eq!(clique_chain(&l.star(), &l.top(), &comp).unwrap().len(), 2);

    for (p, q) in [((0, 1), (0, 1)), ((0, 1), (1, 0)), ((1, 0), (1, 0)), ((1, 0), (0, 1))] {
        for _ in 0..5 {
            let d1 = clique_in(p.0, p.1, &mut rng);
            let d2 = clique_in(q.0, q.1, &mut rng);
            let chain = clique_chain(&d1, &d2, &comp).unwrap();
            assert!(chain[0].same_as(&d1).unwrap());
            assert!(chain.last().unwrap().same_as(&d2).unwrap());
            for w in chain.windows(2) {
                assert!(matches!(clique_intersection(&w[0], &w[1]).unwrap(), CliqueIntersection::Line(_)));
                assert!(comp.contains(&w[0].random_member(&mut rng).unwrap()).unwrap());
            }
        }
    }
    let outside = random_clique(&s, 0, 1, &mut rng);
    assert!(matches!(clique_chain(&d, &outside, &comp), Err(Error::DifferentComponents)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn sampled_members_round_trip(seed in any::<u64>(), i in 0usize..3, shift in 1usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = parent();
        let j = (i + shift) % 3;
        let d = random_clique(&s, i, j, &mut rng);
        let ms = members(&d, 4, &mut rng);
        for a in 0..ms.len() {
            for b in a + 1..ms.len() {
                prop_assert_eq!(is_adjacent(&ms[a], &ms[b]).unwrap().type_pair, Some((i.min(j), i.max(j))));
            }
        }
        let (_, _, found) = classify_clique(&ms).unwrap();
        prop_assert!(found.same_as(&d).unwrap());
    }

    #[test]
    fn intersection_is_symmetric(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = parent();
        let a = random_operator(&s, &mut rng);
        let b = make_ij_adjacent(&a, 0, 1, &mut rng).unwrap();
        let c = make_ij_adjacent(&b, 0, 1, &mut rng).unwrap();
        let cliques = [
            line_through(&a, &b).unwrap().star(),
            line_through(&a, &b).unwrap().top(),
            line_through(&b, &c).unwrap().star(),
            line_through(&b, &c).unwrap().top(),
            random_clique(&s, 0, 1, &mut rng),
        ];
        for x in &cliques {
            for y in &cliques {
                let kind = |r: CliqueIntersection| match r {
                    CliqueIntersection::Empty => 0,
                    CliqueIntersection::Singleton(_) => 1,
                    CliqueIntersection::Line(_) => 2,
                    CliqueIntersection::Equal => 3,
                };
                prop_assert_eq!(
                    kind(clique_intersection(x, y).unwrap()),
                    kind(clique_intersection(y, x).unwrap())
                );
            }
        }
    }
}
