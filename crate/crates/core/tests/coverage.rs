mod common;

use std::sync::Arc;

use blockgeom::gf::Field;
use blockgeom::pg::{PointSet, ProjSpace};
use blockgeom::verify::{blocking_check, coverage, minimality_check, planarity_check, triviality_check};
use proptest::prelude::*;

fn space(p: u32, k: u32, dim: usize) -> ProjSpace {
    ProjSpace::new(Arc::new(Field::new(p, k, None).unwrap()), dim)
}

fn random_set(space: &ProjSpace, picks: &[u64]) -> PointSet {
    let n = space.num_points();
    PointSet::new(space.clone(), picks.iter().map(|r| r % n).collect()).unwrap()
}

fn saturate(c: u64) -> u8 {
    c.min(u8::MAX as u64) as u8
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn counts_match_double_loop(
        shape in prop::sample::select(vec![(2u32, 2u32, 2usize), (3, 1, 3), (2, 1, 4), (3, 2, 2), (2, 3, 2)]),
        picks in prop::collection::vec(any::<u64>(), 0..40),
        workers in 1usize..4,
    ) {
        let sp = space(shape.0, shape.1, shape.2);
        let set = random_set(&sp, &picks);
        let naive: Vec<u8> = common::naive_counts(&set).into_iter().map(saturate).collect();
        let cov = coverage(&set, workers).unwrap();
        prop_assert_eq!(cov.counts(), &naive[..]);
    }

    #[test]
    fn minimality_matches_deletion_oracle(
        picks in prop::collection::vec(any::<u64>(), 5..14),
    ) {
        let sp = space(2, 2, 2);
        let set = random_set(&sp, &picks);
        let (cov, verdict) = blocking_check(&set, 1).unwrap();
        prop_assert_eq!(verdict.is_blocking(), common::naive_blocking(&set));
        if verdict.is_blocking() {
            let m = minimality_check(&set, &cov).unwrap();
            prop_assert_eq!(m.is_minimal(), common::naive_minimal(&set));
            for e in &m.essential {
                prop_assert_eq!(cov.count(e.witness), 1);
            }
        }
    }
}

#[test]
fn counts_saturate_at_255() {
    // PG(2, 256): every line holds 257 points.
    let sp = space(2, 8, 2);
    let all = PointSet::new(sp.clone(), (0..sp.num_points()).collect()).unwrap();
    let cov = coverage(&all, 2).unwrap();
    assert!(cov.counts().iter().all(|&c| c == u8::MAX));
}

#[test]
fn worker_count_does_not_change_coverage() {
    let sp = space(3, 1, 4);
    let set = random_set(&sp, &(0..60).map(|i| i * 37 + 11).collect::<Vec<_>>());
    let one = coverage(&set, 1).unwrap();
    for w in [2, 3, 8] {
        let other = coverage(&set, w).unwrap();
        assert_eq!(one.counts(), other.counts());
        assert_eq!(one.checksum(), other.checksum());
    }
}

#[test]
fn baer_subplane_is_minimal_blocking_and_nontrivial() {
    // The real points of PG(2, 4) form a Baer subplane: 7 points, every line
    // meets it in 1 or 3 points.
    let sp = space(2, 2, 2);
    let baer: Vec<u64> = sp
        .points()
        .filter(|p| p.coords().iter().all(|&c| c < 2))
        .map(|p| sp.rank(&p))
        .collect();
    let set = PointSet::new(sp.clone(), baer).unwrap();
    assert_eq!(set.len(), 7);
    let (cov, verdict) = blocking_check(&set, 1).unwrap();
    assert!(verdict.is_blocking());
    assert!(minimality_check(&set, &cov).unwrap().is_minimal());
    assert!(!triviality_check(&set));
    assert!(cov.counts().iter().all(|&c| c == 1 || c == 3));
    assert_eq!(planarity_check(&set).unwrap().span_dim, 2);
    for line in common::naive_lines(&sp) {
        let meet = line.iter().filter(|&&r| set.contains_rank(r)).count();
        assert!(meet == 1 || meet == 3);
    }
}
