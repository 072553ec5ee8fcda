//! Exhaustive check of the cone construction on PG(2, 4), represented in
//! PG(4, 2) with a line spread at infinity and a point vertex.

mod common;

use std::sync::Arc;
use std::time::Instant;

use blockgeom::model::BcModel;
use blockgeom::mps::{f_search_blocking, mps_build, mps_size_predict, MpsFrame};
use blockgeom::pg::{Point, PointSet};

fn frame() -> MpsFrame {
    MpsFrame::new(Arc::new(BcModel::new(2, 2, 2).unwrap()), 0).unwrap()
}

/// Family blocking and inclusion-minimality of the affine part, tested by
/// explicit membership in each member subspace.
fn naive_family_minimal(frame: &MpsFrame, affine: &[Point]) -> bool {
    let amb = frame.ambient();
    let members: Vec<_> = frame
        .family_enumerate()
        .map(|m| frame.member_subspace(&m))
        .collect();
    let blocks = |pts: &[&Point]| members.iter().all(|s| pts.iter().any(|p| amb.contains(s, p)));
    let all: Vec<&Point> = affine.iter().collect();
    blocks(&all)
        && (0..affine.len()).all(|i| {
            let rest: Vec<&Point> = affine
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, p)| p)
                .collect();
            !blocks(&rest)
        })
}

#[test]
fn frame_shape() {
    let f = frame();
    assert_eq!(f.gamma_prime().dim(), 3);
    assert_eq!(f.theta().dim(), 0);
    assert_eq!(f.family_size(), 16);
    assert_eq!(f.model().pg().num_points(), 21);
}

#[test]
fn family_blocking_sets_up_to_six() {
    let start = Instant::now();
    let f = frame();
    let pg = f.model().pg().clone();
    let lines = common::naive_lines(&pg);
    let found = f_search_blocking(&f, 6).unwrap();
    assert!(!found.is_empty());

    let x_tester = f.ambient().tester(f.x());
    let mut minimal_nontrivial = Vec::new();
    for set in &found {
        let b = mps_build(&f, &set.bbar).unwrap();
        assert_eq!(b.len() as u64, mps_size_predict(set.bbar.len() as u64, 2, 2, 0));
        assert!(
            common::naive_blocking(&b),
            "cone over {:?} does not block",
            set.bbar.ranks()
        );

        let affine: Vec<Point> = set
            .bbar
            .points()
            .filter(|p| !x_tester.contains_point(p))
            .collect();
        assert_eq!(set.minimal, naive_family_minimal(&f, &affine));
        assert_eq!(
            common::naive_minimal(&b),
            set.minimal,
            "minimality differs for {:?}",
            set.bbar.ranks()
        );

        let b_trivial = lines.iter().any(|l| l.iter().all(|&r| b.contains_rank(r)));
        if b_trivial {
            assert!(
                set.trivial,
                "B contains a line but B̄ has none: {:?}",
                set.bbar.ranks()
            );
        }
        if set.minimal && !b_trivial {
            minimal_nontrivial.push(b);
        }
    }
    // The minimal non-trivial outputs are unitals: q^3 + 1 = 9 points, every
    // line meeting them in 1 or q + 1 points. Baer subplanes tangent to the
    // line at infinity are not point cones, so none of size 7 show up.
    assert_eq!(minimal_nontrivial.len(), 8);
    for b in &minimal_nontrivial {
        assert_eq!(b.len(), 9);
        for l in &lines {
            let meet = l.iter().filter(|&&r| b.contains_rank(r)).count();
            assert!(meet == 1 || meet == 3, "line meets B in {meet} points");
        }
    }
    assert!(start.elapsed().as_secs() < 60);
}

#[test]
fn search_census() {
    let f = frame();
    let found = f_search_blocking(&f, 6).unwrap();
    let count = |size: usize, minimal: bool| {
        found
            .iter()
            .filter(|s| s.bbar.len() == size && s.minimal == minimal)
            .count()
    };
    // Lines through X (trivial and minimal), then their supersets, then the
    // ovoids of Gamma' through Theta.
    assert_eq!((count(3, true), count(3, false)), (4, 0));
    assert_eq!((count(4, true), count(4, false)), (0, 24));
    assert_eq!((count(5, true), count(5, false)), (8, 54));
    assert_eq!((count(6, true), count(6, false)), (0, 56));
    assert!(found
        .iter()
        .filter(|s| s.minimal)
        .all(|s| s.trivial == (s.bbar.len() == 3)));

    // A 5-cap of PG(3, 2) is an elliptic quadric.
    let amb = f.ambient();
    for s in found.iter().filter(|s| s.minimal && s.bbar.len() == 5) {
        let pts: Vec<Point> = s.bbar.points().collect();
        for i in 0..5 {
            for j in i + 1..5 {
                let line = amb.span_points(&[&pts[i], &pts[j]]).unwrap();
                assert_eq!(pts.iter().filter(|p| amb.contains(&line, p)).count(), 2);
            }
        }
    }
}

#[test]
fn trivial_bbar_gives_a_line() {
    // B̄ = Theta plus an affine line through it, inside Gamma'.
    let f = frame();
    let amb = f.ambient();
    let theta = f.theta().as_point().unwrap();
    let other = amb
        .points_of(f.gamma_prime())
        .find(|p| f.model().is_affine(p.coords()))
        .unwrap();
    let line = amb.span_points(&[&theta, &other]).unwrap();
    let bbar = PointSet::new(amb.clone(), amb.point_ranks_of(&line)).unwrap();
    let b = mps_build(&f, &bbar).unwrap();
    assert_eq!(b.len(), 5);
    assert!(common::naive_lines(f.model().pg())
        .iter()
        .any(|l| l.iter().all(|&r| b.contains_rank(r))));
}
