//! Brute-force oracles shared by the integration tests. They deliberately
//! avoid the library's accumulation paths and use only dot products.

#![allow(dead_code)]

use blockgeom::pg::{Point, PointSet, ProjSpace};

/// `|set ∩ H|` for every hyperplane `H`, by a double loop over hyperplanes
/// and points.
pub fn naive_counts(set: &PointSet) -> Vec<u64> {
    let space = set.space();
    let f = space.field();
    let pts: Vec<Point> = set.points().collect();
    space
        .hyperplanes()
        .map(|h| pts.iter().filter(|p| f.dot(p.coords(), h.coords()) == 0).count() as u64)
        .collect()
}

pub fn naive_blocking(set: &PointSet) -> bool {
    naive_counts(set).iter().all(|&c| c > 0)
}

/// Every point can be dropped only at the cost of the blocking property.
pub fn naive_minimal(set: &PointSet) -> bool {
    naive_blocking(set)
        && set.ranks().iter().all(|&r| {
            let rest: Vec<u64> = set.ranks().iter().copied().filter(|&x| x != r).collect();
            !naive_blocking(&PointSet::new(set.space().clone(), rest).unwrap())
        })
}

/// Lines of a plane as point-rank sets, built from pairs of points.
pub fn naive_lines(space: &ProjSpace) -> Vec<Vec<u64>> {
    let f = space.field();
    let mut lines: Vec<Vec<u64>> = space
        .hyperplanes()
        .map(|h| {
            space
                .points()
                .filter(|p| f.dot(p.coords(), h.coords()) == 0)
                .map(|p| space.rank(&p))
                .collect()
        })
        .collect();
    assert_eq!(space.dim(), 2, "lines are hyperplanes only in a plane");
    lines.sort();
    lines
}
