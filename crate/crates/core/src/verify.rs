//! Exhaustive certification of point sets of PG(m, q): blocking, minimality,
//! triviality and planarity.
//!
//! Coverage is accumulated dually: every point of the set bumps the counter
//! of each hyperplane through it, so the cost is `|S|` times the number of
//! hyperplanes per point. Counters are 8-bit and saturate at 255; minimality
//! only needs to tell 1 from "at least 2".

use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicU8, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf::Elem;
use crate::pg::{PointSet, ProjSpace};

/// How many uncovered hyperplane ranks a report keeps.
pub const UNCOVERED_SAMPLE: usize = 64;

/// Per-hyperplane intersection counts of a point set, tied to that set by
/// its checksum.
#[derive(Clone, Debug)]
pub struct Coverage {
    counts: Vec<u8>,
    checksum: u64,
}

impl Coverage {
    /// Counts indexed by hyperplane rank, saturated at 255.
    pub fn counts(&self) -> &[u8] {
        &self.counts
    }

    pub fn checksum(&self) -> u64 {
        self.checksum
    }

    pub fn count(&self, hyperplane: u64) -> u8 {
        self.counts[hyperplane as usize]
    }
}

fn space_usize(space: &ProjSpace) -> Result<usize> {
    usize::try_from(space.num_points())
        .map_err(|_| Error::TooLarge(format!("{space:?} has too many hyperplanes")))
}

/// Builds the coverage array. With `workers > 1` the points are spread over
/// a thread pool of that size and the counters are shared atomics; saturating
/// addition is commutative, so the result does not depend on scheduling.
pub fn coverage(set: &PointSet, workers: usize) -> Result<Coverage> {
    let space = set.space();
    let total = space_usize(space)?;
    let checksum = set.checksum();
    if workers <= 1 || set.len() < 2 {
        let counts = if total > BUCKETED_FROM && u32::try_from(total).is_ok() {
            bucketed_counts(set, total)
        } else {
            let mut counts = vec![0u8; total];
            let mut v = vec![0 as Elem; space.len()];
            for &r in set.ranks() {
                space.unrank_into(r, &mut v);
                space.for_each_hyperplane_through(&v, |h, _| {
                    let c = &mut counts[h as usize];
                    *c = c.saturating_add(1);
                    true
                });
            }
            counts
        };
        return Ok(Coverage { counts, checksum });
    }
    let shared: Vec<AtomicU8> = (0..total).map(|_| AtomicU8::new(0)).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Precondition(format!("thread pool: {e}")))?;
    pool.install(|| {
        set.ranks().par_iter().for_each(|&r| {
            let mut v = vec![0 as Elem; space.len()];
            space.unrank_into(r, &mut v);
            space.for_each_hyperplane_through(&v, |h, _| {
                let _ = shared[h as usize]
                    .fetch_update(Ordering::Relaxed, Ordering::Relaxed, |c| c.checked_add(1));
                true
            });
        })
    });
    let counts = shared.into_iter().map(AtomicU8::into_inner).collect();
    Ok(Coverage { counts, checksum })
}

/// Counter arrays larger than this are updated through buckets.
const BUCKETED_FROM: usize = 1 << 24;
/// Each bucket covers `2^BUCKET_BITS` consecutive counters.
const BUCKET_BITS: u32 = 18;
/// Pending updates before the buckets are applied.
const FLUSH_AT: usize = 1 << 24;

/// Serial accumulation for huge counter arrays. Hyperplane ranks arrive in
/// scattered order, so writing them straight into the array misses the cache
/// on almost every update; staging them by counter region first keeps each
/// region's writes together.
fn bucketed_counts(set: &PointSet, total: usize) -> Vec<u8> {
    let space = set.space();
    let mut counts = vec![0u8; total];
    let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); (total >> BUCKET_BITS) + 1];
    let mut pending = 0usize;
    let flush = |buckets: &mut Vec<Vec<u32>>, counts: &mut [u8]| {
        for b in buckets.iter_mut() {
            for &h in b.iter() {
                let c = &mut counts[h as usize];
                *c = c.saturating_add(1);
            }
            b.clear();
        }
    };
    let mut v = vec![0 as Elem; space.len()];
    for &r in set.ranks() {
        space.unrank_into(r, &mut v);
        space.for_each_hyperplane_through(&v, |h, _| {
            buckets[(h >> BUCKET_BITS) as usize].push(h as u32);
            true
        });
        pending += space.hyperplanes_per_point() as usize;
        if pending >= FLUSH_AT {
            flush(&mut buckets, &mut counts);
            pending = 0;
        }
    }
    flush(&mut buckets, &mut counts);
    counts
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct BlockingVerdict {
    pub total: u64,
    pub uncovered_count: u64,
    /// The first few uncovered hyperplane ranks.
    pub uncovered: Vec<u64>,
}

impl BlockingVerdict {
    pub fn is_blocking(&self) -> bool {
        self.uncovered_count == 0
    }
}

/// Coverage plus the blocking verdict.
pub fn blocking_check(set: &PointSet, workers: usize) -> Result<(Coverage, BlockingVerdict)> {
    let cov = coverage(set, workers)?;
    let verdict = blocking_verdict(&cov);
    Ok((cov, verdict))
}

pub fn blocking_verdict(cov: &Coverage) -> BlockingVerdict {
    let mut uncovered = Vec::new();
    let mut uncovered_count = 0u64;
    for (h, &c) in cov.counts.iter().enumerate() {
        if c == 0 {
            uncovered_count += 1;
            if uncovered.len() < UNCOVERED_SAMPLE {
                uncovered.push(h as u64);
            }
        }
    }
    BlockingVerdict {
        total: cov.counts.len() as u64,
        uncovered_count,
        uncovered,
    }
}

/// A point together with a hyperplane meeting the set only in that point.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct Essential {
    pub point: u64,
    pub witness: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct MinimalityVerdict {
    pub essential: Vec<Essential>,
    pub inessential: Vec<u64>,
}

impl MinimalityVerdict {
    pub fn is_minimal(&self) -> bool {
        self.inessential.is_empty()
    }
}

/// Splits the set into essential points (with a tangent hyperplane, the first
/// one met in the enumeration of hyperplanes through the point) and the rest.
/// The coverage must come from the same set.
pub fn minimality_check(set: &PointSet, cov: &Coverage) -> Result<MinimalityVerdict> {
    if cov.checksum != set.checksum() {
        return Err(Error::StaleCoverage);
    }
    let space = set.space();
    let found: Vec<(u64, Option<u64>)> = set
        .ranks()
        .par_iter()
        .map(|&r| {
            let mut v = vec![0 as Elem; space.len()];
            space.unrank_into(r, &mut v);
            let mut witness = None;
            space.for_each_hyperplane_through(&v, |h, _| {
                if cov.counts[h as usize] == 1 {
                    witness = Some(h);
                    false
                } else {
                    true
                }
            });
            (r, witness)
        })
        .collect();
    let mut essential = Vec::new();
    let mut inessential = Vec::new();
    for (point, w) in found {
        match w {
            Some(witness) => essential.push(Essential { point, witness }),
            None => inessential.push(point),
        }
    }
    Ok(MinimalityVerdict {
        essential,
        inessential,
    })
}

/// A line inside the set, given by the ranks of two of its points.
pub fn find_line(set: &PointSet) -> Option<(u64, u64)> {
    let space = set.space();
    let q = space.q();
    if (set.len() as u64) < q + 1 {
        return None;
    }
    let f = space.field();
    let n = space.len();
    let pts: Vec<Vec<Elem>> = set
        .ranks()
        .iter()
        .map(|&r| space.unrank(r).into_coords())
        .collect();
    let mut dir = vec![0 as Elem; n];
    // A contained line is found from its least point `a`: the other q points
    // all have larger rank and share the direction b - b_i a (i = pivot of a).
    for (ia, a) in pts.iter().enumerate() {
        let piv = a.iter().position(|&c| c != 0).expect("nonzero");
        let mut groups: HashMap<u64, (u64, usize)> = HashMap::new();
        for (ib, b) in pts.iter().enumerate().skip(ia + 1) {
            let bi = b[piv];
            for j in 0..n {
                dir[j] = f.sub(b[j], f.mul(bi, a[j]));
            }
            space.normalize_in_place(&mut dir).expect("distinct points");
            let e = groups.entry(space.rank_of(&dir)).or_insert((0, ib));
            e.0 += 1;
            if e.0 == q {
                return Some((set.ranks()[ia], set.ranks()[e.1]));
            }
        }
    }
    None
}

/// Whether the set contains a line of its space.
pub fn triviality_check(set: &PointSet) -> bool {
    find_line(set).is_some()
}

/// Whether the set contains a subspace of projective dimension `d`.
pub fn contains_subspace(set: &PointSet, d: usize) -> bool {
    match d {
        0 => !set.is_empty(),
        1 => triviality_check(set),
        _ => {
            let space = set.space();
            let need = space.subspace_size(d as isize);
            if (set.len() as u64) < need {
                return false;
            }
            let pts: Vec<Vec<Elem>> = set
                .ranks()
                .iter()
                .map(|&r| space.unrank(r).into_coords())
                .collect();
            (0..pts.len()).any(|i| grow(set, &pts, vec![pts[i].clone()], i, d))
        }
    }
}

/// Depth-first extension of a contained subspace by points of larger index.
fn grow(set: &PointSet, pts: &[Vec<Elem>], rows: Vec<Vec<Elem>>, last: usize, d: usize) -> bool {
    let space = set.space();
    if rows.len() == d + 1 {
        return true;
    }
    let current = space.subspace(rows.clone()).expect("valid rows");
    let tester = space.tester(&current);
    for j in last + 1..pts.len() {
        if tester.contains(&pts[j]) {
            continue;
        }
        let mut next = rows.clone();
        next.push(pts[j].clone());
        let span = space.subspace(next.clone()).expect("valid rows");
        if space.points_of(&span).all(|p| set.contains(&p)) && grow(set, pts, next, j, d) {
            return true;
        }
    }
    false
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct PlanarityVerdict {
    pub span_dim: isize,
    pub planar: bool,
}

/// Projective dimension of the span; planar means at most 2.
pub fn planarity_check(set: &PointSet) -> Result<PlanarityVerdict> {
    if set.is_empty() {
        return Err(Error::Empty("planarity of an empty set"));
    }
    let space = set.space();
    let rows = set.points().map(|p| p.into_coords()).collect();
    let span_dim = space.subspace(rows)?.dim();
    Ok(PlanarityVerdict {
        span_dim,
        planar: span_dim <= 2,
    })
}

/// Intersection-size histogram of some family of subspaces with a set.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq, Eq)]
pub struct SpectrumSummary {
    /// intersection size -> number of members
    pub histogram: BTreeMap<u64, u64>,
    pub violations: u64,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq, Eq)]
pub struct Trivial {
    pub trivial: bool,
    /// Two points spanning a contained line.
    pub line: Option<(u64, u64)>,
}

/// Everything `verify` writes. Sections that were not requested stay empty.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
pub struct VerificationReport {
    pub manifest: serde_json::Value,
    pub sizes: BTreeMap<String, u64>,
    pub blocking: Option<BlockingVerdict>,
    pub minimality: Option<MinimalityVerdict>,
    pub trivial: Option<Trivial>,
    pub planar: Option<PlanarityVerdict>,
    pub spectra: BTreeMap<String, SpectrumSummary>,
    pub timings_ms: BTreeMap<String, u64>,
}

impl VerificationReport {
    /// False when any requested check came out against the set.
    pub fn passed(&self) -> bool {
        self.blocking.as_ref().is_none_or(BlockingVerdict::is_blocking)
            && self.minimality.as_ref().is_none_or(MinimalityVerdict::is_minimal)
            && self.trivial.as_ref().is_none_or(|t| !t.trivial)
            && self.spectra.values().all(|s| s.violations == 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::Field;
    use crate::pg::Subspace;
    use std::sync::Arc;

    fn space(p: u32, k: u32, dim: usize) -> ProjSpace {
        ProjSpace::new(Arc::new(Field::new(p, k, None).unwrap()), dim)
    }

    fn hyperplane_set(s: &ProjSpace, form: Vec<Elem>) -> PointSet {
        let h = Subspace::from_annihilator(s.field(), s.len(), &[form]);
        PointSet::new(s.clone(), s.point_ranks_of(&h)).unwrap()
    }

    #[test]
    fn empty_set_covers_nothing() {
        let s = space(2, 1, 3);
        let (_, v) = blocking_check(&PointSet::empty(s), 1).unwrap();
        assert_eq!(v.total, 15);
        assert_eq!(v.uncovered_count, 15);
    }

    #[test]
    fn hyperplane_blocks_without_essential_points() {
        let s = space(2, 1, 3);
        let set = hyperplane_set(&s, vec![0, 0, 0, 1]);
        let (cov, v) = blocking_check(&set, 1).unwrap();
        assert!(v.is_blocking());
        let m = minimality_check(&set, &cov).unwrap();
        assert!(m.essential.is_empty());
        assert_eq!(m.inessential.len(), 7);
        assert!(triviality_check(&set));
        assert_eq!(planarity_check(&set).unwrap().span_dim, 2);
    }

    #[test]
    fn line_in_plane_is_minimal_and_trivial() {
        let s = space(2, 2, 2);
        let set = hyperplane_set(&s, vec![1, 2, 3]);
        let (cov, v) = blocking_check(&set, 1).unwrap();
        assert!(v.is_blocking());
        let m = minimality_check(&set, &cov).unwrap();
        assert!(m.is_minimal());
        for e in &m.essential {
            let hyp = s.unrank(e.witness);
            assert!(s.incident(&s.unrank(e.point), &hyp));
            assert_eq!(set.points().filter(|p| s.incident(p, &hyp)).count(), 1);
        }
        assert!(contains_subspace(&set, 1));
        assert!(!contains_subspace(&set, 2));
    }

    #[test]
    fn stale_coverage_is_rejected() {
        let s = space(2, 1, 2);
        let a = PointSet::new(s.clone(), vec![0, 1, 2]).unwrap();
        let b = PointSet::new(s, vec![0, 1, 3]).unwrap();
        let cov = coverage(&a, 1).unwrap();
        assert!(matches!(minimality_check(&b, &cov), Err(Error::StaleCoverage)));
    }

    #[test]
    fn small_sets_and_planarity() {
        let s = space(3, 1, 3);
        let one = PointSet::new(s.clone(), vec![17]).unwrap();
        assert_eq!(planarity_check(&one).unwrap().span_dim, 0);
        assert!(!triviality_check(&one));
        assert!(planarity_check(&PointSet::empty(s.clone())).is_err());
        let all = PointSet::new(s.clone(), (0..s.num_points()).collect()).unwrap();
        assert_eq!(planarity_check(&all).unwrap().span_dim, 3);
        assert!(contains_subspace(&all, 3));
    }

    #[test]
    fn plane_minus_point_contains_no_plane() {
        let s = space(2, 1, 4);
        let plane = s
            .subspace(vec![
                vec![1, 0, 0, 0, 0],
                vec![0, 1, 0, 0, 0],
                vec![0, 0, 1, 1, 0],
            ])
            .unwrap();
        let full = PointSet::new(s.clone(), s.point_ranks_of(&plane)).unwrap();
        assert!(contains_subspace(&full, 2));
        let cut = PointSet::new(s.clone(), full.ranks()[1..].to_vec()).unwrap();
        assert!(!contains_subspace(&cut, 2));
        assert!(contains_subspace(&cut, 1));
    }

    #[test]
    fn atomic_and_serial_counts_agree() {
        let s = space(2, 2, 3);
        let set = PointSet::new(s.clone(), (0..85).step_by(3).collect()).unwrap();
        let a = coverage(&set, 1).unwrap();
        let b = coverage(&set, 4).unwrap();
        assert_eq!(a.counts(), b.counts());
        let total: u64 = a.counts().iter().map(|&c| c as u64).sum();
        assert_eq!(total, set.len() as u64 * s.hyperplanes_per_point());
    }
}
