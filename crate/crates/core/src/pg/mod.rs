//! Projective spaces PG(m, q): canonical points, ranking, hyperplanes as dual
//! points, subspaces and point sets.
//!
//! A point is stored by its canonical coordinate vector (leftmost nonzero
//! coordinate equal to 1). Points are ranked in lexicographic order of these
//! vectors, comparing coordinates by their element encoding. Hyperplanes are
//! the points of the dual space with the same normalization, so a hyperplane
//! rank indexes coverage counters directly.

mod pointset;
mod subspace;

pub use pointset::{read_point_set, write_point_set, PointSet};
pub use subspace::{Subspace, SubspacePoints, SubspaceTester};

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::gf::{Elem, Field};

/// A canonical projective point (or, read dually, a hyperplane).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point(Vec<Elem>);

impl Point {
    pub fn coords(&self) -> &[Elem] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<Elem> {
        self.0
    }

    /// Index of the leftmost nonzero coordinate.
    pub fn pivot(&self) -> usize {
        self.0.iter().position(|&c| c != 0).expect("points are nonzero")
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ":")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// PG(dim, q) over a given field.
#[derive(Clone)]
pub struct ProjSpace {
    field: Arc<Field>,
    dim: usize,
    /// `(q^t - 1) / (q - 1)`: number of points whose pivot lies after position `dim - t`.
    offsets: Vec<u64>,
}

impl fmt::Debug for ProjSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PG({}, {})", self.dim, self.field.size())
    }
}

impl PartialEq for ProjSpace {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && (Arc::ptr_eq(&self.field, &other.field) || self.field == other.field)
    }
}

impl ProjSpace {
    pub fn new(field: Arc<Field>, dim: usize) -> Self {
        let q = field.size() as u64;
        let mut pows = vec![1u64];
        let mut offsets = vec![0u64];
        for t in 0..=dim + 1 {
            pows.push(pows[t] * q);
            offsets.push(offsets[t] + pows[t]);
        }
        ProjSpace { field, dim, offsets }
    }

    pub fn field(&self) -> &Arc<Field> {
        &self.field
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Length of coordinate vectors.
    pub fn len(&self) -> usize {
        self.dim + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn q(&self) -> u64 {
        self.field.size() as u64
    }

    /// `(q^{dim+1} - 1) / (q - 1)`, which is also the number of hyperplanes.
    pub fn num_points(&self) -> u64 {
        self.offsets[self.dim + 1]
    }

    /// Number of hyperplanes through a point.
    pub fn hyperplanes_per_point(&self) -> u64 {
        self.offsets[self.dim]
    }

    /// Number of points of a subspace of projective dimension `d`.
    pub fn subspace_size(&self, d: isize) -> u64 {
        if d < 0 {
            0
        } else {
            self.offsets[d as usize + 1]
        }
    }

    fn check_len(&self, v: &[Elem]) -> Result<()> {
        if v.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                found: v.len(),
            });
        }
        for &c in v {
            self.field.check(c)?;
        }
        Ok(())
    }

    /// Scales `v` in place so that its leftmost nonzero coordinate is 1.
    pub fn normalize_in_place(&self, v: &mut [Elem]) -> Result<()> {
        let lead = v.iter().position(|&c| c != 0).ok_or(Error::ZeroVector)?;
        if v[lead] != 1 {
            let inv = self.field.inv_nonzero(v[lead]);
            for c in v[lead..].iter_mut() {
                *c = self.field.mul(*c, inv);
            }
        }
        Ok(())
    }

    /// Canonical point for raw nonzero coordinates.
    pub fn point(&self, coords: Vec<Elem>) -> Result<Point> {
        self.check_len(&coords)?;
        let mut coords = coords;
        self.normalize_in_place(&mut coords)?;
        Ok(Point(coords))
    }

    pub fn is_canonical(&self, v: &[Elem]) -> bool {
        self.check_len(v).is_ok() && v.iter().find(|&&c| c != 0) == Some(&1)
    }

    /// Rank of a canonical vector.
    #[inline]
    pub fn rank_of(&self, v: &[Elem]) -> u64 {
        let n = v.len();
        let i = v
            .iter()
            .position(|&c| c != 0)
            .expect("canonical vectors are nonzero");
        let t = n - 1 - i;
        let q = self.q();
        let tail = v[i + 1..].iter().fold(0u64, |acc, &c| acc * q + c as u64);
        self.offsets[t] + tail
    }

    pub fn rank(&self, p: &Point) -> u64 {
        self.rank_of(&p.0)
    }

    pub fn unrank_into(&self, rank: u64, out: &mut [Elem]) {
        debug_assert!(rank < self.num_points());
        let n = self.len();
        let t = self.offsets.partition_point(|&o| o <= rank) - 1;
        let mut tail = rank - self.offsets[t];
        let q = self.q();
        out.fill(0);
        out[n - 1 - t] = 1;
        for j in (n - t..n).rev() {
            out[j] = (tail % q) as Elem;
            tail /= q;
        }
    }

    pub fn unrank(&self, rank: u64) -> Point {
        let mut v = vec![0; self.len()];
        self.unrank_into(rank, &mut v);
        Point(v)
    }

    /// All points in rank order.
    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.num_points()).map(move |r| self.unrank(r))
    }

    /// All hyperplanes (dual points) in rank order.
    pub fn hyperplanes(&self) -> impl Iterator<Item = Point> + '_ {
        self.points()
    }

    #[inline]
    pub fn incident(&self, pt: &Point, hyp: &Point) -> bool {
        self.field.dot(&pt.0, &hyp.0) == 0
    }

    /// The hyperplanes through `pt`, as dual points.
    pub fn hyperplanes_through(&self, pt: &Point) -> Vec<Point> {
        let mut out = Vec::with_capacity(self.hyperplanes_per_point() as usize);
        self.for_each_hyperplane_through(pt.coords(), |_, h| {
            out.push(Point(h.to_vec()));
            true
        });
        out
    }

    /// Visits every hyperplane through the canonical point `pt` with its rank.
    /// The visitor returns `false` to stop early. Returns whether the scan ran
    /// to completion.
    ///
    /// A hyperplane `h` through `pt` is fixed by its coordinates away from the
    /// pivot `i` of `pt`: `h_i = -sum_{j != i} pt_j h_j`. The free part runs
    /// over the canonical vectors of a space one dimension lower.
    pub fn for_each_hyperplane_through(
        &self,
        pt: &[Elem],
        mut visit: impl FnMut(u64, &[Elem]) -> bool,
    ) -> bool {
        let f = &*self.field;
        let n = self.len();
        let q = f.size();
        let i = pt.iter().position(|&c| c != 0).expect("nonzero point");
        let free: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        let neg_pt: Vec<Elem> = pt.iter().map(|&c| f.neg(c)).collect();
        let mut h = vec![0 as Elem; n];
        let mut scaled = vec![0 as Elem; n];
        for a in 0..free.len() {
            h.fill(0);
            h[free[a]] = 1;
            let tail = &free[a + 1..];
            loop {
                // h_i = -sum pt_j h_j over j > i (pt vanishes before i)
                let mut hi = 0;
                for j in i + 1..n {
                    if h[j] != 0 && neg_pt[j] != 0 {
                        hi = f.add(hi, f.mul(neg_pt[j], h[j]));
                    }
                }
                h[i] = hi;
                let keep_going = if free[a] > i && hi != 0 && hi != 1 {
                    let inv = f.inv_nonzero(hi);
                    for j in 0..n {
                        scaled[j] = f.mul(h[j], inv);
                    }
                    visit(self.rank_of(&scaled), &scaled)
                } else {
                    visit(self.rank_of(&h), &h)
                };
                if !keep_going {
                    return false;
                }
                // advance the odometer over the tail, last coordinate fastest
                let mut advanced = false;
                for &j in tail.iter().rev() {
                    h[j] += 1;
                    if h[j] < q {
                        advanced = true;
                        break;
                    }
                    h[j] = 0;
                }
                if !advanced {
                    break;
                }
            }
        }
        true
    }

    /// The subspace spanned by the given raw vectors.
    pub fn subspace(&self, rows: Vec<Vec<Elem>>) -> Result<Subspace> {
        for r in &rows {
            self.check_len(r)?;
        }
        Ok(Subspace::from_rows(&self.field, self.len(), rows))
    }

    /// The span of a list of points.
    pub fn span_points(&self, pts: &[&Point]) -> Result<Subspace> {
        if pts.is_empty() {
            return Err(Error::Empty("span of no points"));
        }
        self.subspace(pts.iter().map(|p| p.0.clone()).collect())
    }

    /// The span of a list of subspaces.
    pub fn span(&self, items: &[&Subspace]) -> Result<Subspace> {
        if items.is_empty() {
            return Err(Error::Empty("span of no subspaces"));
        }
        let rows = items.iter().flat_map(|s| s.rows().iter().cloned()).collect();
        Ok(Subspace::from_rows(&self.field, self.len(), rows))
    }

    /// Intersection of two subspaces; dimension -1 when they are disjoint.
    pub fn meet(&self, a: &Subspace, b: &Subspace) -> Subspace {
        let mut forms = a.annihilator(&self.field);
        forms.extend(b.annihilator(&self.field));
        Subspace::from_annihilator(&self.field, self.len(), &forms)
    }

    /// `pt` lies in `s` iff appending it leaves the rank unchanged.
    pub fn contains(&self, s: &Subspace, pt: &Point) -> bool {
        let mut rows = s.rows().to_vec();
        rows.push(pt.0.clone());
        crate::linalg::rank(&self.field, &rows) == s.rows().len()
    }

    /// Points of a subspace, in increasing rank order.
    pub fn points_of<'a>(&'a self, s: &'a Subspace) -> SubspacePoints<'a> {
        SubspacePoints::new(self, s)
    }

    pub fn point_ranks_of(&self, s: &Subspace) -> Vec<u64> {
        self.points_of(s).map(|p| self.rank(&p)).collect()
    }

    /// Membership tester through the annihilator of `s`.
    pub fn tester(&self, s: &Subspace) -> SubspaceTester {
        SubspaceTester::new(self.field.clone(), s.annihilator(&self.field))
    }

    /// Hyperplanes (as subspaces) of a subspace of dimension >= 1, e.g. the
    /// lines of a plane. Ordered by the rank of the defining dual point in the
    /// coordinates given by the generator rows of `s`.
    pub fn hyperplanes_of(&self, s: &Subspace) -> Vec<Subspace> {
        let k = s.rows().len();
        assert!(k >= 2, "a subspace of dimension >= 1 is required");
        let local = ProjSpace::new(self.field.clone(), k - 1);
        local
            .points()
            .map(|d| {
                let kernel = crate::linalg::nullspace(&self.field, &[d.0], k);
                let rows = kernel
                    .iter()
                    .map(|c| combine_rows(&self.field, c, s.rows()))
                    .collect();
                Subspace::from_rows(&self.field, self.len(), rows)
            })
            .collect()
    }
}

/// `sum_i c_i rows_i`
pub(crate) fn combine_rows(f: &Field, c: &[Elem], rows: &[Vec<Elem>]) -> Vec<Elem> {
    let n = rows.first().map_or(0, Vec::len);
    let mut out = vec![0; n];
    for (&ci, row) in c.iter().zip(rows) {
        if ci == 0 {
            continue;
        }
        for (o, &x) in out.iter_mut().zip(row) {
            if x != 0 {
                *o = f.add(*o, f.mul(ci, x));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(p: u32, k: u32, dim: usize) -> ProjSpace {
        ProjSpace::new(Arc::new(Field::new(p, k, None).unwrap()), dim)
    }

    #[test]
    fn normalization() {
        let s7 = space(7, 1, 2);
        assert_eq!(s7.point(vec![0, 0, 5]).unwrap().coords(), &[0, 0, 1]);
        let s4 = space(2, 2, 2);
        // omega^{-1} = omega + 1 = 3, omega * 3 = 1, 1 * 3 = 3
        assert_eq!(s4.point(vec![0, 2, 1]).unwrap().coords(), &[0, 1, 3]);
        assert_eq!(s4.point(vec![1, 1, 0]).unwrap().coords(), &[1, 1, 0]);
        assert!(matches!(s4.point(vec![0, 0, 0]), Err(Error::ZeroVector)));
        assert!(s4.point(vec![0, 1]).is_err());
        assert!(s4.point(vec![0, 1, 4]).is_err());
    }

    #[test]
    fn counts() {
        assert_eq!(space(2, 1, 3).num_points(), 15);
        assert_eq!(space(2, 2, 2).num_points(), 21);
        assert_eq!(space(2, 6, 3).num_points(), 266_305);
        assert_eq!(space(2, 6, 3).hyperplanes_per_point(), 4161);
    }

    #[test]
    fn rank_order_is_lexicographic() {
        for s in [space(2, 2, 2), space(3, 1, 3), space(2, 1, 4)] {
            let pts: Vec<Point> = s.points().collect();
            assert!(pts.windows(2).all(|w| w[0] < w[1]));
            for (r, p) in pts.iter().enumerate() {
                assert!(s.is_canonical(p.coords()));
                assert_eq!(s.rank(p), r as u64);
            }
        }
    }

    #[test]
    fn incidence() {
        let s = space(2, 6, 3);
        let pt = s.point(vec![1, 0, 0, 0]).unwrap();
        assert!(s.incident(&pt, &s.point(vec![0, 0, 0, 1]).unwrap()));
        assert!(!s.incident(&pt, &s.point(vec![1, 0, 0, 0]).unwrap()));
        let hyp = s.unrank(12345);
        let mut count = 0;
        let mut v = vec![0; 4];
        for r in 0..s.num_points() {
            s.unrank_into(r, &mut v);
            if s.field().dot(&v, hyp.coords()) == 0 {
                count += 1;
            }
        }
        assert_eq!(count, 4161);
    }

    #[test]
    fn hyperplanes_through_points() {
        for s in [space(2, 1, 3), space(2, 2, 3), space(3, 1, 2), space(5, 1, 3)] {
            for pt in s.points() {
                let hs = s.hyperplanes_through(&pt);
                assert_eq!(hs.len() as u64, s.hyperplanes_per_point());
                let mut ranks: Vec<u64> = hs.iter().map(|h| s.rank(h)).collect();
                for h in &hs {
                    assert!(s.is_canonical(h.coords()));
                    assert!(s.incident(&pt, h));
                }
                ranks.sort();
                ranks.dedup();
                assert_eq!(ranks.len() as u64, s.hyperplanes_per_point());
            }
        }
        let s = space(2, 1, 3);
        assert_eq!(s.hyperplanes_through(&s.unrank(3)).len(), 7);
    }

    #[test]
    fn early_stop() {
        let s = space(2, 2, 3);
        let mut seen = 0;
        let done = s.for_each_hyperplane_through(s.unrank(7).coords(), |_, _| {
            seen += 1;
            seen < 5
        });
        assert!(!done);
        assert_eq!(seen, 5);
    }

    #[test]
    fn lines_of_a_plane() {
        let s = space(2, 2, 3);
        let plane = s
            .subspace(vec![vec![1, 0, 0, 0], vec![0, 1, 0, 0], vec![0, 0, 1, 0]])
            .unwrap();
        let lines = s.hyperplanes_of(&plane);
        assert_eq!(lines.len(), 21);
        let mut sorted = lines.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 21);
        for l in &lines {
            assert_eq!(l.dim(), 1);
            assert_eq!(s.meet(l, &plane), *l);
        }
    }
}
