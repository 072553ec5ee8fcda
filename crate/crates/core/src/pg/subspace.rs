use std::sync::Arc;

use super::{combine_rows, Point, ProjSpace};
use crate::gf::{Elem, Field};
use crate::linalg;

/// A projective subspace given by generators in reduced row echelon form.
/// Two equal subspaces have identical generator matrices, so the derived
/// equality, ordering and hashing are those of the subspace itself.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subspace {
    len: usize,
    rows: Vec<Vec<Elem>>,
}

impl Subspace {
    pub(crate) fn from_rows(f: &Field, len: usize, mut rows: Vec<Vec<Elem>>) -> Self {
        linalg::rref(f, &mut rows);
        Subspace { len, rows }
    }

    /// The common zero set of the given linear forms.
    pub fn from_annihilator(f: &Field, len: usize, forms: &[Vec<Elem>]) -> Self {
        Subspace {
            len,
            rows: linalg::nullspace(f, forms, len),
        }
    }

    pub fn empty(len: usize) -> Self {
        Subspace {
            len,
            rows: Vec::new(),
        }
    }

    pub fn from_point(p: &Point) -> Self {
        Subspace {
            len: p.coords().len(),
            rows: vec![p.coords().to_vec()],
        }
    }

    pub fn rows(&self) -> &[Vec<Elem>] {
        &self.rows
    }

    /// Length of the coordinate vectors of the ambient space.
    pub fn ambient_len(&self) -> usize {
        self.len
    }

    /// Projective dimension; -1 for the empty subspace.
    pub fn dim(&self) -> isize {
        self.rows.len() as isize - 1
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// A basis of the linear forms vanishing on the subspace.
    pub fn annihilator(&self, f: &Field) -> Vec<Vec<Elem>> {
        linalg::nullspace(f, &self.rows, self.len)
    }

    pub fn is_within(&self, f: &Field, other: &Subspace) -> bool {
        let forms = other.annihilator(f);
        self.rows
            .iter()
            .all(|r| forms.iter().all(|form| f.dot(form, r) == 0))
    }

    /// The single point of a 0-dimensional subspace.
    pub fn as_point(&self) -> Option<Point> {
        (self.rows.len() == 1).then(|| Point(self.rows[0].clone()))
    }
}

/// Points of a subspace in increasing rank order.
///
/// With generators in reduced echelon form, the coordinate of a combination
/// at the pivot column of row `i` is the `i`-th coefficient, and earlier
/// columns only depend on earlier coefficients. Hence canonical coefficient
/// vectors taken in rank order give the points in rank order.
pub struct SubspacePoints<'a> {
    field: &'a Field,
    rows: &'a [Vec<Elem>],
    local: Option<ProjSpace>,
    next: u64,
    coeffs: Vec<Elem>,
}

impl<'a> SubspacePoints<'a> {
    pub(super) fn new(space: &'a ProjSpace, s: &'a Subspace) -> Self {
        let local = (!s.rows.is_empty()).then(|| ProjSpace::new(space.field().clone(), s.rows.len() - 1));
        SubspacePoints {
            field: space.field(),
            rows: &s.rows,
            local,
            next: 0,
            coeffs: vec![0; s.rows.len()],
        }
    }
}

impl Iterator for SubspacePoints<'_> {
    type Item = Point;

    fn next(&mut self) -> Option<Point> {
        let local = self.local.as_ref()?;
        if self.next >= local.num_points() {
            return None;
        }
        local.unrank_into(self.next, &mut self.coeffs);
        self.next += 1;
        Some(Point(combine_rows(self.field, &self.coeffs, self.rows)))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = self
            .local
            .as_ref()
            .map_or(0, |l| (l.num_points() - self.next) as usize);
        (left, Some(left))
    }
}

/// Membership test against a fixed list of linear forms, `O(forms * len)`
/// per query.
#[derive(Clone, Debug)]
pub struct SubspaceTester {
    field: Arc<Field>,
    forms: Vec<Vec<Elem>>,
}

impl SubspaceTester {
    pub fn new(field: Arc<Field>, forms: Vec<Vec<Elem>>) -> Self {
        SubspaceTester { field, forms }
    }

    pub fn forms(&self) -> &[Vec<Elem>] {
        &self.forms
    }

    #[inline]
    pub fn contains(&self, v: &[Elem]) -> bool {
        self.forms.iter().all(|f| self.field.dot(f, v) == 0)
    }

    pub fn contains_point(&self, p: &Point) -> bool {
        self.contains(p.coords())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn space(p: u32, k: u32, dim: usize) -> ProjSpace {
        ProjSpace::new(Arc::new(Field::new(p, k, None).unwrap()), dim)
    }

    #[test]
    fn span_and_meet_basics() {
        let s = space(2, 2, 3);
        let a = s.unrank(5);
        let b = s.unrank(40);
        assert_eq!(s.span_points(&[&a]).unwrap().dim(), 0);
        let line = s.span_points(&[&a, &b]).unwrap();
        assert_eq!(line.dim(), 1);
        assert_eq!(s.meet(&line, &line), line);
        assert!(s.span(&[]).is_err());
        let h1 = Subspace::from_annihilator(s.field(), 4, &[s.unrank(3).into_coords()]);
        let h2 = Subspace::from_annihilator(s.field(), 4, &[s.unrank(77).into_coords()]);
        assert_eq!(h1.dim(), 2);
        assert_eq!(s.meet(&h1, &h2).dim(), 1);
        let p = s.unrank(0);
        let q = s.unrank(84);
        assert_eq!(
            s.meet(&Subspace::from_point(&p), &Subspace::from_point(&q)).dim(),
            -1
        );
    }

    #[test]
    fn subspace_points_are_sorted_and_complete() {
        let s = space(3, 1, 4);
        let sub = s
            .subspace(vec![
                vec![0, 1, 2, 0, 1],
                vec![1, 0, 0, 2, 2],
                vec![0, 0, 1, 1, 1],
            ])
            .unwrap();
        let pts: Vec<Point> = s.points_of(&sub).collect();
        assert_eq!(pts.len() as u64, s.subspace_size(2));
        assert!(pts.windows(2).all(|w| w[0] < w[1]));
        let tester = s.tester(&sub);
        let brute: Vec<Point> = s.points().filter(|p| s.contains(&sub, p)).collect();
        assert_eq!(pts, brute);
        assert!(brute.iter().all(|p| tester.contains_point(p)));
        assert_eq!(s.points().filter(|p| tester.contains_point(p)).count(), pts.len());
    }

    fn random_subspace(s: &ProjSpace, ranks: &[u64]) -> Subspace {
        let pts: Vec<Point> = ranks.iter().map(|&r| s.unrank(r % s.num_points())).collect();
        let refs: Vec<&Point> = pts.iter().collect();
        s.span_points(&refs).unwrap()
    }

    proptest! {
        #[test]
        fn grassmann_identity(
            a in proptest::collection::vec(0u64..1_000_000, 1..5),
            b in proptest::collection::vec(0u64..1_000_000, 1..5),
        ) {
            let s = space(2, 2, 5);
            let (sa, sb) = (random_subspace(&s, &a), random_subspace(&s, &b));
            let join = s.span(&[&sa, &sb]).unwrap();
            let meet = s.meet(&sa, &sb);
            prop_assert_eq!(sa.dim() + sb.dim(), join.dim() + meet.dim());
            prop_assert!(meet.is_within(s.field(), &sa));
            prop_assert!(meet.is_within(s.field(), &sb));
        }

        #[test]
        fn normalize_is_scale_invariant(r in 0u64..1365, lambda in 1u32..4) {
            let s = space(2, 2, 5);
            let p = s.unrank(r);
            let scaled: Vec<u32> = p.coords().iter().map(|&c| s.field().mul(c, lambda)).collect();
            prop_assert_eq!(s.point(scaled).unwrap(), p);
        }

        #[test]
        fn rank_unrank_inverse(r in 0u64..349_525) {
            let s = space(2, 2, 9);
            prop_assert_eq!(s.rank(&s.unrank(r)), r);
        }
    }
}
