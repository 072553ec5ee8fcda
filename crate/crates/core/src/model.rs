//! Field-reduction spreads and the Barlotti-Cofman representation of
//! PG(r, q1^n) inside PG(rn, q1).
//!
//! Coordinates of PG(rn, q1) are `r` blocks of `n` sub-field coordinates
//! followed by one extra coordinate; the hyperplane at infinity is the set of
//! points whose last coordinate is zero. A big-field vector `(x_0, ..,
//! x_{r-1})` is reduced block-wise through [`BlowupBasis::coords`].

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf::{prime_power, BlowupBasis, Elem, Field, SubfieldEmbedding};
use crate::pg::{Point, ProjSpace, Subspace};

/// A point of the represented space, seen from inside PG(rn, q1).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BcItem {
    /// A point of PG(rn, q1) off the hyperplane at infinity.
    Affine(Point),
    /// A spread element, by the rank of its big-field point in PG(r-1, q1^n).
    Spread(u64),
}

/// Manifest of a model for reports.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelManifest {
    pub q1: u32,
    pub n: usize,
    pub r: usize,
    pub small_field: String,
    pub big_field: String,
    pub basis: Vec<Elem>,
}

pub struct BcModel {
    small: Arc<Field>,
    big: Arc<Field>,
    basis: BlowupBasis,
    n: usize,
    r: usize,
    ambient: ProjSpace,
    pg: ProjSpace,
    infinity: ProjSpace,
    /// Blow-up matrix of every big-field element.
    blow: Vec<Vec<Vec<Elem>>>,
}

impl std::fmt::Debug for BcModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "BcModel(PG({}, {}) in PG({}, {}))",
            self.r,
            self.big.size(),
            self.r * self.n,
            self.small.size()
        )
    }
}

impl BcModel {
    /// The model of PG(r, q1^n) with default moduli and the power basis.
    pub fn new(q1: u32, n: usize, r: usize) -> Result<Self> {
        let (p, a) =
            prime_power(q1).ok_or_else(|| Error::InvalidField(format!("{q1} is not a prime power")))?;
        if n < 1 || r < 1 {
            return Err(Error::Precondition("n and r must be positive".into()));
        }
        let small = Arc::new(Field::new(p, a, None)?);
        let big = Arc::new(Field::new(p, a * n as u32, None)?);
        let basis = BlowupBasis::power(SubfieldEmbedding::new(small, big)?)?;
        BcModel::with_basis(basis, r)
    }

    pub fn with_basis(basis: BlowupBasis, r: usize) -> Result<Self> {
        let small = basis.embedding().sub().clone();
        let big = basis.embedding().sup().clone();
        let n = basis.len();
        let blow = (0..big.size())
            .map(|a| basis.blowup_matrix(a))
            .collect::<Result<Vec<_>>>()?;
        Ok(BcModel {
            ambient: ProjSpace::new(small.clone(), r * n),
            pg: ProjSpace::new(big.clone(), r),
            infinity: ProjSpace::new(big.clone(), r - 1),
            small,
            big,
            basis,
            n,
            r,
            blow,
        })
    }

    pub fn small(&self) -> &Arc<Field> {
        &self.small
    }

    pub fn big(&self) -> &Arc<Field> {
        &self.big
    }

    pub fn basis(&self) -> &BlowupBasis {
        &self.basis
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn q1(&self) -> u32 {
        self.small.size()
    }

    /// PG(rn, q1).
    pub fn ambient(&self) -> &ProjSpace {
        &self.ambient
    }

    /// PG(r, q1^n), the represented space.
    pub fn pg(&self) -> &ProjSpace {
        &self.pg
    }

    /// PG(r-1, q1^n), whose points index the spread elements.
    pub fn spread_index_space(&self) -> &ProjSpace {
        &self.infinity
    }

    pub fn manifest(&self) -> ModelManifest {
        ModelManifest {
            q1: self.q1(),
            n: self.n,
            r: self.r,
            small_field: self.small.descriptor(),
            big_field: self.big.descriptor(),
            basis: self.basis.elements().to_vec(),
        }
    }

    pub fn num_spread_elements(&self) -> u64 {
        self.infinity.num_points()
    }

    /// The hyperplane at infinity of PG(rn, q1).
    pub fn sigma(&self) -> Subspace {
        let len = self.ambient.len();
        let mut form = vec![0; len];
        form[len - 1] = 1;
        Subspace::from_annihilator(&self.small, len, &[form])
    }

    #[inline]
    pub fn is_affine(&self, v: &[Elem]) -> bool {
        v[v.len() - 1] != 0
    }

    /// The affine point with all block coordinates zero.
    pub fn origin(&self) -> Point {
        let mut v = vec![0; self.ambient.len()];
        v[self.r * self.n] = 1;
        self.ambient.point(v).expect("nonzero")
    }

    /// The spread element of a big-field point of PG(r-1, q1^n).
    pub fn spread_element(&self, index: u64) -> Subspace {
        let x = self.infinity.unrank(index);
        let len = self.ambient.len();
        let rows = self
            .basis
            .elements()
            .iter()
            .map(|&b| {
                let mut row = vec![0; len];
                for (i, &xi) in x.coords().iter().enumerate() {
                    let c = self.basis.coords(self.big.mul(b, xi));
                    row[i * self.n..(i + 1) * self.n].copy_from_slice(c);
                }
                row
            })
            .collect();
        self.ambient.subspace(rows).expect("valid coordinates")
    }

    fn reconstitute(&self, blocks: &[Elem]) -> Vec<Elem> {
        blocks.chunks(self.n).map(|c| self.basis.combine(c)).collect()
    }

    /// Index of the spread element through a point at infinity.
    pub fn spread_element_of(&self, pt: &Point) -> Result<u64> {
        let v = pt.coords();
        if v.len() != self.ambient.len() {
            return Err(Error::LengthMismatch {
                expected: self.ambient.len(),
                found: v.len(),
            });
        }
        if self.is_affine(v) {
            return Err(Error::NotAtInfinity);
        }
        let x = self.reconstitute(&v[..self.r * self.n]);
        Ok(self.infinity.rank(&self.infinity.point(x)?))
    }

    /// Point of PG(r, q1^n) represented by an affine point or a spread element.
    pub fn bc_to_pg(&self, item: &BcItem) -> Result<Point> {
        match item {
            BcItem::Affine(pt) => {
                let v = pt.coords();
                if v.len() != self.ambient.len() {
                    return Err(Error::LengthMismatch {
                        expected: self.ambient.len(),
                        found: v.len(),
                    });
                }
                if !self.is_affine(v) {
                    return Err(Error::NotAffine);
                }
                let w_inv = self.small.inv_nonzero(v[v.len() - 1]);
                let scaled: Vec<Elem> = v[..self.r * self.n]
                    .iter()
                    .map(|&c| self.small.mul(c, w_inv))
                    .collect();
                let mut x = self.reconstitute(&scaled);
                x.push(1);
                self.pg.point(x)
            }
            BcItem::Spread(index) => {
                if *index >= self.num_spread_elements() {
                    return Err(Error::Precondition(format!("no spread element {index}")));
                }
                let mut x = self.infinity.unrank(*index).into_coords();
                x.push(0);
                self.pg.point(x)
            }
        }
    }

    /// Inverse of [`BcModel::bc_to_pg`].
    pub fn pg_to_bc(&self, pt: &Point) -> Result<BcItem> {
        let x = pt.coords();
        if x.len() != self.pg.len() {
            return Err(Error::LengthMismatch {
                expected: self.pg.len(),
                found: x.len(),
            });
        }
        if x[self.r] == 0 {
            let p = self.infinity.point(x[..self.r].to_vec())?;
            return Ok(BcItem::Spread(self.infinity.rank(&p)));
        }
        let inv = self.big.inv_nonzero(x[self.r]);
        let mut v = Vec::with_capacity(self.ambient.len());
        for &xi in &x[..self.r] {
            v.extend_from_slice(self.basis.coords(self.big.mul(xi, inv)));
        }
        v.push(1);
        Ok(BcItem::Affine(self.ambient.point(v)?))
    }

    /// The `n` sub-field linear forms whose common zero set represents the
    /// hyperplane `h` of PG(r, q1^n): the big-field form `sum h_i x_i`
    /// expanded through the blow-up matrices.
    pub fn hyperplane_forms(&self, h: &[Elem]) -> Vec<Vec<Elem>> {
        debug_assert_eq!(h.len(), self.r + 1);
        let len = self.ambient.len();
        let last = self.basis.coords(h[self.r]);
        (0..self.n)
            .map(|l| {
                let mut row = vec![0; len];
                for (i, &hi) in h[..self.r].iter().enumerate() {
                    row[i * self.n..(i + 1) * self.n].copy_from_slice(&self.blow[hi as usize][l]);
                }
                row[len - 1] = last[l];
                row
            })
            .collect()
    }

    /// The subspace of PG(rn, q1) representing the hyperplane `h`; of
    /// dimension (r-1)n unless `h` is the hyperplane at infinity.
    pub fn hyperplane_blowup(&self, h: &Point) -> Subspace {
        Subspace::from_annihilator(
            &self.small,
            self.ambient.len(),
            &self.hyperplane_forms(h.coords()),
        )
    }

    /// Spread elements meeting a line at infinity that is not inside one element.
    pub fn regulus_of_line(&self, line: &Subspace) -> Result<Vec<u64>> {
        if line.dim() != 1 {
            return Err(Error::Precondition(format!(
                "expected a line, got dimension {}",
                line.dim()
            )));
        }
        let mut out = self
            .ambient
            .points_of(line)
            .map(|p| self.spread_element_of(&p))
            .collect::<Result<Vec<_>>>()?;
        out.sort_unstable();
        out.dedup();
        if out.len() == 1 {
            return Err(Error::Degenerate("the line lies inside a spread element".into()));
        }
        Ok(out)
    }

    /// The full spread, materialized.
    pub fn spread_build(&self) -> Spread {
        let sigma_space = ProjSpace::new(self.small.clone(), self.r * self.n - 1);
        let mut lookup = vec![u32::MAX; sigma_space.num_points() as usize];
        let mut elements = Vec::with_capacity(self.num_spread_elements() as usize);
        for idx in 0..self.num_spread_elements() {
            let e = self.spread_element(idx);
            for p in self.ambient.points_of(&e) {
                let v = &p.coords()[..self.r * self.n];
                lookup[sigma_space.rank_of(v) as usize] = idx as u32;
            }
            elements.push(e);
        }
        Spread {
            sigma_space,
            elements,
            lookup,
        }
    }
}

/// A desarguesian spread with an explicit point-to-element table.
#[derive(Debug)]
pub struct Spread {
    sigma_space: ProjSpace,
    elements: Vec<Subspace>,
    lookup: Vec<u32>,
}

impl Spread {
    pub fn elements(&self) -> &[Subspace] {
        &self.elements
    }

    /// The hyperplane at infinity as a space in its own coordinates.
    pub fn sigma_space(&self) -> &ProjSpace {
        &self.sigma_space
    }

    /// Element index for a point at infinity given by its first `rn` coordinates.
    pub fn element_of(&self, v: &[Elem]) -> Option<u64> {
        let idx = self.lookup[self.sigma_space.rank_of(v) as usize];
        (idx != u32::MAX).then_some(idx as u64)
    }

    /// Points of the hyperplane at infinity not covered by any element.
    pub fn uncovered(&self) -> usize {
        self.lookup.iter().filter(|&&i| i == u32::MAX).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_spreads_partition() {
        for (q1, n, r) in [(2, 2, 2), (2, 3, 2), (3, 2, 2), (2, 2, 3), (4, 3, 3)] {
            let m = BcModel::new(q1, n, r).unwrap();
            let spread = m.spread_build();
            let expected = (q1 as u64).pow((r * n) as u32) - 1;
            assert_eq!(
                spread.elements().len() as u64,
                expected / ((q1 as u64).pow(n as u32) - 1)
            );
            assert_eq!(spread.uncovered(), 0);
            let total: u64 = spread
                .elements()
                .iter()
                .map(|e| {
                    assert_eq!(e.dim(), n as isize - 1);
                    m.ambient().subspace_size(e.dim())
                })
                .sum();
            assert_eq!(total, spread.sigma_space().num_points());
            if spread.elements().len() <= 100 {
                for (i, a) in spread.elements().iter().enumerate() {
                    for b in &spread.elements()[i + 1..] {
                        assert_eq!(m.ambient().meet(a, b).dim(), -1);
                    }
                }
            }
        }
        let m = BcModel::new(2, 2, 2).unwrap();
        assert_eq!(m.spread_build().elements().len(), 5);
    }

    #[test]
    fn table_agrees_with_direct_lookup() {
        let m = BcModel::new(2, 2, 3).unwrap();
        let spread = m.spread_build();
        for (idx, e) in spread.elements().iter().enumerate() {
            for p in m.ambient().points_of(e) {
                assert_eq!(m.spread_element_of(&p).unwrap(), idx as u64);
                assert_eq!(spread.element_of(&p.coords()[..6]), Some(idx as u64));
            }
        }
        assert!(matches!(
            m.spread_element_of(&m.origin()),
            Err(Error::NotAtInfinity)
        ));
    }

    #[test]
    fn origin_and_round_trips() {
        let m = BcModel::new(2, 2, 2).unwrap();
        let origin = m.bc_to_pg(&BcItem::Affine(m.origin())).unwrap();
        assert_eq!(origin.coords(), &[0, 0, 1]);
        for p in m.pg().points() {
            let item = m.pg_to_bc(&p).unwrap();
            assert_eq!(m.bc_to_pg(&item).unwrap(), p);
        }
        let inf = m.spread_element(0);
        let pt = m.ambient().points_of(&inf).next().unwrap();
        assert!(matches!(m.bc_to_pg(&BcItem::Affine(pt)), Err(Error::NotAffine)));
    }

    #[test]
    fn blowup_dimension_and_affine_count() {
        let m = BcModel::new(4, 3, 3).unwrap();
        let h = m.pg().unrank(100_000);
        let s = m.hyperplane_blowup(&h);
        assert_eq!(s.dim(), 6);
        let affine = m
            .ambient()
            .points_of(&s)
            .filter(|p| m.is_affine(p.coords()))
            .count();
        assert_eq!(affine, 4usize.pow(6));
    }

    #[test]
    fn regulus_of_lines() {
        let m = BcModel::new(4, 3, 3).unwrap();
        let a = m.ambient().points_of(&m.spread_element(0)).next().unwrap();
        let b = m.ambient().points_of(&m.spread_element(1)).next().unwrap();
        let line = m.ambient().span_points(&[&a, &b]).unwrap();
        let reg = m.regulus_of_line(&line).unwrap();
        assert_eq!(reg.len(), 5);
        let testers: Vec<_> = reg
            .iter()
            .map(|&i| m.ambient().tester(&m.spread_element(i)))
            .collect();
        for t in &testers {
            assert!(m.ambient().points_of(&line).any(|p| t.contains_point(&p)));
        }
        let inside: Vec<Point> = m.ambient().points_of(&m.spread_element(3)).take(2).collect();
        let bad = m.ambient().span_points(&[&inside[0], &inside[1]]).unwrap();
        assert!(matches!(m.regulus_of_line(&bad), Err(Error::Degenerate(_))));
    }
}
