//! The generalized cone construction.
//!
//! Fix a spread element `X`, a subspace `Omega` of `X` of dimension
//! `s <= n - 2`, a subspace `Gamma'` of PG(rn, q1) of dimension `rn - s - 1`
//! meeting the hyperplane at infinity in `Gamma` (disjoint from `Omega`), and
//! put `Theta = Gamma ∩ X`. For a set `B̄ ⊆ Gamma'` with `B̄ ∩ Σ = Theta`, the
//! cone with vertex `Omega` over `B̄`, read in the represented space and
//! completed by the point `X`, is a blocking set of PG(r, q1^n) whenever `B̄`
//! meets every member `<S, Omega> ∩ Gamma'` of the family attached to the
//! hyperplanes `S` not through `X`.

use std::sync::Arc;

use rand::seq::index::sample;
use rand::SeedableRng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf::Elem;
use crate::linalg;
use crate::model::{BcItem, BcModel};
use crate::pg::{Point, PointSet, ProjSpace, Subspace, SubspaceTester};
use crate::verify;

/// Hyperplane ranks per parallel work item.
pub(crate) const CHUNK: u64 = 4096;

pub struct MpsFrame {
    model: Arc<BcModel>,
    x_index: u64,
    x: Subspace,
    x_point: Point,
    omega: Subspace,
    gamma: Subspace,
    gamma_prime: Subspace,
    theta: Subspace,
    gamma_prime_tester: SubspaceTester,
}

impl std::fmt::Debug for MpsFrame {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MpsFrame")
            .field("model", &self.model)
            .field("x_index", &self.x_index)
            .field("s", &self.s())
            .finish()
    }
}

impl MpsFrame {
    /// Deterministic frame: `X` is spread element 0, `Omega` is spanned by the
    /// first `s + 1` echelon rows of `X`, `Gamma` by the unit vectors at the
    /// non-pivot columns of `Omega` inside the hyperplane at infinity, and
    /// `Gamma'` adds the origin.
    pub fn new(model: Arc<BcModel>, s: usize) -> Result<Self> {
        MpsFrame::with_x(model, 0, s)
    }

    pub fn with_x(model: Arc<BcModel>, x_index: u64, s: usize) -> Result<Self> {
        let n = model.n();
        if s + 2 > n {
            return Err(Error::Precondition(format!(
                "need s <= n - 2, got s = {s}, n = {n}"
            )));
        }
        if x_index >= model.num_spread_elements() {
            return Err(Error::Precondition(format!("no spread element {x_index}")));
        }
        let x = model.spread_element(x_index);
        let amb = model.ambient();
        let omega = amb.subspace(x.rows()[..=s].to_vec())?;
        let pivots: Vec<usize> = omega
            .rows()
            .iter()
            .map(|r| r.iter().position(|&c| c != 0).expect("nonzero"))
            .collect();
        let len = amb.len();
        let mut rows: Vec<Vec<Elem>> = (0..len - 1)
            .filter(|j| !pivots.contains(j))
            .map(|j| {
                let mut e = vec![0; len];
                e[j] = 1;
                e
            })
            .collect();
        rows.push(model.origin().into_coords());
        let gamma_prime = amb.subspace(rows)?;
        MpsFrame::from_parts(model, x_index, omega, gamma_prime)
    }

    /// Validates an explicit choice of `Omega` and `Gamma'`.
    pub fn from_parts(
        model: Arc<BcModel>,
        x_index: u64,
        omega: Subspace,
        gamma_prime: Subspace,
    ) -> Result<Self> {
        let amb = model.ambient().clone();
        let f = amb.field().clone();
        let (n, r) = (model.n() as isize, model.r() as isize);
        let x = model.spread_element(x_index);
        let s = omega.dim();
        if s < 0 || s > n - 2 {
            return Err(Error::Frame(format!("Omega has dimension {s}, need 0..=n-2")));
        }
        if !omega.is_within(&f, &x) {
            return Err(Error::Frame("Omega is not inside X".into()));
        }
        if gamma_prime.dim() != r * n - s - 1 {
            return Err(Error::Frame(format!(
                "Gamma' has dimension {}, need {}",
                gamma_prime.dim(),
                r * n - s - 1
            )));
        }
        let gamma = amb.meet(&gamma_prime, &model.sigma());
        if gamma.dim() != r * n - s - 2 {
            return Err(Error::Frame(
                "Gamma' lies inside the hyperplane at infinity".into(),
            ));
        }
        if amb.meet(&gamma, &omega).dim() != -1 {
            return Err(Error::Frame("Gamma meets Omega".into()));
        }
        let theta = amb.meet(&gamma, &x);
        if theta.dim() != n - s - 2 {
            return Err(Error::Frame(format!(
                "Theta has dimension {}, need {}",
                theta.dim(),
                n - s - 2
            )));
        }
        let x_point = model.bc_to_pg(&BcItem::Spread(x_index))?;
        let gamma_prime_tester = amb.tester(&gamma_prime);
        Ok(MpsFrame {
            model,
            x_index,
            x,
            x_point,
            omega,
            gamma,
            gamma_prime,
            theta,
            gamma_prime_tester,
        })
    }

    pub fn model(&self) -> &Arc<BcModel> {
        &self.model
    }

    pub fn ambient(&self) -> &ProjSpace {
        self.model.ambient()
    }

    pub fn s(&self) -> usize {
        self.omega.dim() as usize
    }

    pub fn x_index(&self) -> u64 {
        self.x_index
    }

    pub fn x(&self) -> &Subspace {
        &self.x
    }

    /// `X` as a point of PG(r, q1^n).
    pub fn x_point(&self) -> &Point {
        &self.x_point
    }

    pub fn omega(&self) -> &Subspace {
        &self.omega
    }

    pub fn gamma(&self) -> &Subspace {
        &self.gamma
    }

    pub fn gamma_prime(&self) -> &Subspace {
        &self.gamma_prime
    }

    pub fn theta(&self) -> &Subspace {
        &self.theta
    }

    pub fn theta_points(&self) -> PointSet {
        PointSet::new(self.ambient().clone(), self.ambient().point_ranks_of(&self.theta))
            .expect("ranks in range")
    }

    pub fn in_gamma_prime(&self, p: &Point) -> bool {
        self.gamma_prime_tester.contains_point(p)
    }

    /// Number of hyperplanes of PG(r, q1^n) not through `X`.
    pub fn family_size(&self) -> u64 {
        let pg = self.model.pg();
        pg.num_points() - pg.hyperplanes_per_point()
    }

    /// The family member attached to hyperplane `h` (by rank), or `None` when
    /// `h` passes through `X`.
    pub fn family_member(&self, h: u64) -> Option<FamilyMember> {
        let pg = self.model.pg();
        let hyp = pg.unrank(h);
        if pg.incident(&self.x_point, &hyp) {
            return None;
        }
        let forms = self.model.hyperplane_forms(hyp.coords());
        Some(FamilyMember {
            hyperplane: h,
            forms: forms_through(&self.model, &forms, &self.omega),
        })
    }

    /// All family members in hyperplane-rank order.
    pub fn family_enumerate(&self) -> impl Iterator<Item = FamilyMember> + '_ {
        (0..self.model.pg().num_points()).filter_map(move |h| self.family_member(h))
    }

    /// The member as a subspace of `Gamma'`.
    pub fn member_subspace(&self, m: &FamilyMember) -> Subspace {
        let amb = self.ambient();
        let span = Subspace::from_annihilator(amb.field(), amb.len(), &m.forms);
        amb.meet(&span, &self.gamma_prime)
    }
}

/// Linear forms cutting out `<S, W>`, where `S` is the zero set of `forms`
/// (full row rank) and `W` a subspace disjoint from it: the combinations
/// `c · forms` that also vanish on the generators of `W`.
pub(crate) fn forms_through(model: &BcModel, forms: &[Vec<Elem>], w: &Subspace) -> Vec<Vec<Elem>> {
    let f = model.small();
    let images: Vec<Vec<Elem>> = w.rows().iter().map(|g| linalg::mat_vec(f, forms, g)).collect();
    // c must be orthogonal to every image vector
    linalg::nullspace(f, &images, forms.len())
        .iter()
        .map(|c| crate::pg::combine_rows(f, c, forms))
        .collect()
}

/// A member `<S, Omega> ∩ Gamma'` of the family, held as the linear forms of
/// `<S, Omega>`; membership of a point of `Gamma'` is one evaluation per form.
#[derive(Clone, Debug)]
pub struct FamilyMember {
    pub hyperplane: u64,
    pub forms: Vec<Vec<Elem>>,
}

impl FamilyMember {
    #[inline]
    pub fn contains(&self, f: &crate::gf::Field, v: &[Elem]) -> bool {
        self.forms.iter().all(|form| f.dot(form, v) == 0)
    }
}

/// Cone with vertex `vertex` over `base`: the union of `<vertex, b>`.
pub fn cone(space: &ProjSpace, vertex: &Subspace, base: &PointSet) -> Result<PointSet> {
    if base.is_empty() {
        return Err(Error::Empty("cone base"));
    }
    let mut ranks = space.point_ranks_of(vertex);
    for b in base.points() {
        let s = space.span(&[vertex, &Subspace::from_point(&b)])?;
        ranks.extend(space.points_of(&s).map(|p| space.rank(&p)));
    }
    PointSet::new(space.clone(), ranks)
}

/// `(|B̄| - (q1^{n-s-1} - 1)/(q1 - 1)) q1^{s+1} + 1`.
pub fn mps_size_predict(bbar_size: u64, q1: u64, n: u32, s: u32) -> u64 {
    let theta = (q1.pow(n - s - 1) - 1) / (q1 - 1);
    assert!(bbar_size >= theta, "B̄ must contain Theta");
    (bbar_size - theta) * q1.pow(s + 1) + 1
}

fn check_bbar(frame: &MpsFrame, bbar: &PointSet) -> Result<()> {
    if bbar.space() != frame.ambient() {
        return Err(Error::Precondition("B̄ does not live in PG(rn, q1)".into()));
    }
    if let Some(p) = bbar.points().find(|p| !frame.in_gamma_prime(p)) {
        return Err(Error::Precondition(format!("{p} of B̄ is not in Gamma'")));
    }
    let at_infinity = bbar.filter(|p| !frame.model.is_affine(p.coords()));
    if at_infinity != frame.theta_points() {
        return Err(Error::Precondition(
            "B̄ meets the hyperplane at infinity outside Theta (or misses part of it)".into(),
        ));
    }
    Ok(())
}

/// The blocking set of PG(r, q1^n): affine points of the cone over `B̄` plus
/// the spread elements it meets at infinity (only `X`).
pub fn mps_build(frame: &MpsFrame, bbar: &PointSet) -> Result<PointSet> {
    check_bbar(frame, bbar)?;
    let model = &frame.model;
    let k = cone(frame.ambient(), &frame.omega, bbar)?;
    let mut ranks = Vec::with_capacity(k.len());
    let mut elements = Vec::new();
    for p in k.points() {
        if model.is_affine(p.coords()) {
            ranks.push(model.pg().rank(&model.bc_to_pg(&BcItem::Affine(p))?));
        } else {
            elements.push(model.spread_element_of(&p)?);
        }
    }
    elements.sort_unstable();
    elements.dedup();
    for e in elements {
        ranks.push(model.pg().rank(&model.bc_to_pg(&BcItem::Spread(e))?));
    }
    PointSet::new(model.pg().clone(), ranks)
}

/// Outcome of checking a set against every family member.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct FBlockingReport {
    pub family_size: u64,
    pub covered: u64,
    /// Hyperplane ranks of members missed by the set.
    pub violations: Vec<u64>,
    /// Members meeting the set in exactly one point.
    pub tangent_members: u64,
    pub correspondence: Option<CorrespondenceCheck>,
}

/// Comparison of `|B ∩ S|` in the represented space with `|(B̄ \ X) ∩ I|`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CorrespondenceCheck {
    pub sampled: u64,
    pub mismatches: u64,
}

impl FBlockingReport {
    pub fn is_blocking(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Counts `|(B̄ \ X) ∩ I|` for every member `I`. When `B̄ ∩ Σ = Theta` the
/// counts are also compared with the intersection sizes of the built set
/// with the corresponding hyperplanes, on up to 1000 members.
pub fn f_blocking_check(frame: &MpsFrame, bbar: &PointSet) -> Result<FBlockingReport> {
    if let Some(p) = bbar.points().find(|p| !frame.in_gamma_prime(p)) {
        return Err(Error::Precondition(format!("{p} of B̄ is not in Gamma'")));
    }
    let f = frame.ambient().field().clone();
    let x_tester = frame.ambient().tester(&frame.x);
    let pts: Vec<Point> = bbar.points().filter(|p| !x_tester.contains_point(p)).collect();
    let count = |m: &FamilyMember| pts.iter().filter(|p| m.contains(&f, p.coords())).count() as u64;

    let total = frame.model.pg().num_points();
    let chunks = total.div_ceil(CHUNK);
    let (covered, tangent, mut violations) = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let (mut covered, mut tangent, mut missed) = (0u64, 0u64, Vec::new());
            for h in c * CHUNK..((c + 1) * CHUNK).min(total) {
                if let Some(m) = frame.family_member(h) {
                    match count(&m) {
                        0 => missed.push(h),
                        1 => {
                            covered += 1;
                            tangent += 1
                        }
                        _ => covered += 1,
                    }
                }
            }
            (covered, tangent, missed)
        })
        .reduce(
            || (0, 0, Vec::new()),
            |mut a, b| {
                a.2.extend(b.2);
                (a.0 + b.0, a.1 + b.1, a.2)
            },
        );
    violations.sort_unstable();

    let correspondence = if check_bbar(frame, bbar).is_ok() && !bbar.is_empty() {
        let b = mps_build(frame, bbar)?;
        let b_pts: Vec<Point> = b.points().collect();
        let pg = frame.model.pg();
        let members: Vec<u64> = (0..total)
            .filter(|&h| !pg.incident(&frame.x_point, &pg.unrank(h)))
            .collect();
        let chosen: Vec<u64> = if members.len() <= 1000 {
            members
        } else {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
            let mut idx = sample(&mut rng, members.len(), 1000).into_vec();
            idx.sort_unstable();
            idx.into_iter().map(|i| members[i]).collect()
        };
        let mismatches = chosen
            .iter()
            .filter(|&&h| {
                let hyp = pg.unrank(h);
                let in_pi = b_pts.iter().filter(|p| pg.incident(p, &hyp)).count() as u64;
                in_pi != count(&frame.family_member(h).expect("not through X"))
            })
            .count() as u64;
        Some(CorrespondenceCheck {
            sampled: chosen.len() as u64,
            mismatches,
        })
    } else {
        None
    };

    Ok(FBlockingReport {
        family_size: frame.family_size(),
        covered,
        violations,
        tangent_members: tangent,
        correspondence,
    })
}

/// An exhaustively found set `B̄ = Theta ∪ A` with `A` affine.
#[derive(Clone, Debug)]
pub struct FBlockingSet {
    pub bbar: PointSet,
    /// `B̄ \ X` is inclusion-minimal among family-blocking sets.
    pub minimal: bool,
    /// `B̄` contains a subspace of dimension `n - s - 1`.
    pub trivial: bool,
}

/// Every family-blocking `B̄` with `B̄ ∩ Σ = Theta` and `|B̄| <= max_size`,
/// ordered by size and then lexicographically by the ranks of the affine part.
pub fn f_search_blocking(frame: &MpsFrame, max_size: usize) -> Result<Vec<FBlockingSet>> {
    let amb = frame.ambient();
    let npoints = amb.subspace_size(frame.gamma_prime.dim());
    if npoints > 40 {
        return Err(Error::TooLarge(format!(
            "Gamma' has {npoints} points, limit is 40"
        )));
    }
    let candidates: Vec<Point> = amb
        .points_of(&frame.gamma_prime)
        .filter(|p| frame.model.is_affine(p.coords()))
        .collect();
    let f = amb.field().clone();
    let mut masks: Vec<u64> = frame
        .family_enumerate()
        .map(|m| {
            candidates
                .iter()
                .enumerate()
                .filter(|(_, p)| m.contains(&f, p.coords()))
                .fold(0u64, |acc, (i, _)| acc | 1 << i)
        })
        .collect();
    masks.sort_unstable();
    masks.dedup();
    let blocks = |a: u64| masks.iter().all(|&m| m & a != 0);

    let theta = frame.theta_points();
    let trivial_dim = frame.model.n() - frame.s() - 1;
    let max_affine = max_size.saturating_sub(theta.len()).min(candidates.len());
    let mut out = Vec::new();
    for size in 0..=max_affine {
        for combo in Combinations::new(candidates.len(), size) {
            let a = combo.iter().fold(0u64, |acc, &i| acc | 1 << i);
            if !blocks(a) {
                continue;
            }
            let minimal = combo.iter().all(|&i| !blocks(a & !(1 << i)));
            let bbar = theta.union(&PointSet::from_points(
                amb.clone(),
                combo.iter().map(|&i| &candidates[i]),
            ));
            let trivial = verify::contains_subspace(&bbar, trivial_dim);
            out.push(FBlockingSet {
                bbar,
                minimal,
                trivial,
            });
        }
    }
    Ok(out)
}

/// The inclusion-minimal sets among [`f_search_blocking`].
pub fn f_search_minimal(frame: &MpsFrame, max_size: usize) -> Result<Vec<FBlockingSet>> {
    Ok(f_search_blocking(frame, max_size)?
        .into_iter()
        .filter(|s| s.minimal)
        .collect())
}

/// For a single-point `Theta = {t}`: the lines `L` of `Gamma'` through `t`
/// with `L \ {t} ⊆ B̄`. `None` when `Theta` is not a point.
pub fn side_condition_violations(frame: &MpsFrame, bbar: &PointSet) -> Option<Vec<Subspace>> {
    let t = frame.theta.as_point()?;
    let amb = frame.ambient();
    let mut lines: Vec<Subspace> = bbar
        .points()
        .filter(|b| *b != t)
        .filter_map(|b| {
            let line = amb.span_points(&[&t, &b]).ok()?;
            amb.points_of(&line)
                .all(|p| p == t || bbar.contains(&p))
                .then_some(line)
        })
        .collect();
    lines.sort();
    lines.dedup();
    Some(lines)
}

/// k-subsets of `0..n` in lexicographic order.
pub(crate) struct Combinations {
    n: usize,
    idx: Vec<usize>,
    done: bool,
}

impl Combinations {
    pub(crate) fn new(n: usize, k: usize) -> Self {
        Combinations {
            n,
            idx: (0..k).collect(),
            done: k > n,
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.idx.clone();
        let k = self.idx.len();
        let mut i = k;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.idx[i] < self.n - k + i {
                self.idx[i] += 1;
                for j in i + 1..k {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> MpsFrame {
        MpsFrame::new(Arc::new(BcModel::new(2, 2, 2).unwrap()), 0).unwrap()
    }

    #[test]
    fn combinations_are_lexicographic() {
        let all: Vec<Vec<usize>> = Combinations::new(4, 2).collect();
        assert_eq!(
            all,
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![0, 3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3]
            ]
        );
        assert_eq!(Combinations::new(3, 0).count(), 1);
        assert_eq!(Combinations::new(2, 3).count(), 0);
    }

    #[test]
    fn tiny_frame_shape() {
        let frame = tiny();
        assert_eq!(frame.gamma_prime().dim(), 3);
        assert_eq!(frame.theta().dim(), 0);
        assert_eq!(frame.ambient().meet(frame.gamma(), frame.omega()).dim(), -1);
        assert_eq!(frame.family_size(), 16);
        assert_eq!(frame.family_enumerate().count(), 16);
        for m in frame.family_enumerate() {
            assert_eq!(frame.member_subspace(&m).dim(), 2);
        }
    }

    #[test]
    fn larger_frame_shape() {
        let frame = MpsFrame::new(Arc::new(BcModel::new(4, 3, 3).unwrap()), 0).unwrap();
        assert_eq!(frame.gamma_prime().dim(), 8);
        assert_eq!(frame.theta().dim(), 1);
        assert_eq!(frame.theta_points().len(), 5);
        let amb = frame.ambient();
        assert_eq!(amb.span(&[frame.gamma_prime(), frame.omega()]).unwrap().dim(), 9);
        assert_eq!(
            amb.meet(frame.gamma_prime(), &frame.model().sigma()),
            *frame.gamma()
        );
    }

    #[test]
    fn frame_validation() {
        let model = Arc::new(BcModel::new(2, 2, 2).unwrap());
        assert!(MpsFrame::new(model.clone(), 1).is_err());
        let frame = tiny();
        // Gamma' inside Σ is rejected
        let bad = MpsFrame::from_parts(model.clone(), 0, frame.omega().clone(), model.sigma());
        assert!(bad.is_err());
        // Omega outside X is rejected
        let other = model.spread_element(1);
        let omega = model.ambient().subspace(vec![other.rows()[0].clone()]).unwrap();
        assert!(MpsFrame::from_parts(model, 0, omega, frame.gamma_prime().clone()).is_err());
    }

    #[test]
    fn cone_counts() {
        let space = ProjSpace::new(Arc::new(crate::gf::Field::new(2, 2, None).unwrap()), 3);
        let v = space.point(vec![0, 0, 0, 1]).unwrap();
        let plane = Subspace::from_annihilator(space.field(), 4, &[vec![0, 0, 0, 1]]);
        let base_pts: Vec<Point> = space.points_of(&plane).take(5).collect();
        let base = PointSet::from_points(space.clone(), &base_pts);
        let k = cone(&space, &Subspace::from_point(&v), &base).unwrap();
        assert_eq!(k.len(), 21);
        let single = PointSet::from_points(space.clone(), &base_pts[..1]);
        let line = cone(&space, &Subspace::from_point(&v), &single).unwrap();
        let expect = space.span_points(&[&v, &base_pts[0]]).unwrap();
        assert_eq!(line.ranks(), &space.point_ranks_of(&expect)[..]);
        assert!(cone(&space, &Subspace::from_point(&v), &PointSet::empty(space.clone())).is_err());
    }

    #[test]
    fn size_prediction() {
        assert_eq!(mps_size_predict(58, 4, 3, 0), 213);
        assert_eq!(mps_size_predict(4, 2, 2, 0), 7);
        assert_eq!(mps_size_predict(5, 4, 3, 0), 1);
        // s = n - 2 reduces to q1^{n-1}(|B̄| - 1) + 1
        for b in 1..20u64 {
            assert_eq!(mps_size_predict(b, 3, 4, 2), 27 * (b - 1) + 1);
        }
    }

    #[test]
    fn empty_set_blocks_nothing() {
        let frame = tiny();
        let rep = f_blocking_check(&frame, &PointSet::empty(frame.ambient().clone())).unwrap();
        assert_eq!(rep.violations.len(), 16);
        assert_eq!(rep.covered, 0);
        assert!(rep.correspondence.is_none());
    }

    #[test]
    fn build_rejects_bad_bbar() {
        let frame = tiny();
        let amb = frame.ambient();
        let affine: Vec<Point> = amb
            .points_of(frame.gamma_prime())
            .filter(|p| frame.model().is_affine(p.coords()))
            .take(3)
            .collect();
        // missing Theta
        let no_theta = PointSet::from_points(amb.clone(), &affine);
        assert!(mps_build(&frame, &no_theta).is_err());
        let ok = frame.theta_points().union(&no_theta);
        let b = mps_build(&frame, &ok).unwrap();
        assert_eq!(b.len() as u64, mps_size_predict(4, 2, 2, 0));
    }
}
