//! A non-planar minimal blocking set of PG(3, q^6).
//!
//! Everything lives in the model PG(9, q^2) of PG(3, q^6). With `X`, `X'`
//! spread elements, `p ∈ X`, and `Gamma'` a hyperplane of PG(9, q^2) whose
//! trace `Gamma` at infinity contains `X'` but not `p`, the set `B̄ ∪ B̃` of
//! `Gamma'` is built from a Baer cone (`B̄`) and three affine planes (`B̃`).
//! The cone with vertex `p` over it, plus the point `X`, is the blocking set.
//!
//! All existential choices are resolved by least-rank search; `seed` only
//! rotates the choice of `X'`, `p`, `t` and the start of the Baer frame
//! search, so different seeds give different but equally valid frames.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf::{Elem, Field};
use crate::model::BcModel;
use crate::mps::{self, cone, mps_build, mps_size_predict, FamilyMember, MpsFrame, CHUNK};
use crate::pg::{Point, PointSet, ProjSpace, Subspace, SubspaceTester};
use crate::verify::SpectrumSummary;

/// The part of the frame fixed before the Baer subplane is chosen.
#[derive(Clone, Debug)]
pub struct Frame36 {
    pub q: u32,
    pub seed: u64,
    pub model: Arc<BcModel>,
    pub x_index: u64,
    pub x_prime_index: u64,
    pub x: Subspace,
    pub x_prime: Subspace,
    pub p: Point,
    pub t: Point,
    /// The linear form (last coefficient 0) whose kernel is `Gamma'`.
    pub gamma_form: Vec<Elem>,
    pub gamma: Subspace,
    pub gamma_prime: Subspace,
    pub theta: Subspace,
    pub r_pt: Point,
    pub q_tilde: Point,
    /// The plane `<t, q̃, origin>` of `Gamma'`.
    pub pi: Subspace,
}

impl Frame36 {
    pub fn ambient(&self) -> &ProjSpace {
        self.model.ambient()
    }
}

fn rotate<T: Clone>(items: &[T], seed: u64) -> Result<T> {
    if items.is_empty() {
        return Err(Error::Frame("empty candidate list".into()));
    }
    Ok(items[(seed % items.len() as u64) as usize].clone())
}

/// Sets up `X`, `X'`, `p`, `t`, `Gamma`, `Gamma'`, `Theta = <r, q̃>` and `pi`.
pub fn frame36_make(q: u32, seed: u64) -> Result<Frame36> {
    let q1 = q
        .checked_mul(q)
        .ok_or_else(|| Error::TooLarge(format!("q = {q}")))?;
    let model = Arc::new(BcModel::new(q1, 3, 3)?);
    let amb = model.ambient().clone();
    let f = amb.field().clone();
    let len = amb.len();

    let x_index = 0;
    let x_prime_index = 1 + seed % (model.num_spread_elements() - 1);
    let x = model.spread_element(x_index);
    let x_prime = model.spread_element(x_prime_index);
    let p = rotate(&amb.points_of(&x).collect::<Vec<_>>(), seed)?;
    let t = rotate(&amb.points_of(&x_prime).collect::<Vec<_>>(), seed)?;

    // Forms on Σ vanishing on X', least rank first; keep the first missing p.
    let sigma_len = len - 1;
    let sigma_space = ProjSpace::new(f.clone(), sigma_len - 1);
    let x_prime_rows: Vec<Vec<Elem>> = x_prime.rows().iter().map(|r| r[..sigma_len].to_vec()).collect();
    let ann = Subspace::from_annihilator(&f, sigma_len, &x_prime_rows);
    let form = sigma_space
        .points_of(&ann)
        .find(|g| f.dot(g.coords(), &p.coords()[..sigma_len]) != 0)
        .ok_or_else(|| Error::Frame("no hyperplane of Σ through X' avoids p".into()))?;
    let mut gamma_form = form.into_coords();
    gamma_form.push(0);
    let gamma_prime = Subspace::from_annihilator(&f, len, &[gamma_form.clone()]);
    let gamma = amb.meet(&gamma_prime, &model.sigma());
    let theta = amb.meet(&gamma, &x);
    let theta_pts: Vec<Point> = amb.points_of(&theta).take(2).collect();
    let [r_pt, q_tilde] =
        <[Point; 2]>::try_from(theta_pts).map_err(|_| Error::Frame("Theta is not a line".into()))?;
    let pi = amb.span_points(&[&t, &q_tilde, &model.origin()])?;

    let frame = Frame36 {
        q,
        seed,
        model,
        x_index,
        x_prime_index,
        x,
        x_prime,
        p,
        t,
        gamma_form,
        gamma,
        gamma_prime,
        theta,
        r_pt,
        q_tilde,
        pi,
    };
    check(amb.contains(&frame.x, &frame.p), "p lies in X")?;
    check(frame.x_prime.is_within(&f, &frame.gamma), "X' lies in Gamma")?;
    check(!amb.contains(&frame.gamma, &frame.p), "p is not in Gamma")?;
    check(
        frame.gamma.dim() == 7 && frame.gamma_prime.dim() == 8,
        "dim Gamma = 7, dim Gamma' = 8",
    )?;
    check(frame.theta.dim() == 1, "Theta is a line")?;
    check(frame.pi.dim() == 2, "pi is a plane")?;
    check(
        amb.meet(&frame.pi, &frame.model.sigma()) == amb.span_points(&[&frame.t, &frame.q_tilde])?,
        "pi meets Σ in <t, q̃>",
    )?;
    Ok(frame)
}

fn check(ok: bool, what: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Frame(format!("invariant failed: {what}")))
    }
}

/// Elements of the subfield of order `q` in a field of order `q^2`.
pub fn baer_subfield(f: &Field, q: u32) -> Vec<Elem> {
    (0..f.size()).filter(|&a| f.pow(a, q as u64) == a).collect()
}

/// A Baer subplane: the points `c0 v0 + c1 v1 + c2 v2` with subfield
/// coefficients.
#[derive(Clone, Debug)]
pub struct BaerSubplane {
    pub basis: [Vec<Elem>; 3],
    pub points: PointSet,
}

fn subplane(space: &ProjSpace, sub: &[Elem], basis: &[Vec<Elem>; 3]) -> PointSet {
    let f = space.field();
    let mut ranks = Vec::new();
    let mut c = vec![0u32; 3];
    let base = sub.len() as u32;
    loop {
        if c.iter().any(|&ci| ci != 0) {
            let coeffs: Vec<Elem> = c.iter().map(|&i| sub[i as usize]).collect();
            let v = crate::pg::combine_rows(f, &coeffs, basis);
            let mut v = v;
            space.normalize_in_place(&mut v).expect("independent basis");
            ranks.push(space.rank_of(&v));
        }
        if !crate::gf::odometer(&mut c, base) {
            break;
        }
    }
    PointSet::new(space.clone(), ranks).expect("ranks in range")
}

/// A Baer subplane of `pi` through `q_tilde` meeting `tangent` only there.
/// The frame `(q̃, v1, v2)` is the first admissible pair of points of `pi` in
/// rank order, starting the scan of `v1` at an offset given by `seed`.
pub fn baer_subplane(
    space: &ProjSpace,
    q: u32,
    pi: &Subspace,
    q_tilde: &Point,
    tangent: &Subspace,
    seed: u64,
) -> Result<BaerSubplane> {
    if !space.contains(pi, q_tilde) || !tangent.is_within(space.field(), pi) {
        return Err(Error::Precondition(
            "q̃ and the tangent line must lie in pi".into(),
        ));
    }
    let sub = baer_subfield(space.field(), q);
    if sub.len() as u32 != q {
        return Err(Error::Precondition(format!("no subfield of order {q}")));
    }
    let pts: Vec<Point> = space.points_of(pi).collect();
    let tangent_tester = space.tester(tangent);
    let start = (seed % pts.len() as u64) as usize;
    for k in 0..pts.len() {
        let v1 = &pts[(start + k) % pts.len()];
        if tangent_tester.contains_point(v1) {
            continue;
        }
        let line = space.span_points(&[q_tilde, v1])?;
        for v2 in pts.iter().filter(|v| !space.contains(&line, v)) {
            let basis = [
                q_tilde.coords().to_vec(),
                v1.coords().to_vec(),
                v2.coords().to_vec(),
            ];
            let points = subplane(space, &sub, &basis);
            let on_tangent = points.filter(|p| tangent_tester.contains_point(p));
            if on_tangent.len() == 1 && on_tangent.contains(q_tilde) {
                return Ok(BaerSubplane { basis, points });
            }
        }
    }
    Err(Error::Frame("no Baer subplane with the required tangent".into()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LineClass {
    Real,
    Imaginary,
}

fn classify(count: usize, q: u32) -> Result<LineClass> {
    match count {
        1 => Ok(LineClass::Imaginary),
        c if c == q as usize + 1 => Ok(LineClass::Real),
        c => Err(Error::Violation(format!(
            "a line meets the Baer set in {c} points, expected 1 or {}",
            q + 1
        ))),
    }
}

/// Real (`q + 1` common points) or imaginary (one) with respect to `set`.
pub fn line_class(space: &ProjSpace, line: &Subspace, set: &PointSet, q: u32) -> Result<(LineClass, usize)> {
    let count = space.points_of(line).filter(|p| set.contains(p)).count();
    Ok((classify(count, q)?, count))
}

/// The same classification for a line of the cone's 3-space with respect to
/// the cone with vertex `vertex`; the line must avoid the vertex.
pub fn cone_line_class(
    space: &ProjSpace,
    line: &Subspace,
    vertex: &Point,
    cone_set: &PointSet,
    q: u32,
) -> Result<(LineClass, usize)> {
    if space.contains(line, vertex) {
        return Err(Error::Precondition(
            "the line passes through the cone vertex".into(),
        ));
    }
    line_class(space, line, cone_set, q)
}

/// The unique line of `pi` through `u ∉ V` that meets `V` in `q + 1` points.
pub fn real_line_through(
    space: &ProjSpace,
    pi: &Subspace,
    u: &Point,
    v: &PointSet,
    q: u32,
) -> Result<Subspace> {
    if v.contains(u) {
        return Err(Error::Precondition(format!("{u} lies in the Baer subplane")));
    }
    let mut real = Vec::new();
    for line in space.hyperplanes_of(pi) {
        if space.contains(&line, u) && line_class(space, &line, v, q)?.0 == LineClass::Real {
            real.push(line);
        }
    }
    match real.len() {
        1 => Ok(real.pop().expect("one element")),
        k => Err(Error::Violation(format!("{k} real lines through {u}"))),
    }
}

/// `B̄`: the cone with vertex `r` over `(V \ L) ∪ {s}`, with `s` the
/// least-rank point of `V ∩ L`. Returns `(s, B̄)`.
pub fn bbar_build(frame: &Frame36, v: &PointSet, l: &Subspace) -> Result<(Point, PointSet)> {
    let amb = frame.ambient();
    let on_l = v.filter(|p| amb.contains(l, p));
    let s_pt = on_l
        .points()
        .next()
        .ok_or_else(|| Error::Frame("L misses V".into()))?;
    let base = v
        .difference(&on_l)
        .union(&PointSet::from_points(amb.clone(), [&s_pt]));
    let bbar = cone(amb, &Subspace::from_point(&frame.r_pt), &base)?;
    Ok((s_pt, bbar))
}

/// The point `t̃` of `X'` and the evidence for it.
#[derive(Clone, Debug)]
pub struct TTilde {
    /// `X' ∩ l`, where `l` is the transversal through `p` of the regulus of
    /// `<t, r>`.
    pub point: Point,
    /// Points `y` of `X' \ {t}` such that `<p, S>` meets `<t, r>` for every
    /// spread element `S ⊆ <X, X'>` with `y ∈ <p, S>`.
    pub qualifiers: Vec<Point>,
    /// Points `y` of `X' \ {t}` such that `S` itself meets `<t, r>` for every
    /// such `S`.
    pub strict_qualifiers: Vec<Point>,
    /// Spread elements meeting `<t, r>`, by index.
    pub regulus: Vec<u64>,
    /// Whether the line `<p, t̃>` meets exactly the elements of `regulus`.
    pub transversal_agrees: bool,
}

impl TTilde {
    /// The defining scan singles out `t̃` and nothing else.
    pub fn unique(&self) -> bool {
        self.qualifiers == [self.point.clone()]
    }
}

/// Spread elements inside `<X, X'>`, i.e. on the big-field line `XX'`.
pub fn elements_of_join(model: &BcModel, a: u64, b: u64) -> Result<Vec<u64>> {
    let inf = model.spread_index_space();
    let line = inf.span_points(&[&inf.unrank(a), &inf.unrank(b)])?;
    Ok(inf.point_ranks_of(&line))
}

/// Locates `t̃` through the regulus of `<t, r>` and runs the defining scan
/// over `X' \ {t}` next to it.
pub fn t_tilde_find(frame: &Frame36) -> Result<TTilde> {
    let amb = frame.ambient();
    let model = &frame.model;
    let p_sub = Subspace::from_point(&frame.p);
    let tr = amb.span_points(&[&frame.t, &frame.r_pt])?;
    let regulus = model.regulus_of_line(&tr)?;

    struct Join {
        tester: SubspaceTester,
        cone_meets: bool,
        element_meets: bool,
    }
    let joins: Vec<Join> = elements_of_join(model, frame.x_index, frame.x_prime_index)?
        .into_iter()
        .map(|e| {
            let span = amb.span(&[&p_sub, &model.spread_element(e)])?;
            Ok(Join {
                cone_meets: amb.meet(&span, &tr).dim() >= 0,
                element_meets: regulus.contains(&e),
                tester: amb.tester(&span),
            })
        })
        .collect::<Result<_>>()?;
    let scan = |strict: bool| -> Vec<Point> {
        amb.points_of(&frame.x_prime)
            .filter(|y| *y != frame.t)
            .filter(|y| {
                joins.iter().filter(|j| j.tester.contains_point(y)).all(|j| {
                    if strict {
                        j.element_meets
                    } else {
                        j.cone_meets
                    }
                })
            })
            .collect()
    };
    let qualifiers = scan(false);
    let strict_qualifiers = scan(true);

    let mut hits = Vec::new();
    for &e in &regulus {
        if e == frame.x_index || e == frame.x_prime_index {
            continue;
        }
        let span = amb.span(&[&p_sub, &model.spread_element(e)])?;
        hits.push(amb.meet(&span, &frame.x_prime));
    }
    hits.dedup();
    let point = match &hits[..] {
        [m] if m.dim() == 0 => m.as_point().expect("a point"),
        _ => {
            return Err(Error::Violation(
                "the regulus of <t, r> has no transversal through p meeting X'".into(),
            ))
        }
    };
    let transversal = amb.span_points(&[&frame.p, &point])?;
    let transversal_agrees = model.regulus_of_line(&transversal)? == regulus;
    Ok(TTilde {
        point,
        qualifiers,
        strict_qualifiers,
        regulus,
        transversal_agrees,
    })
}

/// `B̃`: the affine part of the cone with vertex `h` over three lines of `X'`.
/// The lines are the first triple (in the order of [`ProjSpace::hyperplanes_of`])
/// avoiding `t` and `t̃` with no common point; `h` is the least-rank affine
/// point of `Gamma'` outside `<X, X', V>`. Returns `(h, lines, B̃)`.
pub fn btilde_build(
    frame: &Frame36,
    v: &PointSet,
    t_tilde: &Point,
) -> Result<(Point, [Subspace; 3], PointSet)> {
    let amb = frame.ambient();
    let model = &frame.model;
    let mut rows: Vec<Vec<Elem>> = frame.x.rows().to_vec();
    rows.extend(frame.x_prime.rows().iter().cloned());
    rows.extend(v.points().map(Point::into_coords));
    let avoid = amb.tester(&amb.subspace(rows)?);
    let h = amb
        .points_of(&frame.gamma_prime)
        .find(|c| model.is_affine(c.coords()) && !avoid.contains_point(c))
        .ok_or_else(|| Error::Frame("Gamma' lies inside <X, X', V>".into()))?;

    let lines: Vec<Subspace> = amb
        .hyperplanes_of(&frame.x_prime)
        .into_iter()
        .filter(|l| !amb.contains(l, &frame.t) && !amb.contains(l, t_tilde))
        .collect();
    let triple = mps::Combinations::new(lines.len(), 3)
        .find(|c| {
            let m = amb.meet(&amb.meet(&lines[c[0]], &lines[c[1]]), &lines[c[2]]);
            m.dim() == -1
        })
        .ok_or_else(|| Error::Frame("no admissible triple of lines in X'".into()))?;
    let chosen = [
        lines[triple[0]].clone(),
        lines[triple[1]].clone(),
        lines[triple[2]].clone(),
    ];
    let base_ranks: Vec<u64> = chosen.iter().flat_map(|l| amb.point_ranks_of(l)).collect();
    let base = PointSet::new(amb.clone(), base_ranks)?;
    let btilde = cone(amb, &Subspace::from_point(&h), &base)?.filter(|c| model.is_affine(c.coords()));
    Ok((h, chosen, btilde))
}

/// The complete example.
pub struct Example36 {
    pub frame: Frame36,
    pub baer: BaerSubplane,
    /// The real line of `pi` through `t`.
    pub l: Subspace,
    pub s_pt: Point,
    pub t_tilde: TTilde,
    pub h: Point,
    pub lines: [Subspace; 3],
    pub bbar: PointSet,
    pub btilde: PointSet,
    /// The blocking set of PG(3, q^6), including the point `X`.
    pub b: PointSet,
    pub mps: MpsFrame,
}

/// `4q^6 - 3q^4 + q^2 + 1`.
pub fn example_size(q: u64) -> u64 {
    4 * q.pow(6) - 3 * q.pow(4) + q.pow(2) + 1
}

/// Builds the example and checks every frame invariant and cardinality.
pub fn example_build(q: u32, seed: u64) -> Result<Example36> {
    let frame = frame36_make(q, seed)?;
    let amb = frame.ambient().clone();
    let model = frame.model.clone();
    let f = amb.field().clone();
    let qq = q as u64;

    let tangent = amb.span_points(&[&frame.t, &frame.q_tilde])?;
    let baer = baer_subplane(&amb, q, &frame.pi, &frame.q_tilde, &tangent, seed)?;
    let v = &baer.points;
    check(v.len() as u64 == qq * qq + qq + 1, "|V| = q^2 + q + 1")?;
    for line in amb.hyperplanes_of(&frame.pi) {
        line_class(&amb, &line, v, q)?;
    }
    check(!v.contains(&frame.t), "t is not in V")?;

    let l = real_line_through(&amb, &frame.pi, &frame.t, v, q)?;
    let (s_pt, bbar) = bbar_build(&frame, v, &l)?;
    check(model.is_affine(s_pt.coords()), "s is affine")?;
    let t_tilde = t_tilde_find(&frame)?;
    let (h, lines, btilde) = btilde_build(&frame, v, &t_tilde.point)?;

    for li in &lines {
        check(
            !amb.contains(li, &frame.t) && !amb.contains(li, &t_tilde.point),
            "t and t̃ avoid the lines",
        )?;
    }
    let planes: Vec<Subspace> = lines
        .iter()
        .map(|li| amb.span(&[&Subspace::from_point(&h), li]))
        .collect::<Result<_>>()?;
    for i in 0..3 {
        for j in i + 1..3 {
            let m = amb.meet(&planes[i], &planes[j]);
            check(
                m.dim() == 1 && amb.contains(&m, &h),
                "the planes <h, Li> meet in lines through h",
            )?;
        }
    }

    let bbar_affine = bbar.filter(|c| model.is_affine(c.coords()));
    let theta_set = PointSet::new(amb.clone(), amb.point_ranks_of(&frame.theta))?;
    check(bbar.difference(&bbar_affine) == theta_set, "B̄ meets Σ in Theta")?;
    check(btilde.points().all(|c| model.is_affine(c.coords())), "B̃ misses Σ")?;
    check(bbar.intersection(&btilde).is_empty(), "B̄ and B̃ are disjoint")?;
    check(bbar_affine.len() as u64 == qq.pow(4), "|B̄ \\ Σ| = q^4")?;
    check(
        btilde.len() as u64 == 3 * qq.pow(4) - 3 * qq.pow(2) + 1,
        "|B̃| = 3q^4 - 3q^2 + 1",
    )?;

    let mps = MpsFrame::from_parts(
        model.clone(),
        frame.x_index,
        Subspace::from_point(&frame.p),
        frame.gamma_prime.clone(),
    )?;
    check(*mps.gamma() == frame.gamma, "the cone frame has the same Gamma")?;
    let base = bbar.union(&btilde);
    let b = mps_build(&mps, &base)?;
    let predicted = mps_size_predict(base.len() as u64, model.q1() as u64, 3, 0);
    check(
        b.len() as u64 == predicted,
        "|B| agrees with the cone size formula",
    )?;
    check(b.len() as u64 == example_size(qq), "|B| = 4q^6 - 3q^4 + q^2 + 1")?;
    check(f.size() == q * q, "small field has order q^2")?;

    Ok(Example36 {
        frame,
        baer,
        l,
        s_pt,
        t_tilde,
        h,
        lines,
        bbar,
        btilde,
        b,
        mps,
    })
}

impl Example36 {
    pub fn ambient(&self) -> &ProjSpace {
        self.frame.ambient()
    }

    /// `B̄ ∪ B̃`, the base of the final cone.
    pub fn base(&self) -> PointSet {
        self.bbar.union(&self.btilde)
    }

    /// Whether a member of the family contains `X'` (the subfamily `H_t`).
    pub fn in_h_t(&self, m: &FamilyMember) -> bool {
        let f = self.ambient().field();
        self.frame.x_prime.rows().iter().all(|r| m.contains(f, r))
    }

    pub fn manifest(&self) -> FrameManifest {
        let amb = self.ambient();
        let rank = |p: &Point| amb.rank(p);
        let line = |s: &Subspace| amb.point_ranks_of(s);
        FrameManifest {
            q: self.frame.q,
            seed: self.frame.seed,
            x: self.frame.x_index,
            x_prime: self.frame.x_prime_index,
            x_pg: self.frame.model.pg().rank(self.mps.x_point()),
            p: rank(&self.frame.p),
            t: rank(&self.frame.t),
            t_tilde: rank(&self.t_tilde.point),
            r: rank(&self.frame.r_pt),
            q_tilde: rank(&self.frame.q_tilde),
            s: rank(&self.s_pt),
            h: rank(&self.h),
            gamma_form: self.frame.gamma_form.clone(),
            pi: line(&self.frame.pi),
            v: self.baer.points.ranks().to_vec(),
            l: line(&self.l),
            lines: self.lines.iter().map(line).collect(),
            regulus: self.t_tilde.regulus.clone(),
        }
    }
}

/// Ranks (in PG(9, q^2), or spread indices for `x`, `x_prime`, `regulus`) of
/// every choice made by the construction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameManifest {
    pub q: u32,
    pub seed: u64,
    pub x: u64,
    pub x_prime: u64,
    /// `X` as a point of PG(3, q^6).
    pub x_pg: u64,
    pub p: u64,
    pub t: u64,
    pub t_tilde: u64,
    pub r: u64,
    pub q_tilde: u64,
    pub s: u64,
    pub h: u64,
    pub gamma_form: Vec<Elem>,
    pub pi: Vec<u64>,
    pub v: Vec<u64>,
    pub l: Vec<u64>,
    pub lines: Vec<Vec<u64>>,
    pub regulus: Vec<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Bbar,
    Btilde,
}

impl std::str::FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bbar" => Ok(Target::Bbar),
            "btilde" => Ok(Target::Btilde),
            other => Err(Error::Parse(format!(
                "unknown target {other:?}, use bbar or btilde"
            ))),
        }
    }
}

/// An out-of-range observation, with the offending hyperplane of PG(3, q^6).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectrumViolation {
    pub hyperplane: u64,
    pub dual: String,
    pub what: String,
}

/// Intersection sizes of the family members with `B̄` or `B̃`, split by
/// whether the member contains `X'`, plus the dimension facts behind them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub target: Target,
    pub members: u64,
    pub members_t: u64,
    pub histogram: BTreeMap<u64, u64>,
    pub histogram_t: BTreeMap<u64, u64>,
    pub histogram_not_t: BTreeMap<u64, u64>,
    /// Members whose meet with the span of the target passed the line checks.
    pub dimension_checks: u64,
    /// Real lines through `t` checked to lie in `<t, r, s>` (target `B̄`).
    pub real_lines_through_t: u64,
    pub violations: Vec<SpectrumViolation>,
}

impl SpectrumReport {
    pub fn summary(&self) -> SpectrumSummary {
        SpectrumSummary {
            histogram: self.histogram.clone(),
            violations: self.violations.len() as u64,
        }
    }
}

pub(crate) fn run_in_pool<T: Send>(workers: usize, job: impl FnOnce() -> T + Send) -> Result<T> {
    if workers == 0 {
        return Ok(job());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Precondition(format!("thread pool: {e}")))?;
    Ok(pool.install(job))
}

/// Runs `visit` on every family member, in parallel over hyperplane ranges,
/// and returns the per-member outputs in rank order.
fn scan_family<T: Send>(
    ex: &Example36,
    workers: usize,
    visit: impl Fn(&FamilyMember, bool) -> T + Sync,
) -> Result<Vec<T>> {
    let total = ex.frame.model.pg().num_points();
    let chunks = total.div_ceil(CHUNK);
    run_in_pool(workers, || {
        let parts: Vec<Vec<T>> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut items = Vec::new();
                for h in c * CHUNK..((c + 1) * CHUNK).min(total) {
                    if let Some(m) = ex.mps.family_member(h) {
                        let t = ex.in_h_t(&m);
                        items.push(visit(&m, t));
                    }
                }
                items
            })
            .collect();
        parts.into_iter().flatten().collect()
    })
}

/// Checks the intersection spectrum of every family member with `B̄` or `B̃`.
/// `workers = 0` uses the ambient rayon pool.
pub fn spectrum_scan(ex: &Example36, target: Target, workers: usize) -> Result<SpectrumReport> {
    let amb = ex.ambient();
    let f = amb.field().clone();
    let model = &ex.frame.model;
    let q = ex.frame.q as u64;
    let set = match target {
        Target::Bbar => &ex.bbar,
        Target::Btilde => &ex.btilde,
    };
    let pts: Vec<Point> = set.points().collect();
    let span = amb.subspace(pts.iter().map(|p| p.coords().to_vec()).collect())?;
    let span_forms = span.annihilator(&f);
    let cone_rv = cone(amb, &Subspace::from_point(&ex.frame.r_pt), &ex.baer.points)?;
    let trs = amb.span_points(&[&ex.frame.t, &ex.frame.r_pt, &ex.s_pt])?;
    let sigma = model.sigma();
    let btilde_len = ex.btilde.len() as u64;
    let allowed: Vec<u64> = match target {
        Target::Bbar => vec![0, 1, q, q + 1],
        Target::Btilde => vec![0, 1, 2, 3, q * q, btilde_len],
    };

    struct Obs {
        hyperplane: u64,
        in_t: bool,
        count: u64,
        dim_ok: bool,
        real_through_t: bool,
        problems: Vec<String>,
    }

    let observations = scan_family(ex, workers, |m, in_t| {
        let count = pts.iter().filter(|p| m.contains(&f, p.coords())).count() as u64;
        let mut problems = Vec::new();
        if !allowed.contains(&count) {
            problems.push(format!("|S7 ∩ {target:?}| = {count}"));
        }
        let mut forms = m.forms.clone();
        forms.extend(span_forms.iter().cloned());
        let meet = Subspace::from_annihilator(&f, amb.len(), &forms);
        let mut real_through_t = false;
        let dim_ok = match target {
            Target::Bbar => {
                let line_ok = meet.dim() == 1 && !meet.is_within(&f, &sigma);
                if !line_ok {
                    problems.push(format!("S7 ∩ S3 has dimension {}", meet.dim()));
                } else if in_t {
                    if !amb.contains(&meet, &ex.frame.t) {
                        problems.push("S7 ∩ S3 misses t".into());
                    }
                    match cone_line_class(amb, &meet, &ex.frame.r_pt, &cone_rv, q as u32) {
                        Ok((LineClass::Real, _)) => {
                            real_through_t = true;
                            if !meet.is_within(&f, &trs) {
                                problems.push("real line through t outside <t, r, s>".into());
                            }
                        }
                        Ok(_) => {}
                        Err(e) => problems.push(e.to_string()),
                    }
                }
                line_ok
            }
            Target::Btilde => {
                if in_t {
                    let ok = meet == span || meet == ex.frame.x_prime;
                    if !ok {
                        problems.push("S7 ∩ <B̃> is neither <B̃> nor X'".into());
                    }
                    if count != 0 && count != btilde_len {
                        problems.push(format!("|S7 ∩ B̃| = {count} on a member containing X'"));
                    }
                    ok
                } else {
                    let ok = meet.dim() == 1 && !meet.is_within(&f, &sigma);
                    if !ok {
                        problems.push(format!("S7 ∩ <B̃> has dimension {}", meet.dim()));
                    }
                    if ![1, 2, 3, q * q].contains(&count) {
                        problems.push(format!("|S7 ∩ B̃| = {count} on a member missing X'"));
                    }
                    ok
                }
            }
        };
        Obs {
            hyperplane: m.hyperplane,
            in_t,
            count,
            dim_ok,
            real_through_t,
            problems,
        }
    })?;

    let pg = model.pg();
    let mut report = SpectrumReport {
        target,
        members: 0,
        members_t: 0,
        histogram: BTreeMap::new(),
        histogram_t: BTreeMap::new(),
        histogram_not_t: BTreeMap::new(),
        dimension_checks: 0,
        real_lines_through_t: 0,
        violations: Vec::new(),
    };
    for o in observations {
        report.members += 1;
        *report.histogram.entry(o.count).or_default() += 1;
        if o.in_t {
            report.members_t += 1;
            *report.histogram_t.entry(o.count).or_default() += 1;
        } else {
            *report.histogram_not_t.entry(o.count).or_default() += 1;
        }
        report.dimension_checks += o.dim_ok as u64;
        report.real_lines_through_t += o.real_through_t as u64;
        for what in o.problems {
            report.violations.push(SpectrumViolation {
                hyperplane: o.hyperplane,
                dual: pg.unrank(o.hyperplane).to_string(),
                what,
            });
        }
    }
    Ok(report)
}

/// Tangent family members found for one point of `B̄ ∪ B̃`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tangency {
    pub point: u64,
    pub in_bbar: bool,
    /// First tangent member containing `X'`, by hyperplane rank.
    pub witness_t: Option<u64>,
    /// First tangent member not containing `X'`.
    pub witness_not_t: Option<u64>,
}

impl Tangency {
    /// A witness from the subfamily the construction predicts.
    pub fn expected_witness(&self) -> Option<u64> {
        if self.in_bbar {
            self.witness_t
        } else {
            self.witness_not_t
        }
    }
}

/// Witness table for the affine points of `B̄ ∪ B̃`. Points of `Theta` are
/// left out: every member meets `X` only in `p`, which is not in `Theta`, so
/// no member can be tangent there, and the cone over `Theta` contributes
/// only `X` itself.
pub fn tangency_scan(ex: &Example36, workers: usize) -> Result<Vec<Tangency>> {
    let amb = ex.ambient();
    let f = amb.field().clone();
    let model = &ex.frame.model;
    let pts: Vec<Point> = ex
        .base()
        .points()
        .filter(|p| model.is_affine(p.coords()))
        .collect();
    let hits = scan_family(ex, workers, |m, in_t| {
        let mut inside = pts
            .iter()
            .enumerate()
            .filter(|(_, p)| m.contains(&f, p.coords()))
            .map(|(i, _)| i);
        match (inside.next(), inside.next()) {
            (Some(i), None) => Some((i, m.hyperplane, in_t)),
            _ => None,
        }
    })?;
    let mut table: Vec<Tangency> = pts
        .iter()
        .map(|p| Tangency {
            point: amb.rank(p),
            in_bbar: ex.bbar.contains(p),
            witness_t: None,
            witness_not_t: None,
        })
        .collect();
    for (i, h, in_t) in hits.into_iter().flatten() {
        let slot = if in_t {
            &mut table[i].witness_t
        } else {
            &mut table[i].witness_not_t
        };
        slot.get_or_insert(h);
    }
    Ok(table)
}

/// One factorization `6e = n t` tested against `|B| - 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExcluderCase {
    pub n: u32,
    pub t: u32,
    /// `t (n - 1)`: the power of `p` that would have to divide `|B| - 1`.
    pub needed: u32,
    pub divides: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExcluderVerdict {
    pub size: u64,
    pub p: u32,
    pub e: u32,
    /// `v_p(size - 1)`, or `None` when `size = 1`.
    pub valuation: Option<u32>,
    pub cases: Vec<ExcluderCase>,
    pub excluded: bool,
}

impl ExcluderVerdict {
    pub fn admissible(&self) -> Vec<(u32, u32)> {
        self.cases
            .iter()
            .filter(|c| c.divides)
            .map(|c| (c.n, c.t))
            .collect()
    }
}

/// Tests whether a set of size `size` in PG(3, p^{6e}) can come from the
/// single-point-vertex cone construction over PG(3n, p^t) with `nt = 6e`,
/// `n >= 2`: that needs `p^{t(n-1)} | size - 1`.
pub fn mps_excluder(size: u64, p: u32, e: u32) -> Result<ExcluderVerdict> {
    if !crate::gf::is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if size < 2 || e == 0 {
        return Err(Error::Precondition("need size >= 2 and e >= 1".into()));
    }
    let m = size - 1;
    let valuation = {
        let mut v = 0;
        let mut x = m;
        while x.is_multiple_of(p as u64) {
            x /= p as u64;
            v += 1;
        }
        Some(v)
    };
    let cases: Vec<ExcluderCase> = (2..=6 * e)
        .filter(|n| (6 * e).is_multiple_of(*n))
        .map(|n| {
            let t = 6 * e / n;
            let needed = t * (n - 1);
            ExcluderCase {
                n,
                t,
                needed,
                divides: valuation.is_none_or(|v| v >= needed),
            }
        })
        .collect();
    let excluded = cases.iter().all(|c| !c.divides);
    Ok(ExcluderVerdict {
        size,
        p,
        e,
        valuation,
        cases,
        excluded,
    })
}

/// Spectrum results as report summaries keyed by target.
pub fn spectra_summaries(reports: &[SpectrumReport]) -> BTreeMap<String, SpectrumSummary> {
    reports
        .iter()
        .map(|r| {
            let key = match r.target {
                Target::Bbar => "bbar",
                Target::Btilde => "btilde",
            };
            (key.to_string(), r.summary())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn excluder_cases() {
        let v = mps_excluder(213, 2, 1).unwrap();
        assert_eq!(v.valuation, Some(2));
        let pairs: Vec<(u32, u32, u32)> = v.cases.iter().map(|c| (c.n, c.t, c.needed)).collect();
        assert_eq!(pairs, vec![(2, 3, 3), (3, 2, 4), (6, 1, 5)]);
        assert!(v.excluded);
        assert!(mps_excluder(2683, 3, 1).unwrap().excluded);
        let open = mps_excluder(64 + 1, 2, 1).unwrap();
        assert!(!open.excluded);
        assert_eq!(open.admissible(), vec![(2, 3), (3, 2), (6, 1)]);
        assert!(mps_excluder(1, 2, 1).is_err());
        assert!(mps_excluder(10, 4, 1).is_err());
    }

    #[test]
    fn subfield_of_gf4() {
        let f = Field::new(2, 2, None).unwrap();
        assert_eq!(baer_subfield(&f, 2), vec![0, 1]);
        let f9 = Field::new(3, 2, None).unwrap();
        assert_eq!(baer_subfield(&f9, 3), vec![0, 1, 2]);
    }

    #[test]
    fn sizes() {
        assert_eq!(example_size(2), 213);
        assert_eq!(example_size(3), 2683);
    }

    #[test]
    fn target_parsing() {
        assert_eq!("bbar".parse::<Target>().unwrap(), Target::Bbar);
        assert!("b".parse::<Target>().is_err());
    }
}
