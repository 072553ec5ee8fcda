use std::sync::Arc;

use blockgeom::gf::Field;
use blockgeom::model::{BcItem, BcModel};
use blockgeom::pg::ProjSpace;
use proptest::prelude::*;

fn field() -> impl Strategy<Value = Field> {
    prop::sample::select(vec![
        (2u32, 1u32),
        (2, 2),
        (2, 3),
        (3, 2),
        (5, 1),
        (2, 6),
        (3, 3),
        (7, 2),
        (2, 11),
    ])
    .prop_map(|(p, k)| Field::new(p, k, None).unwrap())
}

fn model() -> impl Strategy<Value = Arc<BcModel>> {
    prop::sample::select(vec![
        (2u32, 2usize, 2usize),
        (2, 3, 2),
        (3, 2, 2),
        (4, 2, 2),
        (2, 2, 3),
        (4, 3, 2),
    ])
    .prop_map(|(q1, n, r)| Arc::new(BcModel::new(q1, n, r).unwrap()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_axioms(f in field(), a in any::<u32>(), b in any::<u32>(), c in any::<u32>()) {
        let n = f.size();
        let (a, b, c) = (a % n, b % n, c % n);
        prop_assert_eq!(f.add(a, b), f.add(b, a));
        prop_assert_eq!(f.mul(a, b), f.mul(b, a));
        prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
        prop_assert_eq!(f.add(a, f.neg(a)), 0);
        prop_assert_eq!(f.pow(a, n as u64), a);
        if a != 0 {
            prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
        }
    }

    #[test]
    fn rank_is_a_bijection(f in field(), dim in 1usize..4, r in any::<u64>()) {
        let sp = ProjSpace::new(Arc::new(f), dim);
        let r = r % sp.num_points();
        let p = sp.unrank(r);
        prop_assert!(sp.is_canonical(p.coords()));
        prop_assert_eq!(sp.rank(&p), r);
    }

    #[test]
    fn model_round_trip(m in model(), r in any::<u64>()) {
        let pg = m.pg();
        let pt = pg.unrank(r % pg.num_points());
        let item = m.pg_to_bc(&pt).unwrap();
        prop_assert_eq!(m.bc_to_pg(&item).unwrap(), pt);
    }

    #[test]
    fn hyperplanes_become_form_systems(m in model(), a in any::<u64>(), h in any::<u64>()) {
        let amb = m.ambient();
        let f = amb.field();
        let pg = m.pg();
        let hyp = pg.unrank(h % pg.num_points());
        let forms = m.hyperplane_forms(hyp.coords());
        prop_assert_eq!(forms.len(), m.n());
        let a = amb.unrank(a % amb.num_points());
        let on_forms = forms.iter().all(|w| f.dot(w, a.coords()) == 0);
        let item = if m.is_affine(a.coords()) {
            BcItem::Affine(a.clone())
        } else {
            BcItem::Spread(m.spread_element_of(&a).unwrap())
        };
        let target = m.bc_to_pg(&item).unwrap();
        if m.is_affine(a.coords()) {
            prop_assert_eq!(on_forms, pg.incident(&target, &hyp));
        } else if pg.incident(&target, &hyp) {
            // The whole spread element lies in the blown-up hyperplane.
            prop_assert!(on_forms);
        }
    }

    #[test]
    fn affine_lines_stay_collinear(m in model(), a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
        // Affine points of <a, S>, S the spread element on the line ab,
        // form one line of the represented space.
        let amb = m.ambient();
        let affine: Vec<_> = amb.points().filter(|p| m.is_affine(p.coords())).collect();
        let a = &affine[(a % affine.len() as u64) as usize];
        let b = &affine[(b % affine.len() as u64) as usize];
        prop_assume!(a != b);
        let ab = amb.span_points(&[a, b]).unwrap();
        let at_inf = amb.meet(&ab, &m.sigma()).as_point().unwrap();
        let s = m.spread_element(m.spread_element_of(&at_inf).unwrap());
        let plane = amb.span(&[&blockgeom::pg::Subspace::from_point(a), &s]).unwrap();
        let others: Vec<_> = amb.points_of(&plane).filter(|p| m.is_affine(p.coords())).collect();
        let c = &others[(c % others.len() as u64) as usize];
        let pg = m.pg();
        let imgs: Vec<_> = [a, b, c].iter().map(|p| m.bc_to_pg(&BcItem::Affine((*p).clone())).unwrap()).collect();
        let span = pg.span_points(&[&imgs[0], &imgs[1], &imgs[2]]).unwrap();
        prop_assert_eq!(span.dim(), 1);
    }
}
