use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use bdalg::arith::{floor, rat, rat_int};
use bdalg::curve::checks::{
    check_saturation, dichotomy_check, index_bound_check, saturation_chain,
};
use bdalg::curve::generation::{
    random_floor_linear, random_interior_cone, random_min_floor_linear,
};
use bdalg::curve::pipeline::{finite_generation_pipeline, PipelineOptions};
use bdalg::curve::{MobileSystem, SaturationDatum, Verdict};
use bdalg::diophantine::{
    build_u_system, find_approximant, replay, walk, ApproximantOptions, TargetPoint, WalkOptions,
};
use bdalg::lattice_cone::{ConePosition, FgMonoid, LatticePoint, RationalCone, RationalPoint};
use bdalg::scenario::{self, Overrides};
use bdalg::superlinear::pl::verify_piece;
use bdalg::superlinear::{
    one_point_additivity, pl_detect, IndexOptions, MonoidFunction, PlOptions, PlOutcome,
    StraightenedFunction,
};

fn cases(n: u32) -> ProptestConfig {
    ProptestConfig {
        cases: n,
        ..ProptestConfig::default()
    }
}

fn vec_strategy(rank: usize, lo: i64, hi: i64) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(lo..=hi, rank).prop_filter("nonzero", |v| v.iter().any(|&c| c != 0))
}

fn cone_of(rays: &[Vec<i64>]) -> Option<RationalCone> {
    let refs: Vec<&[i64]> = rays.iter().map(Vec::as_slice).collect();
    RationalCone::from_i64_rays(rays[0].len(), &refs).ok()
}

fn rpoint(v: &[i64], d: i64) -> RationalPoint {
    RationalPoint::new(v.iter().map(|&c| rat(c, d)).collect())
}

fn lp(v: &[i64]) -> LatticePoint {
    LatticePoint::from_i64s(v)
}

proptest! {
    #![proptest_config(cases(64))]

    #[test]
    fn cone_position_is_scale_invariant(
        rays in prop::collection::vec(vec_strategy(3, -3, 5), 3..5),
        p in prop::collection::vec(-6i64..=6, 3),
        num in 1i64..50,
        den in 1i64..50,
    ) {
        let Some(c) = cone_of(&rays) else { return Ok(()) };
        let x = rpoint(&p, 1);
        let k = rat(num, den);
        prop_assert_eq!(c.position(&x).unwrap(), c.position(&x.scale(&k)).unwrap());
    }

    #[test]
    fn truncation_stays_inside(
        gens in prop::collection::vec(vec_strategy(2, 0, 5), 2..4),
        kappa in prop::collection::vec(1i64..4, 4),
        p in prop::collection::vec(0i64..=15, 2),
    ) {
        let refs: Vec<&[i64]> = gens.iter().map(Vec::as_slice).collect();
        let Ok(s) = FgMonoid::from_i64s(2, &refs) else { return Ok(()) };
        let k: Vec<BigInt> = kappa[..s.generators().len()].iter().map(|&v| BigInt::from(v)).collect();
        let t = s.truncate(&k).unwrap();
        let p = lp(&p);
        if t.contains(&p).unwrap() {
            prop_assert!(s.contains(&p).unwrap());
        }
    }

    #[test]
    fn subdivision_interiors_are_disjoint(
        rays in prop::collection::vec(vec_strategy(3, 0, 4), 4..6),
        pts in prop::collection::vec(prop::collection::vec(1i64..=9, 3), 12),
    ) {
        let Some(c) = cone_of(&rays) else { return Ok(()) };
        let pieces = c.simplicial_subdivision();
        for p in &pts {
            let x = rpoint(p, 1);
            let inside = pieces
                .iter()
                .filter(|q| q.position(&x).unwrap() == ConePosition::RelativeInterior)
                .count();
            prop_assert!(inside <= 1, "{x:?} is interior to {inside} pieces");
            if c.contains(&x).unwrap() {
                prop_assert!(pieces.iter().any(|q| q.contains(&x).unwrap()));
            }
        }
    }
}

fn random_function(seed: u64, rank: usize) -> MonoidFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inst = if seed % 2 == 0 {
        random_floor_linear(&mut rng, rank).unwrap()
    } else {
        random_min_floor_linear(&mut rng, rank).unwrap()
    };
    inst.system.component("P")
}

proptest! {
    #![proptest_config(cases(24))]

    #[test]
    fn straightening_dominates_and_is_homogeneous(
        seed in any::<u64>(),
        s in prop::collection::vec(0i64..=8, 2),
        num in 1i64..12,
        den in 1i64..12,
    ) {
        let f = random_function(seed, 2);
        let sf = StraightenedFunction::from_monoid(f.clone(), IndexOptions::default());
        let p = lp(&s);
        if p.is_zero() {
            return Ok(());
        }
        let sharp = sf.value_lattice(&p).unwrap();
        prop_assert!(sharp >= f.evaluate(&p).unwrap());
        let x = p.to_rational();
        let k = rat(num, den);
        prop_assert_eq!(sf.value(&x.scale(&k)).unwrap(), k * &sharp);
        // two different multiples agree
        prop_assert_eq!(sf.value_with_multiple(&x, &BigInt::from(1)).unwrap(), sharp.clone());
        prop_assert_eq!(sf.value_with_multiple(&x, &BigInt::from(6)).unwrap(), sharp);
    }

    #[test]
    fn straightening_is_superadditive(
        seed in any::<u64>(),
        a in prop::collection::vec(0i64..=9, 2),
        b in prop::collection::vec(0i64..=9, 2),
        da in 1i64..5,
        db in 1i64..5,
    ) {
        let sf = StraightenedFunction::from_monoid(random_function(seed, 2), IndexOptions::default());
        let (x, y) = (rpoint(&a, da), rpoint(&b, db));
        let lhs = sf.value(&x).unwrap() + sf.value(&y).unwrap();
        prop_assert!(lhs <= sf.value(&x.add(&y)).unwrap());
    }

    #[test]
    fn one_point_lemma(seed in any::<u64>(), s0 in prop::collection::vec(1i64..=4, 2)) {
        let f = random_function(seed, 2);
        let v = one_point_additivity(&f, &lp(&s0), 20).unwrap();
        if v.holds {
            let e0 = f.evaluate(&lp(&[1, 0])).unwrap();
            let e1 = f.evaluate(&lp(&[0, 1])).unwrap();
            for a in 0..=20i64 {
                for b in 0..=(20 - a) {
                    let want = &e0 * rat(a, 1) + &e1 * rat(b, 1);
                    prop_assert_eq!(f.evaluate(&lp(&[a, b])).unwrap(), want, "at ({}, {})", a, b);
                }
            }
        }
    }

    #[test]
    fn linear_piece_certificates_validate(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_min_floor_linear(&mut rng, 2).unwrap();
        let cone = random_interior_cone(&mut rng, 2);
        let sf = inst.system.straightened("P", IndexOptions::default());
        if let Ok(PlOutcome::Decomposition(d)) = pl_detect(&sf, &cone, &PlOptions::default()) {
            for piece in &d.pieces {
                prop_assert!(verify_piece(&sf, piece).unwrap());
            }
        }
    }
}

fn quadratic_target() -> impl Strategy<Value = String> {
    (
        0i64..3,
        prop::sample::select(vec![2i64, 3, 5, 6, 7, 10]),
        1i64..4,
    )
        .prop_map(|(k, d, m)| format!("{k} + 1/{m}*sqrt({d})"))
}

proptest! {
    #![proptest_config(cases(12))]

    #[test]
    fn walk_conservation_and_monotonicity(y in quadratic_target()) {
        let x = TargetPoint::parse(&["1".to_string(), y]).unwrap();
        let a = find_approximant(&x, &ApproximantOptions::default()).unwrap();
        let sys = build_u_system(&x, &a, 64).unwrap();
        let f = MonoidFunction::from_expr(FgMonoid::standard(2), "floor((3a + 2b)/2)").unwrap();
        let opts = WalkOptions { steps: 2000, ..WalkOptions::default() };
        let rep = walk(&sys, Some(&f), &opts).unwrap();
        prop_assert_eq!(replay(&sys, &rep.j_sequence).unwrap(), rep.v_final.clone());
        let mut from_tally = vec![BigInt::from(0); 2];
        for (u, t) in sys.u.iter().zip(&rep.tally) {
            for (c, x) in from_tally.iter_mut().zip(u.coords()) {
                *c += x * BigInt::from(*t);
            }
        }
        prop_assert_eq!(LatticePoint::new(from_tally), rep.v_final.clone());
        prop_assert_eq!(rep.hyperplanes.as_ref().unwrap().violations, 0);
        prop_assert_eq!(rep.defects.as_ref().unwrap().negative, 0);
    }
}

proptest! {
    #![proptest_config(cases(16))]

    #[test]
    fn saturation_implies_dichotomy_and_index(seed in any::<u64>(), rank in 1usize..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = if seed % 3 == 0 {
            random_min_floor_linear(&mut rng, rank).unwrap()
        } else {
            random_floor_linear(&mut rng, rank).unwrap()
        };
        let certs = saturation_chain(&inst.system, &inst.datum, 20, 8).unwrap();
        if certs[0].passed() {
            prop_assert_eq!(certs.len(), 3);
            prop_assert!(certs.iter().all(|c| c.passed()), "{:?}", certs);
        }
    }

    #[test]
    fn saturated_systems_are_floors_of_their_straightening(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_floor_linear(&mut rng, 2).unwrap();
        let b = bdalg::curve::checks::b_for(&inst.datum.f("P")).unwrap();
        let sf = inst.system.straightened("P", bdalg::curve::checks::bounded_index_options(&b));
        for s in inst.system.domain().elements_up_to_degree(12).unwrap() {
            if s.is_zero() {
                continue;
            }
            let m = inst.system.coefficient("P", &s).unwrap();
            prop_assert_eq!(floor(&sf.value_lattice(&s).unwrap()), m);
        }
    }

    #[test]
    fn pipeline_generators_pass_the_oracle(seed in any::<u64>(), rank in 1usize..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_floor_linear(&mut rng, rank).unwrap();
        let cone = random_interior_cone(&mut rng, rank);
        let opts = PipelineOptions { oracle_degree: Some(12), ..PipelineOptions::default() };
        if let Ok(rep) = finite_generation_pipeline(&inst.system, &inst.datum, &cone, &opts) {
            prop_assert_eq!(rep.verdict, Verdict::Pass, "{:?}", rep.certificates);
        }
    }

    #[test]
    fn checks_decompose_over_points(
        p in prop::collection::vec(1i64..=9, 2),
        q in prop::collection::vec(1i64..=9, 2),
        dp in 1i64..=5,
        dq in 1i64..=5,
        fp in 0i64..4,
        fq in 0i64..4,
    ) {
        let forms = BTreeMap::from([
            ("P".to_string(), vec![rat(p[0], dp), rat(p[1], dp)]),
            ("Q".to_string(), vec![rat(q[0], dq), rat(q[1], dq)]),
        ]);
        let m = MobileSystem::floor_linear(FgMonoid::standard(2), &forms).unwrap();
        let datum = SaturationDatum::new(BTreeMap::from([
            ("P".to_string(), rat(fp, 4)),
            ("Q".to_string(), rat(fq, 4)),
        ])).unwrap();
        let joint = check_saturation(&m, &datum, 10, 5).unwrap().verdict;
        let split = check_saturation(&m.restrict("P"), &datum, 10, 5).unwrap().verdict
            .and(check_saturation(&m.restrict("Q"), &datum, 10, 5).unwrap().verdict);
        prop_assert_eq!(joint, split);
        if check_saturation(&m, &datum, 10, 5).unwrap().passed() {
            for c in [dichotomy_check, index_bound_check] {
                let joint = c(&m, &datum, 10).unwrap().verdict;
                let split = c(&m.restrict("P"), &datum, 10).unwrap().verdict
                    .and(c(&m.restrict("Q"), &datum, 10).unwrap().verdict);
                prop_assert_eq!(joint, split);
            }
        }
    }

    #[test]
    fn boundary_doubling_is_discontinuous(c0 in 1i64..=6, c1 in 1i64..=6, k in 2u32..=10) {
        let src = format!("{c0}a + {c1}b");
        let m = MobileSystem::from_exprs(
            FgMonoid::standard(2),
            &BTreeMap::from([("P".to_string(), src)]),
        ).unwrap();
        let n = bdalg::curve::counterexample::doubled_system(&m);
        let sharp = n.straightened("P", IndexOptions::default());
        let boundary = sharp.value(&rpoint(&[1, 0], 1)).unwrap();
        prop_assert_eq!(boundary.clone(), rat(c0, 1));
        // delta = 2^-k <= 1/4
        let delta = BigRational::new(1.into(), BigInt::from(1) << k);
        let near = RationalPoint::new(vec![rat(1, 1), delta]);
        let gap = sharp.value(&near).unwrap() - &boundary;
        let gap = if gap < rat(0, 1) { -gap } else { gap };
        prop_assert!(gap * rat(2, 1) >= boundary);
        prop_assert_eq!(rat_int(&n.coefficient("P", &lp(&[1, 0])).unwrap()), rat(c0, 1));
    }
}

proptest! {
    #![proptest_config(cases(6))]

    #[test]
    fn reports_are_reproducible(seed in any::<u64>()) {
        let doc = r#"{"kind": "suite", "suite": {"check": "saturation", "count": 3, "max_rank": 2},
                      "bounds": {"s_bound": 12, "mu_nu_bound": 5}}"#;
        let o = Overrides { seed: Some(seed), ..Overrides::default() };
        let a = scenario::run_str(doc, &o).unwrap().report.to_json();
        let parallel = Overrides { jobs: Some(3), ..o.clone() };
        let b = scenario::run_str(doc, &parallel).unwrap().report.to_json();
        prop_assert_eq!(a, b);
    }
}
