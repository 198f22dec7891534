//! Acceptance criteria 1 to 7. Runs without the libtest harness so each
//! criterion prints exactly one PASS/FAIL line; exits non-zero on any FAIL.
//!
//! Tolerances are pinned: every rational quantity is compared exactly
//! (tolerance 0); the walk distance threshold is 1/20 and the float
//! re-derivation of d_N must agree with the reported value to 1e-12.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use bdalg::arith::{factorial, rat};
use bdalg::curve::checks::{
    b_for, bounded_index_options, check_saturation, dichotomy_check, index_bound_check,
};
use bdalg::curve::counterexample::{boundary_counterexample, sum_system, CounterexampleOptions};
use bdalg::curve::generation::{random_floor_linear, random_interior_cone};
use bdalg::curve::pipeline::{
    finite_generation_pipeline, graded_piece_oracle, oracle_minimal_generators, PipelineOptions,
};
use bdalg::curve::{MobileSystem, SaturationDatum, Verdict};
use bdalg::diophantine::{
    build_u_system, find_approximant, replay, walk, ApproximantOptions, TargetPoint, WalkOptions,
};
use bdalg::lattice_cone::{FgMonoid, HilbertOptions, LatticePoint, RationalCone, RationalPoint};
use bdalg::scenario::suite::{instance_rng, random_hilbert_instance};
use bdalg::superlinear::example::{
    build_example_3_3, probe_cone, probe_slice, superadditivity_sample, x_point,
};
use bdalg::superlinear::{compute_index, pl_detect, PlOptions, PlOutcome};

const SEED: u64 = 20_260_418;
const WALK_THRESHOLD: f64 = 0.05;
const FLOAT_AGREEMENT: f64 = 1e-12;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ints(p: &LatticePoint) -> Vec<i64> {
    p.to_i64s().expect("small coordinates")
}

fn rat_ints(p: &RationalPoint) -> Vec<i64> {
    p.coords()
        .iter()
        .map(|c| {
            assert!(c.is_integer(), "integral ray expected");
            c.to_integer().to_i64().unwrap()
        })
        .collect()
}

// ---------------------------------------------------------------- oracles

/// Points of `[0, side]^r` reachable as N-combinations of nonnegative
/// generators, in mixed-radix order.
fn reachable(gens: &[Vec<i64>], side: i64, rank: usize) -> Vec<bool> {
    let base = side + 1;
    let n = base.pow(rank as u32) as usize;
    let mut reach = vec![false; n];
    reach[0] = true;
    for idx in 1..n {
        let p = unrank(idx, base, rank);
        reach[idx] = gens.iter().any(|g| {
            let q: Vec<i64> = p.iter().zip(g).map(|(a, b)| a - b).collect();
            q.iter().all(|&c| c >= 0) && reach[rank_of(&q, base)]
        });
    }
    reach
}

fn unrank(mut idx: usize, base: i64, rank: usize) -> Vec<i64> {
    let mut p = vec![0; rank];
    for c in p.iter_mut().rev() {
        *c = idx as i64 % base;
        idx /= base as usize;
    }
    p
}

fn rank_of(p: &[i64], base: i64) -> usize {
    p.iter().fold(0i64, |acc, c| acc * base + c) as usize
}

fn det(m: &[Vec<i64>]) -> i64 {
    match m.len() {
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        3 => {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        }
        _ => unreachable!("rank at most 3"),
    }
}

/// `p ∈ cone(rays)` for `r` linearly independent rays in rank `r`, by
/// Cramer's rule: every coefficient has the sign of the determinant or is 0.
fn in_simplicial_cone(rays: &[Vec<i64>], p: &[i64]) -> bool {
    let r = p.len();
    // columns are rays
    let cols = |replace: Option<usize>| -> Vec<Vec<i64>> {
        (0..r)
            .map(|i| {
                (0..r)
                    .map(|j| if Some(j) == replace { p[i] } else { rays[j][i] })
                    .collect()
            })
            .collect()
    };
    let d = det(&cols(None));
    assert!(d != 0, "rays must be independent");
    (0..r).all(|j| det(&cols(Some(j))) * d.signum() >= 0)
}

// ---------------------------------------------------------------- criteria

fn criterion_1() -> Outcome {
    let side = 20i64;
    let mut points = 0usize;
    for i in 0..50u64 {
        let rank = 1 + (i as usize) % 3;
        let mut rng = instance_rng(SEED, i);
        let inst = random_hilbert_instance(&mut rng, rank, HilbertOptions::default());
        let s_gens: Vec<Vec<i64>> = inst.monoid.generators().iter().map(ints).collect();
        ensure(
            s_gens.iter().flatten().all(|&c| (0..=6).contains(&c)),
            || format!("instance {i}: generator out of range"),
        )?;
        let rays: Vec<Vec<i64>> = inst.cone.generators().iter().map(rat_ints).collect();
        let hb: Vec<Vec<i64>> = inst.basis.generators().iter().map(ints).collect();
        let in_s = reachable(&s_gens, side, rank);
        let in_hb = reachable(&hb, side, rank);
        for (idx, (&a, &b)) in in_s.iter().zip(&in_hb).enumerate() {
            let p = unrank(idx, side + 1, rank);
            let in_sc = a && in_simplicial_cone(&rays, &p);
            points += 1;
            ensure(in_sc == b, || {
                format!("instance {i} (S = {s_gens:?}, C = {rays:?}): point {p:?} in S∩C = {in_sc}, basis sum = {b}")
            })?;
        }
    }
    Ok(format!(
        "50 pairs, {points} box points checked, 0 mismatches"
    ))
}

fn criterion_2() -> Outcome {
    let mut checked = 0u64;
    for i in 0..100u64 {
        let rank = 1 + (i as usize) % 2;
        let mut rng = instance_rng(SEED ^ 2, i);
        let inst = random_floor_linear(&mut rng, rank).map_err(|e| e.to_string())?;
        let d = inst.description.denominator;
        ensure(d <= 6, || format!("denominator {d}"))?;
        ensure(inst.datum.f("P") == rat(d - 1, d), || {
            "f is not 1 - 1/D".into()
        })?;
        let m = &inst.system;
        let datum = &inst.datum;
        let sat = check_saturation(m, datum, 50, 12).map_err(|e| e.to_string())?;
        ensure(sat.passed(), || {
            format!("instance {i}: saturation failed {:?}", sat.witnesses)
        })?;
        let dich = dichotomy_check(m, datum, 50).map_err(|e| e.to_string())?;
        ensure(dich.passed(), || {
            format!("instance {i}: dichotomy failed {:?}", dich.witnesses)
        })?;
        let idx = index_bound_check(m, datum, 50).map_err(|e| e.to_string())?;
        ensure(idx.passed(), || {
            format!("instance {i}: index bound failed {:?}", idx.witnesses)
        })?;

        // independent: m♯(s) = c·s/D, ι_s = D / gcd(c·s, D), b = min(1/D, 1/2)
        let b = if d == 1 { rat(1, 2) } else { rat(1, d) };
        let cap = if d == 1 { 2 } else { d };
        let bc = b_for(&datum.f("P")).map_err(|e| e.to_string())?;
        ensure(bc.b == b, || {
            format!("instance {i}: b = {} expected {b}", bc.b)
        })?;
        let f = m.component("P");
        let sharp = m.straightened("P", bounded_index_options(&bc));
        let c = &inst.description.forms[0];
        for s in m
            .domain()
            .elements_up_to_degree(50)
            .map_err(|e| e.to_string())?
        {
            if s.is_zero() {
                continue;
            }
            checked += 1;
            let cs: i64 = c.iter().zip(ints(&s)).map(|(a, x)| a * x).sum();
            let exact = rat(cs, d);
            let e = &exact - BigRational::from_integer(exact.floor().to_integer());
            ensure(e.is_zero() || (e >= b && e <= rat(1, 1) - &b), || {
                format!("instance {i}: gap {e} at {s}")
            })?;
            let iota = (d / cs.gcd(&d)) as u64;
            ensure(iota as i64 <= cap, || {
                format!("instance {i}: index {iota} above cap")
            })?;
            let got =
                compute_index(&f, &s, bounded_index_options(&bc)).map_err(|e| e.to_string())?;
            ensure(got == iota, || {
                format!("instance {i}: index at {s} is {got}, oracle {iota}")
            })?;
            let v = sharp.value_lattice(&s).map_err(|e| e.to_string())?;
            ensure(v == exact, || {
                format!("instance {i}: m♯({s}) = {v}, oracle {exact}")
            })?;
        }
    }
    Ok(format!(
        "100 systems saturated at (50, 12); {checked} points with exact gaps and indices"
    ))
}

fn floor_div(a: i64, d: i64) -> i64 {
    a.div_euclid(d)
}

/// Max-plus closure of generators `(g, m(g))` over the lattice points of a
/// cone; compares against `m` up to `degree`.
fn max_plus_oracle(
    gens: &[(Vec<i64>, i64)],
    in_cone: &dyn Fn(&[i64]) -> bool,
    m: &dyn Fn(&[i64]) -> i64,
    rank: usize,
    degree: i64,
) -> Result<u64, String> {
    let side = degree;
    let base = side + 1;
    let n = base.pow(rank as u32) as usize;
    let mut best: Vec<Option<i64>> = vec![None; n];
    best[0] = Some(0);
    let mut checked = 0;
    for idx in 1..n {
        let p = unrank(idx, base, rank);
        if p.iter().sum::<i64>() > degree || !in_cone(&p) {
            continue;
        }
        let mut b: Option<i64> = None;
        for (g, mg) in gens {
            let q: Vec<i64> = p.iter().zip(g).map(|(a, x)| a - x).collect();
            if q.iter().any(|&c| c < 0) {
                continue;
            }
            if let Some(v) = best[rank_of(&q, base)] {
                b = Some(b.map_or(v + mg, |old: i64| old.max(v + mg)));
            }
        }
        best[idx] = b;
        checked += 1;
        ensure(b == Some(m(&p)), || {
            format!("at {p:?}: generators reach {b:?}, m = {}", m(&p))
        })?;
    }
    Ok(checked)
}

fn criterion_3() -> Outcome {
    // worked instance
    let forms = BTreeMap::from([("P".to_string(), vec![rat(5, 3)])]);
    let m = MobileSystem::floor_linear(FgMonoid::standard(1), &forms).map_err(|e| e.to_string())?;
    let ray = RationalCone::from_i64_rays(1, &[&[1]]).unwrap();
    let datum = SaturationDatum::single("P", rat(2, 3)).unwrap();
    let rep = finite_generation_pipeline(&m, &datum, &ray, &PipelineOptions::default())
        .map_err(|e| e.to_string())?;
    ensure(rep.verdict == Verdict::Pass, || {
        format!("worked instance verdict {:?}", rep.verdict)
    })?;
    ensure(rep.b_min == rat(1, 3), || format!("b = {}", rep.b_min))?;
    ensure(rep.kappa == BigInt::from(6), || {
        format!("kappa = {}", rep.kappa)
    })?;
    let gens: Vec<(i64, i64)> = rep
        .oracle_minimal
        .as_ref()
        .ok_or("no oracle-minimal set")?
        .entries
        .iter()
        .map(|e| (ints(&e.s)[0], e.divisor.coefficient("P").to_i64().unwrap()))
        .collect();
    ensure(gens == [(1, 1), (2, 3), (3, 5)], || {
        format!("generators {gens:?}")
    })?;

    let mut oracle_points = 0;
    for i in 0..30u64 {
        let rank = 1 + (i as usize) % 2;
        let mut rng = instance_rng(SEED ^ 3, i);
        let inst = random_floor_linear(&mut rng, rank).map_err(|e| e.to_string())?;
        let cone = random_interior_cone(&mut rng, rank);
        let rep = finite_generation_pipeline(
            &inst.system,
            &inst.datum,
            &cone,
            &PipelineOptions::default(),
        )
        .map_err(|e| format!("instance {i}: {e}"))?;
        ensure(rep.verdict == Verdict::Pass, || {
            format!("instance {i}: {:?}", rep.certificates)
        })?;
        ensure(!rep.pieces.is_empty(), || {
            format!("instance {i}: no PL pieces")
        })?;
        let d = inst.description.denominator;
        let cap = if d == 1 { 2 } else { d };
        let kappa = factorial(cap as u64);
        ensure(rep.kappa == kappa, || {
            format!("instance {i}: kappa {} expected {kappa}", rep.kappa)
        })?;
        for e in &rep.truncation.entries {
            let s = ints(&e.s);
            ensure(
                s.iter()
                    .all(|c| BigInt::from(*c) % &kappa == BigInt::zero()),
                || format!("instance {i}: truncation generator {s:?} not a multiple of kappa"),
            )?;
        }
        let c = inst.description.forms[0].clone();
        let mfn = move |p: &[i64]| floor_div(c.iter().zip(p).map(|(a, x)| a * x).sum(), d);
        let rays: Vec<Vec<i64>> = cone.generators().iter().map(rat_ints).collect();
        let in_cone = move |p: &[i64]| in_simplicial_cone(&rays, p);
        let gens: Vec<(Vec<i64>, i64)> = rep
            .oracle_minimal
            .as_ref()
            .ok_or("no oracle-minimal set")?
            .entries
            .iter()
            .map(|e| (ints(&e.s), e.divisor.coefficient("P").to_i64().unwrap()))
            .collect();
        oracle_points += max_plus_oracle(&gens, &in_cone, &mfn, rank, 30)
            .map_err(|e| format!("instance {i}: {e}"))?;
    }
    Ok(format!(
        "b=1/3, kappa=6, gens (1,1P),(2,3P),(3,5P); 30 instances pass to degree 30 ({oracle_points} points re-derived)"
    ))
}

fn criterion_4() -> Outcome {
    let x = TargetPoint::parse(&["1", "sqrt(2)"]).map_err(|e| e.to_string())?;
    let a = find_approximant(&x, &ApproximantOptions::default()).map_err(|e| e.to_string())?;
    ensure(a.q == 2 && a.p == [BigInt::from(3)], || {
        format!("approximant q={} p={:?}", a.q, a.p)
    })?;
    // independent: ‖2√2‖ = 3 - 2√2 < 2^{-1}
    let err = 3.0 - 2.0 * 2f64.sqrt();
    ensure(err < 0.5, || format!("‖q x‖ = {err}"))?;
    let sys = build_u_system(&x, &a, 64).map_err(|e| e.to_string())?;
    let rep = walk(&sys, None, &WalkOptions::default()).map_err(|e| e.to_string())?;
    ensure(rep.steps == 100_000, || format!("steps {}", rep.steps))?;
    ensure(rep.converged, || format!("d_N = {}", rep.final_distance))?;
    ensure(rep.block_maxima_decreasing, || {
        "block maxima not decreasing".into()
    })?;
    let h = rep.hyperplanes.as_ref().ok_or("no hyperplane log")?;
    ensure(h.violations == 0, || {
        format!("{} hyperplane violations", h.violations)
    })?;
    let v = replay(&sys, &rep.j_sequence).map_err(|e| e.to_string())?;
    ensure(v == rep.v_final, || {
        "replayed j-sequence does not reach v_N".into()
    })?;
    let n = (rep.steps + 2) as f64;
    let vf = ints(&v);
    let d =
        ((vf[0] as f64 / n - 2.0).powi(2) + (vf[1] as f64 / n - 2.0 * 2f64.sqrt()).powi(2)).sqrt();
    ensure(d < WALK_THRESHOLD, || format!("re-derived d_N = {d}"))?;
    ensure((d - rep.final_distance).abs() < FLOAT_AGREEMENT, || {
        format!("re-derived d_N = {d}, reported {}", rep.final_distance)
    })?;
    Ok(format!(
        "q=2, p=3, d_N = {:.3e} < 0.05 at N = 1e5, {} wall comparisons, 0 violations",
        rep.final_distance, h.comparisons
    ))
}

fn criterion_5() -> Outcome {
    let f = build_example_3_3();
    // f(x_2) = 3 and ε_2 = 23/8 as stated; f(x_3) = (f(x_2) + ε_2)/2
    let f2 = rat(3, 1);
    let eps2 = rat(23, 8);
    let f3 = (&f2 + &eps2) / rat(2, 1);
    ensure(f3 == rat(47, 16), || format!("recurrence gives {f3}"))?;
    let v2 = f.value(&x_point(2)).map_err(|e| e.to_string())?;
    let v3 = f.value(&x_point(3)).map_err(|e| e.to_string())?;
    ensure(v2 == f2, || format!("f(x_2) = {v2}"))?;
    ensure(v3 == f3, || format!("f(x_3) = {v3}"))?;
    let sample = superadditivity_sample(&f, 1000, SEED).map_err(|e| e.to_string())?;
    ensure(sample.holds && sample.pairs == 1000, || {
        format!("superadditivity {:?}", sample.witness)
    })?;
    let opts = PlOptions {
        slice: Some(probe_slice()),
        max_depth: 12,
        ..PlOptions::default()
    };
    match pl_detect(&f, &probe_cone(), &opts).map_err(|e| e.to_string())? {
        PlOutcome::Evidence(e) => {
            let distinct: std::collections::BTreeSet<_> = e.slopes.iter().collect();
            ensure(distinct.len() == e.distinct_slopes, || {
                "slope count mismatch".into()
            })?;
            ensure(e.distinct_slopes >= 10, || {
                format!("{} distinct slopes", e.distinct_slopes)
            })?;
            Ok(format!(
                "f(x_2)=3, f(x_3)=47/16, 1000 cross-cone pairs superadditive, {} distinct slopes at 2^-12",
                e.distinct_slopes
            ))
        }
        other => Err(format!("expected non-PL evidence, got {other:?}")),
    }
}

fn criterion_6() -> Outcome {
    let m = sum_system("P").map_err(|e| e.to_string())?;
    let datum = SaturationDatum::single("P", rat(2, 3)).unwrap();
    let (n, rep) = boundary_counterexample(&m, &datum, &CounterexampleOptions::default())
        .map_err(|e| e.to_string())?;
    ensure(rep.verdict == Verdict::Pass, || {
        format!("{:?}", rep.certificates)
    })?;
    let sat = check_saturation(&n, &datum, 30, 8).map_err(|e| e.to_string())?;
    ensure(sat.passed(), || {
        format!("saturation of n: {:?}", sat.witnesses)
    })?;
    // independent: n♯(1, t) = 2(1 + t) for t > 0 and n♯(1, 0) = 1
    let sharp = n.straightened("P", bdalg::superlinear::IndexOptions::default());
    for (axis, boundary) in [
        (0usize, RationalPoint::from_i64s(&[1, 0])),
        (1, RationalPoint::from_i64s(&[0, 1])),
    ] {
        let bv = sharp.value(&boundary).map_err(|e| e.to_string())?;
        ensure(bv == rat(1, 1), || format!("boundary value {bv}"))?;
        for k in 1..=12u32 {
            let t = BigRational::new(BigInt::from(1), BigInt::from(1) << k);
            let mut c = vec![rat(1, 1), t.clone()];
            if axis == 1 {
                c.reverse();
            }
            let v = sharp
                .value(&RationalPoint::new(c))
                .map_err(|e| e.to_string())?;
            let want = rat(2, 1) * (rat(1, 1) + &t);
            ensure(v == want, || {
                format!("n♯ near axis {axis} at 2^-{k}: {v}, expected {want}")
            })?;
        }
    }
    for r in &rep.rays {
        ensure(r.jump_factor == Some(rat(2, 1)), || {
            format!("jump factor {:?} on {}", r.jump_factor, r.ray)
        })?;
    }
    Ok("n saturated per ray to (30, 8); boundary value 1, interior limit 2, factor exactly 2 on both rays".into())
}

fn criterion_7() -> Outcome {
    let forms = BTreeMap::from([("P".to_string(), vec![rat(5, 3)])]);
    let m = MobileSystem::floor_linear(FgMonoid::standard(1), &forms).map_err(|e| e.to_string())?;
    let ray = RationalCone::from_i64_rays(1, &[&[1]]).unwrap();
    let gens = oracle_minimal_generators(&m, &ray, 30).map_err(|e| e.to_string())?;
    let full = graded_piece_oracle(&m, &gens, &ray, 30).map_err(|e| e.to_string())?;
    ensure(full.passed(), || "full generator set fails".into())?;
    let cut = gens.without(&LatticePoint::from_i64s(&[3]));
    ensure(cut.entries.len() == 2, || {
        "generator (3, 5P) not present".into()
    })?;
    let cert = graded_piece_oracle(&m, &cut, &ray, 30).map_err(|e| e.to_string())?;
    ensure(cert.verdict == Verdict::Fail, || {
        format!("verdict {:?}", cert.verdict)
    })?;
    let w = cert.first_witness().ok_or("no witness")?;
    ensure(w["s"] == serde_json::json!([3]), || format!("witness {w}"))?;
    Ok(format!(
        "oracle fails at s=3 (best {}, m = {})",
        w["best"], w["m"]
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("Hilbert basis covers S∩C in [0,20]^r", criterion_1),
        ("saturation, dichotomy and index chain", criterion_2),
        ("finite-generation pipeline", criterion_3),
        ("Diophantine walk for (1, sqrt 2)", criterion_4),
        ("non-PL superadditive example", criterion_5),
        ("boundary non-extension", criterion_6),
        ("oracle sensitivity", criterion_7),
    ];
    let only: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let id = format!("{}", i + 1);
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("criterion {id} ({name}): PASS [{secs:.1}s] {msg}"),
            Err(msg) => {
                failed += 1;
                println!("criterion {id} ({name}): FAIL [{secs:.1}s] {msg}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
