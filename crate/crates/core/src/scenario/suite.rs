//! Randomized suites: independent instances, one ChaCha stream each, run in
//! parallel and reported in index order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use super::doc::{Scenario, SuiteCheck, SuiteDoc};
use super::ops::{hilbert_options, pipeline_options};
use super::ScenarioError;
use crate::arith;
use crate::curve::certificate::overall;
use crate::curve::checks::saturation_chain;
use crate::curve::generation::{
    random_floor_linear, random_interior_cone, random_min_floor_linear, RandomInstance,
};
use crate::curve::pipeline::finite_generation_pipeline;
use crate::curve::{Certificate, Verdict};
use crate::error::{Error, Result};
use crate::lattice_cone::{
    hilbert_basis_intersection_with, FgMonoid, HilbertOptions, LatticePoint, RationalCone,
};

/// The generator for instance `index` of a suite seeded with `seed`.
pub fn instance_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn random_vector(rng: &mut ChaCha8Rng, rank: usize, max: i64) -> Vec<i64> {
    loop {
        let v: Vec<i64> = (0..rank).map(|_| rng.gen_range(0..=max)).collect();
        if v.iter().any(|&c| c != 0) {
            return v;
        }
    }
}

#[derive(Clone, Debug)]
pub struct HilbertInstance {
    pub monoid: FgMonoid,
    pub cone: RationalCone,
    pub basis: FgMonoid,
}

/// A full-dimensional `S` with between `r` and `r + 2` generators and a
/// full-dimensional `C` with `r` rays, all coordinates in `0..=6`, redrawn
/// until the Hilbert basis of `S ∩ C` is computable.
pub fn random_hilbert_instance(
    rng: &mut ChaCha8Rng,
    rank: usize,
    opts: HilbertOptions,
) -> HilbertInstance {
    loop {
        let k = rank + rng.gen_range(0..=2);
        let gens: Vec<LatticePoint> = (0..k)
            .map(|_| LatticePoint::from_i64s(&random_vector(rng, rank, 6)))
            .collect();
        let Ok(monoid) = FgMonoid::new(rank, gens) else {
            continue;
        };
        if !monoid.cone().is_full_dimensional() {
            continue;
        }
        let rays: Vec<Vec<i64>> = (0..rank).map(|_| random_vector(rng, rank, 6)).collect();
        let refs: Vec<&[i64]> = rays.iter().map(Vec::as_slice).collect();
        let Ok(cone) = RationalCone::from_i64_rays(rank, &refs) else {
            continue;
        };
        if !cone.is_full_dimensional() {
            continue;
        }
        if let Ok(basis) = hilbert_basis_intersection_with(&monoid, &cone, opts) {
            return HilbertInstance {
                monoid,
                cone,
                basis,
            };
        }
    }
}

fn integer_rows(rows: &[crate::lattice_cone::RationalPoint]) -> Result<Vec<Vec<i64>>> {
    rows.iter()
        .map(|r| {
            arith::primitive_integer(r.coords())
                .iter()
                .map(arith::to_i64)
                .collect()
        })
        .collect()
}

/// Reachability in `[0, side]^r` from nonnegative generators, in
/// lexicographic order.
fn reachable(gens: &[Vec<i64>], side: i64, rank: usize) -> Vec<bool> {
    let n = (side + 1).pow(rank as u32) as usize;
    let mut out = vec![false; n];
    out[0] = true;
    let mut coords = vec![0i64; rank];
    for idx in 0..n {
        let mut rem = idx as i64;
        for c in coords.iter_mut().rev() {
            *c = rem % (side + 1);
            rem /= side + 1;
        }
        if idx == 0 {
            continue;
        }
        out[idx] = gens.iter().any(|g| {
            if g.iter().zip(&coords).any(|(a, b)| a > b) {
                return false;
            }
            let j = coords
                .iter()
                .zip(g)
                .fold(0i64, |acc, (c, d)| acc * (side + 1) + (c - d));
            out[j as usize]
        });
    }
    out
}

/// Every point of `S ∩ C` in `[0, side]^r` is a sum of basis elements, and
/// no sum of basis elements leaves `S ∩ C`. Needs nonnegative generators.
pub fn box_check(
    s: &FgMonoid,
    c: &RationalCone,
    basis: &FgMonoid,
    side: u64,
) -> Result<Certificate> {
    let mut cert = Certificate::new("box_check").param("box_side", side);
    let gens = s.generators_i64()?;
    if gens.iter().flatten().any(|&v| v < 0) {
        cert.inconclusive(
            "the box check needs nonnegative monoid generators",
            Value::Null,
        );
        return Ok(cert);
    }
    let rank = s.dim();
    let side = i64::try_from(side).map_err(|_| Error::Overflow(side.to_string()))?;
    if (side + 1)
        .checked_pow(rank as u32)
        .map_or(true, |n| n > 1 << 24)
    {
        return Err(Error::BoundExceeded {
            what: "box check".into(),
            needed: format!("{}^{rank}", side + 1),
            bound: (1u64 << 24).to_string(),
        });
    }
    let in_s = reachable(&gens, side, rank);
    let in_hb = reachable(&basis.generators_i64()?, side, rank);
    let facets = integer_rows(&c.facet_normals())?;
    let equations = integer_rows(&c.span_equations())?;
    let mut coords = vec![0i64; rank];
    for (idx, (&a, &b)) in in_s.iter().zip(&in_hb).enumerate() {
        let mut rem = idx as i64;
        for x in coords.iter_mut().rev() {
            *x = rem % (side + 1);
            rem /= side + 1;
        }
        let dot = |r: &Vec<i64>| r.iter().zip(&coords).map(|(u, v)| u * v).sum::<i64>();
        let in_c = facets.iter().all(|f| dot(f) >= 0) && equations.iter().all(|e| dot(e) == 0);
        cert.checked += 1;
        if (a && in_c) != b {
            cert.fail(json!({"point": coords, "in_s_cap_c": a && in_c, "basis_sum": b}));
            break;
        }
    }
    Ok(cert)
}

#[derive(Clone, Debug, Serialize)]
struct InstanceSummary {
    index: u64,
    rank: usize,
    verdict: Verdict,
    detail: Value,
    certificates: Vec<Certificate>,
}

fn saturation_instance(doc: &SuiteDoc, sc: &Scenario, index: u64) -> Result<InstanceSummary> {
    let mut rng = instance_rng(sc.seed, index);
    let rank = 1 + (index as usize) % doc.max_rank;
    let inst = draw(doc, &mut rng, rank)?;
    let certs = saturation_chain(
        &inst.system,
        &inst.datum,
        sc.bounds.s_bound.unwrap_or(50),
        sc.bounds.mu_nu_bound.unwrap_or(12),
    )?;
    Ok(InstanceSummary {
        index,
        rank,
        verdict: overall(&certs),
        detail: json!({"instance": inst.description}),
        certificates: certs,
    })
}

fn draw(doc: &SuiteDoc, rng: &mut ChaCha8Rng, rank: usize) -> Result<RandomInstance> {
    if doc.min_forms {
        random_min_floor_linear(rng, rank)
    } else {
        random_floor_linear(rng, rank)
    }
}

fn fingen_instance(doc: &SuiteDoc, sc: &Scenario, index: u64) -> Result<InstanceSummary> {
    let mut rng = instance_rng(sc.seed, index);
    let rank = 1 + (index as usize) % doc.max_rank;
    let inst = draw(doc, &mut rng, rank)?;
    let cone = random_interior_cone(&mut rng, rank);
    let detail = json!({"instance": inst.description, "cone": cone});
    match finite_generation_pipeline(&inst.system, &inst.datum, &cone, &pipeline_options(sc)) {
        Ok(rep) => Ok(InstanceSummary {
            index,
            rank,
            verdict: rep.verdict,
            detail: json!({
                "instance": inst.description,
                "cone": cone,
                "b_min": arith::format_rational(&rep.b_min),
                "kappa": rep.kappa.to_string(),
                "pieces": rep.pieces.len(),
                "truncation_generators": rep.truncation.points(),
                "oracle_minimal": rep.oracle_minimal.as_ref().map(|g| g.points()),
            }),
            certificates: rep.certificates,
        }),
        Err(Error::Inconclusive(msg)) => {
            let mut c = Certificate::new("finite_generation_pipeline");
            c.inconclusive(msg, Value::Null);
            Ok(InstanceSummary {
                index,
                rank,
                verdict: Verdict::Inconclusive,
                detail,
                certificates: vec![c],
            })
        }
        Err(e) => Err(e),
    }
}

fn hilbert_instance(doc: &SuiteDoc, sc: &Scenario, index: u64) -> Result<InstanceSummary> {
    let mut rng = instance_rng(sc.seed, index);
    let rank = 1 + (index as usize) % doc.max_rank;
    let inst = random_hilbert_instance(&mut rng, rank, hilbert_options(sc));
    let cert = box_check(
        &inst.monoid,
        &inst.cone,
        &inst.basis,
        sc.bounds.box_side.unwrap_or(20),
    )?;
    Ok(InstanceSummary {
        index,
        rank,
        verdict: cert.verdict,
        detail: json!({"monoid": inst.monoid, "cone": inst.cone, "hilbert_basis": inst.basis.generators()}),
        certificates: vec![cert],
    })
}

pub(crate) fn run_suite(
    sc: &Scenario,
    jobs: Option<usize>,
) -> std::result::Result<(Verdict, Value, Option<String>), ScenarioError> {
    let doc = sc.suite.as_ref().expect("validated");
    let one = |i: u64| match doc.check {
        SuiteCheck::Hilbert => hilbert_instance(doc, sc, i),
        SuiteCheck::Saturation => saturation_instance(doc, sc, i),
        SuiteCheck::Fingen => fingen_instance(doc, sc, i),
    };
    let run = || {
        (0..doc.count)
            .into_par_iter()
            .map(one)
            .collect::<Result<Vec<_>>>()
    };
    let results = match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::invalid(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    }?;
    let verdict = results.iter().fold(Verdict::Pass, |v, r| v.and(r.verdict));
    let failures: Vec<u64> = results
        .iter()
        .filter(|r| r.verdict != Verdict::Pass)
        .map(|r| r.index)
        .collect();
    Ok((
        verdict,
        json!({"instances": results, "not_passed": failures}),
        None,
    ))
}
