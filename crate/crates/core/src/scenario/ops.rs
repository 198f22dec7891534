use std::collections::BTreeMap;

use serde_json::{json, Value};

use super::doc::{Kind, Prepared, Scenario};
use super::{plot, suite, ScenarioError};
use crate::arith::format_rational;
use crate::curve::certificate::overall;
use crate::curve::checks::{
    b_on_support, bounded_index_options, saturation_chain, validate_system,
};
use crate::curve::counterexample::{boundary_counterexample, CounterexampleOptions};
use crate::curve::pipeline::{finite_generation_pipeline, PipelineOptions};
use crate::curve::{Certificate, Verdict};
use crate::diophantine::{build_u_system, find_approximant, walk, ApproximantOptions, WalkOptions};
use crate::error::Error;
use crate::lattice_cone::{
    hilbert_basis_intersection_with, HilbertOptions, LatticePoint, RationalPoint,
};
use crate::superlinear::example::{self, build_example_3_3, superadditivity_sample, x_point};
use crate::superlinear::{pl_detect, IndexOptions, PlOptions, PlOutcome};

type Dispatched = (Verdict, Value, Option<String>);

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

pub(crate) fn pl_options(sc: &Scenario) -> PlOptions {
    let b = &sc.bounds;
    let d = PlOptions::default();
    PlOptions {
        max_depth: b.max_depth.unwrap_or(d.max_depth),
        kappa_max: b.kappa_max.unwrap_or(d.kappa_max),
        hilbert: hilbert_options(sc),
        ..d
    }
}

pub(crate) fn hilbert_options(sc: &Scenario) -> HilbertOptions {
    HilbertOptions {
        coordinate_bound: sc
            .bounds
            .coordinate_bound
            .unwrap_or(HilbertOptions::default().coordinate_bound),
    }
}

pub(crate) fn pipeline_options(sc: &Scenario) -> PipelineOptions {
    let b = &sc.bounds;
    let d = PipelineOptions::default();
    PipelineOptions {
        oracle_degree: b.degree.or(d.oracle_degree),
        truncation_multiples: b.truncation_multiples.unwrap_or(d.truncation_multiples),
        pl: pl_options(sc),
        hilbert: hilbert_options(sc),
        oracle_cap: b.oracle_cap.unwrap_or(d.oracle_cap),
    }
}

pub(crate) fn dispatch(
    sc: &Scenario,
    p: &Prepared,
    jobs: Option<usize>,
) -> Result<Dispatched, ScenarioError> {
    match sc.kind {
        Kind::Hilbert => hilbert(sc, p),
        Kind::Saturate => saturate(sc, p),
        Kind::Straighten => straighten(sc, p),
        Kind::Plcone => plcone(sc, p),
        Kind::Fingen => fingen(sc, p),
        Kind::Diophantine => diophantine(sc, p),
        Kind::Counterexample => counterexample(sc, p),
        Kind::Example33 => example33(sc),
        Kind::Suite => suite::run_suite(sc, jobs),
    }
}

fn hilbert(sc: &Scenario, p: &Prepared) -> Result<Dispatched, ScenarioError> {
    let s = p.domain.as_ref().expect("cone fixes the rank");
    let c = p.cone.as_ref().expect("validated");
    let hb = hilbert_basis_intersection_with(s, c, hilbert_options(sc))?;
    let side = sc.bounds.box_side.unwrap_or(20);
    let cert = suite::box_check(s, c, &hb, side)?;
    Ok((
        cert.verdict,
        json!({"hilbert_basis": hb.generators(), "box_check": cert}),
        None,
    ))
}

fn saturate(sc: &Scenario, p: &Prepared) -> Result<Dispatched, ScenarioError> {
    let m = p.system.as_ref().expect("validated");
    let b = &sc.bounds;
    let samples: Vec<LatticePoint> = m.domain().generators().to_vec();
    let mut certs = vec![validate_system(
        m,
        Some(&p.datum),
        b.degree.unwrap_or(12),
        &samples,
        b.chain_length.unwrap_or(4),
    )?];
    certs.extend(saturation_chain(
        m,
        &p.datum,
        b.s_bound.unwrap_or(50),
        b.mu_nu_bound.unwrap_or(12),
    )?);
    let bs = b_on_support(m, &p.datum)?;
    Ok((
        overall(&certs),
        json!({"b": bs, "certificates": certs}),
        None,
    ))
}

fn straighten(sc: &Scenario, p: &Prepared) -> Result<Dispatched, ScenarioError> {
    let m = p.system.as_ref().expect("validated");
    let bs = b_on_support(m, &p.datum)?;
    let points: Vec<RationalPoint> = match &sc.points {
        Some(ps) => ps.clone(),
        None => m
            .domain()
            .generators()
            .iter()
            .map(LatticePoint::to_rational)
            .collect(),
    };
    let mut verdict = Verdict::Pass;
    let mut out = BTreeMap::new();
    for (pt, b) in &bs {
        let opts = if sc.saturation_f.is_some() {
            bounded_index_options(b)
        } else {
            IndexOptions::default()
        };
        let sf = m.straightened(pt, opts);
        let mut rows = Vec::new();
        for x in &points {
            let mut row = json!({"s": x});
            match sf.value(x) {
                Ok(v) => row["value"] = json!(format_rational(&v)),
                Err(e @ Error::IndexNotFound { .. }) => {
                    verdict = verdict.and(Verdict::Inconclusive);
                    row["error"] = json!(e.to_string());
                }
                Err(e) => return Err(e.into()),
            }
            if let Some(l) = x.to_lattice() {
                if let Ok(i) = sf.index(&l) {
                    row["index"] = json!(i);
                    row["m"] =
                        crate::lattice_cone::point::serde_num::int_to_json(&m.coefficient(pt, &l)?);
                }
            }
            rows.push(row);
        }
        out.insert(pt.clone(), json!({"index_options": opts, "values": rows}));
    }
    Ok((verdict, json!({"b": bs, "points": out}), None))
}

fn plcone(sc: &Scenario, p: &Prepared) -> Result<Dispatched, ScenarioError> {
    let m = p.system.as_ref().expect("validated");
    let c = p.cone.as_ref().expect("validated");
    let bs = b_on_support(m, &p.datum)?;
    let opts = pl_options(sc);
    let mut verdict = Verdict::Pass;
    let mut outcomes = BTreeMap::new();
    let mut svg = None;
    for (pt, b) in &bs {
        let index = if sc.saturation_f.is_some() {
            bounded_index_options(b)
        } else {
            IndexOptions::default()
        };
        let sf = m.straightened(pt, index);
        match pl_detect(&sf, c, &opts) {
            Ok(outcome) => {
                if let PlOutcome::Decomposition(d) = &outcome {
                    if svg.is_none() {
                        let cones: Vec<_> = d
                            .pieces
                            .iter()
                            .map(|pc| pc.cone.generators().to_vec())
                            .collect();
                        svg = plot::pieces_svg(&cones);
                    }
                } else {
                    verdict = verdict.and(Verdict::Inconclusive);
                }
                outcomes.insert(pt.clone(), to_value(&outcome));
            }
            Err(Error::Inconclusive(msg)) => {
                verdict = verdict.and(Verdict::Inconclusive);
                outcomes.insert(pt.clone(), json!({"kind": "inconclusive", "note": msg}));
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok((verdict, json!({"b": bs, "outcomes": outcomes}), svg))
}

fn fingen(sc: &Scenario, p: &Prepared) -> Result<Dispatched, ScenarioError> {
    let m = p.system.as_ref().expect("validated");
    let c = p.cone.as_ref().expect("validated");
    match finite_generation_pipeline(m, &p.datum, c, &pipeline_options(sc)) {
        Ok(rep) => {
            let cones: Vec<_> = rep.pieces.iter().map(|pc| pc.rays.clone()).collect();
            Ok((rep.verdict, to_value(&rep), plot::pieces_svg(&cones)))
        }
        Err(Error::Inconclusive(msg)) => Ok((Verdict::Inconclusive, json!({"note": msg}), None)),
        Err(e) => Err(e.into()),
    }
}

fn diophantine(sc: &Scenario, p: &Prepared) -> Result<Dispatched, ScenarioError> {
    let x = p.target.as_ref().expect("validated");
    let b = &sc.bounds;
    let aopts = ApproximantOptions {
        q_min: b.q_min,
        q_max: b.q_max.unwrap_or(1_000_000),
        precision_bits: b
            .precision
            .unwrap_or(crate::diophantine::approx::DEFAULT_PRECISION_BITS),
    };
    let a = find_approximant(x, &aopts)?;
    let sys = match build_u_system(x, &a, aopts.precision_bits) {
        Ok(s) => s,
        Err(e @ Error::Degenerate(_)) => {
            return Ok((
                Verdict::Inconclusive,
                json!({"approximant": a, "note": e.to_string()}),
                None,
            ));
        }
        Err(e) => return Err(e.into()),
    };
    let wopts = WalkOptions {
        steps: b.steps.unwrap_or(100_000),
        ..WalkOptions::default()
    };
    match walk(&sys, None, &wopts) {
        Ok(rep) => {
            let verdict = if rep.passes() {
                Verdict::Pass
            } else {
                Verdict::Fail
            };
            let svg = plot::walk_svg(&rep.checkpoints);
            Ok((
                verdict,
                json!({"approximant": a, "u_system": sys, "walk": rep}),
                svg,
            ))
        }
        Err(e @ Error::AmbiguousStep { .. }) => Ok((
            Verdict::Inconclusive,
            json!({"approximant": a, "u_system": sys, "note": e.to_string()}),
            None,
        )),
        Err(e) => Err(e.into()),
    }
}

fn counterexample(sc: &Scenario, p: &Prepared) -> Result<Dispatched, ScenarioError> {
    let m = p.system.as_ref().expect("validated");
    let b = &sc.bounds;
    let d = CounterexampleOptions::default();
    let opts = CounterexampleOptions {
        additivity_degree: b.additivity_degree.unwrap_or(d.additivity_degree),
        superadditivity_degree: b.degree.unwrap_or(d.superadditivity_degree),
        saturation_bounds: (
            b.s_bound.unwrap_or(d.saturation_bounds.0),
            b.mu_nu_bound.unwrap_or(d.saturation_bounds.1),
        ),
        approach_steps: b.approach_steps.unwrap_or(d.approach_steps),
    };
    let (_, rep) = boundary_counterexample(m, &p.datum, &opts)?;
    Ok((rep.verdict, to_value(&rep), None))
}

fn example33(sc: &Scenario) -> Result<Dispatched, ScenarioError> {
    let f = build_example_3_3();
    let pairs = sc.bounds.pairs.unwrap_or(1000);
    let mut certs = Vec::new();

    let mut values = Certificate::new("marked_values");
    let marked: Vec<Value> = (1..=6)
        .map(|n| {
            values.checked += 1;
            f.value(&x_point(n))
                .map(|v| json!({"n": n, "ray": x_point(n), "value": format_rational(&v)}))
        })
        .collect::<crate::Result<_>>()?;
    if !example::check_recurrence(40)? {
        values.fail(json!({"kind": "recurrence", "n_max": 40}));
    }
    certs.push(values);

    let sample = superadditivity_sample(&f, pairs, sc.seed)?;
    let mut sup = Certificate::new("superadditivity_sample")
        .param("pairs", pairs)
        .param("seed", sc.seed);
    sup.checked = sample.pairs;
    if !sample.holds {
        sup.fail(to_value(&sample.witness));
    }
    certs.push(sup);

    let opts = PlOptions {
        slice: Some(example::probe_slice()),
        ..pl_options(sc)
    };
    let mut pl = Certificate::new("non_pl_evidence")
        .param("max_depth", opts.max_depth)
        .param("evidence_threshold", opts.evidence_threshold);
    let outcome = match pl_detect(&f, &example::probe_cone(), &opts) {
        Ok(o) => {
            if !matches!(o, PlOutcome::Evidence(_)) {
                pl.inconclusive("the probe cone decomposed", json!({"kind": "decomposed"}));
            }
            to_value(&o)
        }
        Err(Error::Inconclusive(msg)) => {
            pl.inconclusive(msg.clone(), json!({"kind": "few_slopes"}));
            json!({"kind": "inconclusive", "note": msg})
        }
        Err(e) => return Err(e.into()),
    };
    certs.push(pl);
    Ok((
        overall(&certs),
        json!({
            "limit": format_rational(&example::limit_value()),
            "marked": marked,
            "superadditivity": sample,
            "pl": outcome,
            "certificates": certs,
        }),
        None,
    ))
}
