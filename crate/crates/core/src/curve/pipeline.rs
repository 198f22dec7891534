//! Finite generation of `R(X, m(C∩S))` at desk scale: truncation-derived
//! generators over a certified piecewise-linear decomposition, oracle-minimal
//! generators from a max-plus recursion, and an independent check that the
//! generators reach every graded piece.
//!
//! Over an affine curve the degree-`s` piece at a point `P` is spanned by a
//! single section of pole order `m_P(s)`, so a product of generator
//! sections reaches it exactly when some multiset of generator degrees sums
//! to `s` with pole orders summing to `m_P(s)`.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;
use serde_json::json;

use super::certificate::{Certificate, Verdict};
use super::checks::{b_min, b_on_support, bounded_index_options, BConstant, SaturationDatum};
use super::divisor::CurveDivisor;
use super::system::MobileSystem;
use crate::arith;
use crate::error::{Error, Result};
use crate::lattice_cone::{
    hilbert_basis_intersection_with, HilbertOptions, LatticePoint, RationalCone, RationalPoint,
};
use crate::superlinear::pl::{pl_search, PlOptions};

/// Largest degree the graded-piece oracle accepts by default.
pub const DEFAULT_ORACLE_CAP: u64 = 40;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct GeneratorEntry {
    pub s: LatticePoint,
    pub divisor: CurveDivisor,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    TruncationDerived,
    OracleMinimal,
    Given,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeneratorSet {
    pub entries: Vec<GeneratorEntry>,
    pub provenance: Provenance,
    pub degree_bound_checked: u64,
}

impl GeneratorSet {
    /// Entries `(s, m(s))` read off the system.
    pub fn from_points(
        m: &MobileSystem,
        points: &[LatticePoint],
        provenance: Provenance,
    ) -> Result<Self> {
        let mut entries = points
            .iter()
            .map(|s| {
                Ok(GeneratorEntry {
                    s: s.clone(),
                    divisor: m.evaluate(s)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        entries.sort_by(|a, b| (a.s.degree(), &a.s).cmp(&(b.s.degree(), &b.s)));
        entries.dedup();
        Ok(GeneratorSet {
            entries,
            provenance,
            degree_bound_checked: 0,
        })
    }

    pub fn points(&self) -> Vec<LatticePoint> {
        self.entries.iter().map(|e| e.s.clone()).collect()
    }

    /// A copy without the entry at `s`.
    pub fn without(&self, s: &LatticePoint) -> Self {
        GeneratorSet {
            entries: self.entries.iter().filter(|e| &e.s != s).cloned().collect(),
            ..self.clone()
        }
    }
}

/// The points of `C ∩ S` of degree at most `degree`, origin excluded, in
/// degree-lexicographic order.
pub fn cone_points(m: &MobileSystem, c: &RationalCone, degree: u64) -> Result<Vec<LatticePoint>> {
    let mut out = Vec::new();
    for p in m.domain().elements_up_to_degree(degree)? {
        if !p.is_zero() && c.contains_lattice(&p)? {
            out.push(p);
        }
    }
    Ok(out)
}

fn to_i64(p: &LatticePoint) -> Result<Vec<i64>> {
    p.to_i64s()
}

/// Largest total pole order at `point` over multisets of generators whose
/// degrees sum to `target`; `None` when no multiset does.
struct MultisetSearch<'a> {
    gens: &'a [Vec<i64>],
    poles: Vec<BigInt>,
    memo: HashMap<(Vec<i64>, usize), Option<BigInt>>,
}

impl MultisetSearch<'_> {
    fn best(&mut self, rest: &[i64], start: usize) -> Option<BigInt> {
        if rest.iter().all(|&c| c == 0) {
            return Some(BigInt::from(0));
        }
        let key = (rest.to_vec(), start);
        if let Some(v) = self.memo.get(&key) {
            return v.clone();
        }
        let mut best: Option<BigInt> = None;
        for i in start..self.gens.len() {
            let g = &self.gens[i];
            if g.iter().zip(rest).any(|(a, b)| a > b) {
                continue;
            }
            let next: Vec<i64> = rest.iter().zip(g).map(|(a, b)| a - b).collect();
            if let Some(v) = self.best(&next, i) {
                let total = v + &self.poles[i];
                if best.as_ref().map_or(true, |b| &total > b) {
                    best = Some(total);
                }
            }
        }
        self.memo.insert(key, best.clone());
        best
    }
}

fn oracle_on_targets(
    m: &MobileSystem,
    gens: &GeneratorSet,
    targets: &[LatticePoint],
    cert: &mut Certificate,
) -> Result<()> {
    let gen_points: Vec<Vec<i64>> = gens
        .entries
        .iter()
        .map(|e| to_i64(&e.s))
        .collect::<Result<_>>()?;
    for e in &gens.entries {
        if e.divisor != m.evaluate(&e.s)? {
            return Err(Error::invalid(format!(
                "generator at {} does not carry m({})",
                e.s, e.s
            )));
        }
    }
    let mut searches: BTreeMap<String, MultisetSearch> = m
        .support()
        .iter()
        .map(|p| {
            let poles = gens
                .entries
                .iter()
                .map(|e| e.divisor.coefficient(p))
                .collect();
            (
                p.clone(),
                MultisetSearch {
                    gens: &gen_points,
                    poles,
                    memo: HashMap::new(),
                },
            )
        })
        .collect();
    for s in targets {
        let rest = to_i64(s)?;
        let d = m.evaluate(s)?;
        for (p, search) in searches.iter_mut() {
            cert.checked += 1;
            let want = d.coefficient(p);
            match search.best(&rest, 0) {
                Some(v) if v == want => {}
                Some(v) if v > want => {
                    cert.fail(
                        json!({"s": s, "point": p, "best": v.to_string(), "m": want.to_string(),
                        "kind": "exceeds"}),
                    );
                    return Ok(());
                }
                found => {
                    cert.fail(json!({"s": s, "point": p, "m": want.to_string(),
                        "best": found.map(|v| v.to_string()), "kind": "short"}));
                    return Ok(());
                }
            }
        }
    }
    Ok(())
}

/// Checks that for every `s` in `C ∩ S` with degree at most `degree_bound`
/// the best generator combination reaches `m(s)` at every support point.
pub fn graded_piece_oracle(
    m: &MobileSystem,
    gens: &GeneratorSet,
    c: &RationalCone,
    degree_bound: u64,
) -> Result<Certificate> {
    graded_piece_oracle_capped(m, gens, c, degree_bound, DEFAULT_ORACLE_CAP)
}

pub fn graded_piece_oracle_capped(
    m: &MobileSystem,
    gens: &GeneratorSet,
    c: &RationalCone,
    degree_bound: u64,
    cap: u64,
) -> Result<Certificate> {
    if degree_bound > cap {
        return Err(Error::BoundExceeded {
            what: "graded piece oracle degree".into(),
            needed: degree_bound.to_string(),
            bound: cap.to_string(),
        });
    }
    let mut cert = Certificate::new("graded_piece_oracle")
        .param("degree_bound", degree_bound)
        .param("generators", &gens.entries);
    let targets = cone_points(m, c, degree_bound)?;
    oracle_on_targets(m, gens, &targets, &mut cert)?;
    Ok(cert)
}

/// Points `s` of `C ∩ S` up to `degree` that are not reached by sums of
/// smaller points: `m_P(s) > max_{a+b=s} m_P(a) + m_P(b)` at some `P`.
pub fn oracle_minimal_generators(
    m: &MobileSystem,
    c: &RationalCone,
    degree: u64,
) -> Result<GeneratorSet> {
    let pts = cone_points(m, c, degree)?;
    let coords: Vec<Vec<i64>> = pts.iter().map(to_i64).collect::<Result<_>>()?;
    let index: HashMap<&[i64], usize> = coords
        .iter()
        .enumerate()
        .map(|(i, v)| (v.as_slice(), i))
        .collect();
    let values: Vec<CurveDivisor> = pts.iter().map(|p| m.evaluate(p)).collect::<Result<_>>()?;
    let mut gens = Vec::new();
    for (i, s) in coords.iter().enumerate() {
        let mut best: BTreeMap<&str, BigInt> = BTreeMap::new();
        for (a, va) in coords[..i].iter().zip(&values) {
            let b: Vec<i64> = s.iter().zip(a).map(|(x, y)| x - y).collect();
            let Some(&j) = index.get(b.as_slice()) else {
                continue;
            };
            for p in m.support() {
                let v = va.coefficient(p) + values[j].coefficient(p);
                let e = best.entry(p.as_str()).or_insert_with(|| v.clone());
                if v > *e {
                    *e = v;
                }
            }
        }
        let mut needed = best.is_empty();
        for p in m.support() {
            let have = values[i].coefficient(p);
            match best.get(p.as_str()) {
                Some(b) if *b > have => {
                    return Err(Error::invalid(format!(
                        "system is not superadditive at {}",
                        pts[i]
                    )));
                }
                Some(b) if *b < have => needed = true,
                _ => {}
            }
        }
        if needed {
            gens.push(pts[i].clone());
        }
    }
    let mut set = GeneratorSet::from_points(m, &gens, Provenance::OracleMinimal)?;
    set.degree_bound_checked = degree;
    Ok(set)
}

#[derive(Clone, Debug)]
pub struct PipelineOptions {
    /// Degree for oracle-minimal generators and the graded-piece oracle.
    pub oracle_degree: Option<u64>,
    /// Multiples `κt` with `deg t` up to this are checked against the
    /// truncation generators.
    pub truncation_multiples: u64,
    pub pl: PlOptions,
    pub hilbert: HilbertOptions,
    pub oracle_cap: u64,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            oracle_degree: Some(30),
            truncation_multiples: 3,
            pl: PlOptions::default(),
            hilbert: HilbertOptions::default(),
            oracle_cap: DEFAULT_ORACLE_CAP,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PieceSummary {
    pub rays: Vec<RationalPoint>,
    /// Linear functional of `m♯` on the piece, per support point.
    pub functionals: BTreeMap<String, RationalPoint>,
    pub hilbert_basis: Vec<LatticePoint>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PipelineReport {
    pub verdict: Verdict,
    pub hilbert_basis: Vec<LatticePoint>,
    pub b: BTreeMap<String, BConstant>,
    #[serde(with = "crate::lattice_cone::point::serde_num::rat")]
    pub b_min: BigRational,
    #[serde(with = "crate::lattice_cone::point::serde_num::int")]
    pub kappa: BigInt,
    pub pieces: Vec<PieceSummary>,
    pub truncation: GeneratorSet,
    pub oracle_minimal: Option<GeneratorSet>,
    pub certificates: Vec<Certificate>,
}

/// Runs the pipeline on `C`, which must sit inside the interior of the
/// domain cone. PL detection that leaves cells uncertified aborts with an
/// inconclusive error.
pub fn finite_generation_pipeline(
    m: &MobileSystem,
    datum: &SaturationDatum,
    c: &RationalCone,
    opts: &PipelineOptions,
) -> Result<PipelineReport> {
    let domain = m.domain();
    if !domain.cone().contains_in_interior(c)? {
        return Err(Error::invalid(
            "target cone must lie in the interior of the monoid's cone",
        ));
    }
    let hb = hilbert_basis_intersection_with(domain, c, opts.hilbert)?;
    let bs = b_on_support(m, datum)?;
    let bmin = b_min(&bs);
    let cap = arith::floor(&(BigRational::from_integer(1.into()) / &bmin));
    let cap_u64: u64 = cap
        .clone()
        .try_into()
        .map_err(|_| Error::Overflow(cap.to_string()))?;
    let kappa = arith::factorial(cap_u64);

    let points: Vec<String> = m.support().iter().cloned().collect();
    let straightened: Vec<_> = points
        .iter()
        .map(|p| m.straightened(p, bounded_index_options(&bs[p])))
        .collect();
    let refs: Vec<_> = straightened.iter().collect();
    let search = pl_search(&refs, c, &opts.pl)?;
    if !search.uncertified.is_empty() {
        return Err(Error::Inconclusive(format!(
            "{} cells left uncertified at depth {}",
            search.uncertified.len(),
            opts.pl.max_depth
        )));
    }

    let mut pieces = Vec::new();
    let mut trunc_points = BTreeSet::new();
    for piece in &search.pieces {
        let phb = hilbert_basis_intersection_with(domain, &piece.cone, opts.hilbert)?;
        for e in phb.generators() {
            trunc_points.insert(e.scale(&kappa));
        }
        pieces.push(PieceSummary {
            rays: piece.cone.generators().to_vec(),
            functionals: points
                .iter()
                .cloned()
                .zip(piece.functionals.iter().cloned())
                .collect(),
            hilbert_basis: phb.generators().to_vec(),
        });
    }
    let trunc_points: Vec<_> = trunc_points.into_iter().collect();
    let mut truncation =
        GeneratorSet::from_points(m, &trunc_points, Provenance::TruncationDerived)?;

    let mut certificates = Vec::new();
    let mut tcert = Certificate::new("truncation_oracle")
        .param("kappa", kappa.to_string())
        .param("truncation_multiples", opts.truncation_multiples);
    let targets: Vec<LatticePoint> = cone_points(m, c, opts.truncation_multiples)?
        .iter()
        .map(|t| t.scale(&kappa))
        .collect();
    oracle_on_targets(m, &truncation, &targets, &mut tcert)?;
    truncation.degree_bound_checked = targets
        .iter()
        .map(|t| t.degree().try_into().unwrap_or(u64::MAX))
        .max()
        .unwrap_or(0);
    certificates.push(tcert);

    let oracle_minimal = match opts.oracle_degree {
        Some(d) => {
            let gens = oracle_minimal_generators(m, c, d)?;
            certificates.push(graded_piece_oracle_capped(m, &gens, c, d, opts.oracle_cap)?);
            Some(gens)
        }
        None => None,
    };
    let verdict = super::certificate::overall(&certificates);
    Ok(PipelineReport {
        verdict,
        hilbert_basis: hb.generators().to_vec(),
        b: bs,
        b_min: bmin,
        kappa,
        pieces,
        truncation,
        oracle_minimal,
        certificates,
    })
}
