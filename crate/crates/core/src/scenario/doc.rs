use std::collections::BTreeMap;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use super::Overrides;
use crate::curve::{MobileSystem, SaturationDatum};
use crate::diophantine::TargetPoint;
use crate::lattice_cone::point::serde_num;
use crate::lattice_cone::{FgMonoid, LatticePoint, RationalCone, RationalPoint};
use crate::superlinear::function::UNBOUNDED_DEGREE;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Hilbert,
    Saturate,
    Straighten,
    Plcone,
    Fingen,
    Diophantine,
    Counterexample,
    Example33,
    Suite,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Hilbert => "hilbert",
            Kind::Saturate => "saturate",
            Kind::Straighten => "straighten",
            Kind::Plcone => "plcone",
            Kind::Fingen => "fingen",
            Kind::Diophantine => "diophantine",
            Kind::Counterexample => "counterexample",
            Kind::Example33 => "example33",
            Kind::Suite => "suite",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableEntry {
    pub s: LatticePoint,
    pub m: BTreeMap<String, Int>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Int(#[serde(with = "serde_num::int")] pub BigInt);

/// How `m` is given.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SystemDoc {
    /// `m_P(s) = ⌊ℓ_P · s⌋`, coefficients as `"p/q"`.
    FloorLinear {
        forms: BTreeMap<String, RationalPoint>,
    },
    /// `m_P(s)` as an expression such as `"floor((5a+4b)/3)"`.
    Expression {
        components: BTreeMap<String, String>,
    },
    Table {
        support: Vec<String>,
        degree_bound: u64,
        values: Vec<TableEntry>,
    },
}

impl SystemDoc {
    fn rank_hint(&self) -> Option<usize> {
        match self {
            SystemDoc::FloorLinear { forms } => forms.values().next().map(RationalPoint::dim),
            SystemDoc::Table { values, .. } => values.first().map(|e| e.s.dim()),
            SystemDoc::Expression { .. } => None,
        }
    }

    pub fn build(&self, domain: &FgMonoid) -> crate::Result<MobileSystem> {
        match self {
            SystemDoc::FloorLinear { forms } => {
                let forms = forms
                    .iter()
                    .map(|(p, l)| (p.clone(), l.coords().to_vec()))
                    .collect();
                MobileSystem::floor_linear(domain.clone(), &forms)
            }
            SystemDoc::Expression { components } => {
                MobileSystem::from_exprs(domain.clone(), components)
            }
            SystemDoc::Table {
                support,
                degree_bound,
                values,
            } => {
                let mut table = BTreeMap::new();
                for e in values {
                    if e.s.dim() != domain.dim() {
                        return Err(crate::Error::DimensionMismatch {
                            expected: domain.dim(),
                            found: e.s.dim(),
                        });
                    }
                    let d = crate::curve::CurveDivisor::from_pairs(
                        e.m.iter().map(|(p, v)| (p.clone(), v.0.clone())),
                    );
                    table.insert(e.s.clone(), d);
                }
                Ok(MobileSystem::from_table(
                    domain.clone(),
                    support.clone(),
                    table,
                    *degree_bound,
                ))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SuiteCheck {
    /// Random `(S, C)` pairs; every point of `S ∩ C` in the box is a sum of
    /// basis elements.
    Hilbert,
    /// Floor-linear systems through saturation, dichotomy and index bounds.
    Saturation,
    /// Floor-linear systems on random interior cones through the pipeline.
    Fingen,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteDoc {
    pub check: SuiteCheck,
    pub count: u64,
    /// Instance `i` has rank `1 + i mod max_rank`.
    pub max_rank: usize,
    /// Use minima of two floor-linear forms for the saturation suite.
    #[serde(default)]
    pub min_forms: bool,
}

/// Numeric knobs. Absent entries take per-kind defaults, which the report
/// echoes.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bounds {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degree: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_bound: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_nu_bound: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chain_length: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub box_side: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coordinate_bound: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_depth: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa_max: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation_multiples: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_cap: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_min: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_max: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub precision: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pairs: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub additivity_degree: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub approach_steps: Option<u32>,
}

fn fill<T: Copy>(slot: &mut Option<T>, v: T) {
    if slot.is_none() {
        *slot = Some(v);
    }
}

impl Bounds {
    fn fill_defaults(&mut self, kind: Kind, suite: Option<SuiteCheck>) {
        match (kind, suite) {
            (Kind::Hilbert, _) | (Kind::Suite, Some(SuiteCheck::Hilbert)) => {
                fill(&mut self.box_side, 20);
                fill(&mut self.coordinate_bound, 64);
            }
            (Kind::Saturate, _) | (Kind::Suite, Some(SuiteCheck::Saturation)) => {
                fill(&mut self.degree, 12);
                fill(&mut self.s_bound, 50);
                fill(&mut self.mu_nu_bound, 12);
                fill(&mut self.chain_length, 4);
            }
            (Kind::Straighten, _) => {}
            (Kind::Plcone, _) => {
                fill(&mut self.max_depth, 12);
                fill(&mut self.kappa_max, 20);
                fill(&mut self.coordinate_bound, 64);
            }
            (Kind::Fingen, _) | (Kind::Suite, _) => {
                fill(&mut self.degree, 30);
                fill(&mut self.truncation_multiples, 3);
                fill(&mut self.max_depth, 12);
                fill(&mut self.kappa_max, 20);
                fill(&mut self.coordinate_bound, 64);
                fill(
                    &mut self.oracle_cap,
                    crate::curve::pipeline::DEFAULT_ORACLE_CAP,
                );
            }
            (Kind::Diophantine, _) => {
                fill(&mut self.steps, 100_000);
                fill(&mut self.q_max, 1_000_000);
                fill(
                    &mut self.precision,
                    crate::diophantine::approx::DEFAULT_PRECISION_BITS,
                );
            }
            (Kind::Counterexample, _) => {
                fill(&mut self.degree, 20);
                fill(&mut self.additivity_degree, 12);
                fill(&mut self.s_bound, 30);
                fill(&mut self.mu_nu_bound, 8);
                fill(&mut self.approach_steps, 10);
            }
            (Kind::Example33, _) => {
                fill(&mut self.pairs, 1000);
                fill(&mut self.max_depth, 12);
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub kind: Kind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monoid: Option<FgMonoid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cone: Option<RationalCone>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemDoc>,
    /// Support points of the system; must match its components when given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub saturation_f: Option<SaturationDatum>,
    /// Coordinates of `x` for the Diophantine walk, e.g. `["1", "sqrt(2)"]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<Vec<String>>,
    /// Evaluation points for `straighten`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<RationalPoint>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suite: Option<SuiteDoc>,
    #[serde(default)]
    pub bounds: Bounds,
}

/// Validated pieces of a scenario.
pub(crate) struct Prepared {
    pub domain: Option<FgMonoid>,
    pub cone: Option<RationalCone>,
    pub system: Option<MobileSystem>,
    pub datum: SaturationDatum,
    pub target: Option<TargetPoint>,
}

impl Scenario {
    pub fn new(kind: Kind) -> Self {
        Scenario {
            kind,
            seed: 0,
            rank: None,
            monoid: None,
            cone: None,
            system: None,
            support: None,
            saturation_f: None,
            target: None,
            points: None,
            suite: None,
            bounds: Bounds::default(),
        }
    }

    pub(crate) fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(d) = o.degree_bound {
            self.bounds.degree = Some(d);
        }
        if let Some(p) = o.precision {
            self.bounds.precision = Some(p);
        }
    }

    fn rank(&self) -> Option<usize> {
        self.rank
            .or_else(|| self.monoid.as_ref().map(FgMonoid::dim))
            .or_else(|| self.cone.as_ref().map(RationalCone::dim))
            .or_else(|| self.system.as_ref().and_then(SystemDoc::rank_hint))
            .or_else(|| {
                self.points
                    .as_ref()
                    .and_then(|ps| ps.first())
                    .map(RationalPoint::dim)
            })
    }

    fn require(&self, what: &str, present: bool) -> Result<(), String> {
        if present {
            Ok(())
        } else {
            Err(format!(
                "{} scenarios need a {what:?} field",
                self.kind.name()
            ))
        }
    }

    /// Fills defaults and builds the domain, cone, system and target.
    pub(crate) fn prepare(&mut self) -> Result<Prepared, String> {
        self.bounds
            .fill_defaults(self.kind, self.suite.as_ref().map(|s| s.check));
        let needs_system = matches!(
            self.kind,
            Kind::Saturate | Kind::Straighten | Kind::Plcone | Kind::Fingen | Kind::Counterexample
        );
        let needs_cone = matches!(self.kind, Kind::Hilbert | Kind::Plcone | Kind::Fingen);
        if needs_system {
            self.require("system", self.system.is_some())?;
        }
        if needs_cone {
            self.require("cone", self.cone.is_some())?;
        }
        match self.kind {
            Kind::Diophantine => self.require("target", self.target.is_some())?,
            Kind::Suite => {
                self.require("suite", self.suite.is_some())?;
                let s = self.suite.as_ref().expect("checked");
                if s.max_rank == 0 || s.max_rank > 3 {
                    return Err("suite max_rank must be 1, 2 or 3".into());
                }
                if s.check == SuiteCheck::Fingen && s.max_rank > 2 {
                    return Err("the fingen suite supports ranks 1 and 2".into());
                }
            }
            Kind::Counterexample if self.rank().is_some_and(|r| r != 2) => {
                return Err("counterexample scenarios live on N^2".into());
            }
            _ => {}
        }

        let rank = self
            .rank()
            .or((self.kind == Kind::Counterexample).then_some(2));
        let domain = match (&self.monoid, rank) {
            (Some(m), _) => Some(m.clone()),
            (None, Some(r)) if r > 0 => Some(FgMonoid::standard(r)),
            _ => None,
        };
        if let (Some(d), Some(c)) = (&domain, &self.cone) {
            if d.dim() != c.dim() {
                return Err(format!(
                    "monoid has rank {} but the cone has rank {}",
                    d.dim(),
                    c.dim()
                ));
            }
        }
        let system = match &self.system {
            Some(doc) => {
                let d = domain
                    .as_ref()
                    .ok_or("cannot infer the rank; give \"rank\" or \"monoid\"")?;
                let m = doc.build(d).map_err(|e| format!("system: {e}"))?;
                if m.declared_degree_bound() != UNBOUNDED_DEGREE {
                    if let Some(deg) = self
                        .bounds
                        .degree
                        .filter(|&deg| deg > m.declared_degree_bound())
                    {
                        return Err(format!(
                            "degree bound {deg} exceeds the table's declared bound {}",
                            m.declared_degree_bound()
                        ));
                    }
                }
                if let Some(sup) = &self.support {
                    let given: std::collections::BTreeSet<String> = sup.iter().cloned().collect();
                    if &given != m.support() {
                        return Err(format!(
                            "support {sup:?} does not match the system's points {:?}",
                            m.support()
                        ));
                    }
                }
                Some(m)
            }
            None => None,
        };
        let target = match &self.target {
            Some(t) => Some(TargetPoint::parse(t).map_err(|e| format!("target: {e}"))?),
            None => None,
        };
        Ok(Prepared {
            domain,
            cone: self.cone.clone(),
            system,
            datum: self.saturation_f.clone().unwrap_or_default(),
            target,
        })
    }
}
