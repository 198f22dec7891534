//! Superadditive systems of effective divisors indexed by a monoid.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, RwLock};

use num_bigint::BigInt;
use num_rational::BigRational;

use super::divisor::CurveDivisor;
use crate::arith;
use crate::error::{Error, Result};
use crate::lattice_cone::{FgMonoid, LatticePoint};
use crate::superlinear::function::UNBOUNDED_DEGREE;
use crate::superlinear::{IndexOptions, MonoidFunction, StraightenedFunction};

pub type DivisorOracle = Arc<dyn Fn(&LatticePoint) -> Result<CurveDivisor> + Send + Sync>;

/// `s ↦ m(s)` with a declared support and degree bound.
#[derive(Clone)]
pub struct MobileSystem {
    domain: FgMonoid,
    support: BTreeSet<String>,
    label: String,
    oracle: DivisorOracle,
    cache: Arc<RwLock<HashMap<LatticePoint, CurveDivisor>>>,
    declared_degree_bound: u64,
}

impl fmt::Debug for MobileSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MobileSystem")
            .field("label", &self.label)
            .field("support", &self.support)
            .field("domain", &self.domain)
            .finish()
    }
}

impl MobileSystem {
    pub fn new<S: Into<String>>(
        domain: FgMonoid,
        support: impl IntoIterator<Item = S>,
        label: impl Into<String>,
        declared_degree_bound: u64,
        oracle: impl Fn(&LatticePoint) -> Result<CurveDivisor> + Send + Sync + 'static,
    ) -> Self {
        MobileSystem {
            domain,
            support: support.into_iter().map(Into::into).collect(),
            label: label.into(),
            oracle: Arc::new(oracle),
            cache: Arc::new(RwLock::new(HashMap::new())),
            declared_degree_bound,
        }
    }

    /// One integer-valued function per support point.
    pub fn from_components(domain: FgMonoid, components: BTreeMap<String, MonoidFunction>) -> Self {
        let label = components
            .iter()
            .map(|(p, f)| format!("{p}: {}", f.label()))
            .collect::<Vec<_>>()
            .join("; ");
        let bound = components
            .values()
            .map(MonoidFunction::declared_degree_bound)
            .min()
            .unwrap_or(UNBOUNDED_DEGREE);
        let support: Vec<String> = components.keys().cloned().collect();
        Self::new(domain, support, label, bound, move |s| {
            let mut pairs = Vec::with_capacity(components.len());
            for (p, f) in &components {
                let v = f.evaluate(s)?;
                if !v.is_integer() {
                    return Err(Error::Oracle(format!(
                        "component {p} takes the non-integral value {} at {s}",
                        arith::format_rational(&v)
                    )));
                }
                pairs.push((p.clone(), v.to_integer()));
            }
            Ok(CurveDivisor::from_pairs(pairs))
        })
    }

    /// `m_P(s)` given by an expression in the coordinates, per point.
    pub fn from_exprs(domain: FgMonoid, components: &BTreeMap<String, String>) -> Result<Self> {
        let mut fs = BTreeMap::new();
        for (p, src) in components {
            fs.insert(p.clone(), MonoidFunction::from_expr(domain.clone(), src)?);
        }
        Ok(Self::from_components(domain, fs))
    }

    /// `m_P(s) = ⌊ℓ_P · s⌋`.
    pub fn floor_linear(
        domain: FgMonoid,
        forms: &BTreeMap<String, Vec<BigRational>>,
    ) -> Result<Self> {
        let mut fs = BTreeMap::new();
        for (p, coeffs) in forms {
            if coeffs.len() != domain.dim() {
                return Err(Error::DimensionMismatch {
                    expected: domain.dim(),
                    found: coeffs.len(),
                });
            }
            let c = coeffs.clone();
            let label = format!(
                "floor({})",
                c.iter()
                    .enumerate()
                    .map(|(i, v)| format!("{}*s{i}", arith::format_rational(v)))
                    .collect::<Vec<_>>()
                    .join(" + ")
            );
            let f = MonoidFunction::new(domain.clone(), label, UNBOUNDED_DEGREE, move |s| {
                Ok(arith::rat_int(&arith::floor(&arith::dot(
                    &c,
                    s.to_rational().coords(),
                ))))
            });
            fs.insert(p.clone(), f);
        }
        Ok(Self::from_components(domain, fs))
    }

    /// Explicit values; points missing from the table are oracle failures.
    pub fn from_table<S: Into<String>>(
        domain: FgMonoid,
        support: impl IntoIterator<Item = S>,
        table: BTreeMap<LatticePoint, CurveDivisor>,
        declared_degree_bound: u64,
    ) -> Self {
        Self::new(domain, support, "table", declared_degree_bound, move |s| {
            if s.is_zero() {
                return Ok(table.get(s).cloned().unwrap_or_default());
            }
            table
                .get(s)
                .cloned()
                .ok_or_else(|| Error::Oracle(format!("no table value at {s}")))
        })
    }

    pub fn domain(&self) -> &FgMonoid {
        &self.domain
    }

    pub fn support(&self) -> &BTreeSet<String> {
        &self.support
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn declared_degree_bound(&self) -> u64 {
        self.declared_degree_bound
    }

    pub fn evaluate(&self, s: &LatticePoint) -> Result<CurveDivisor> {
        s.check_dim(self.domain.dim())?;
        if let Some(d) = self.cache.read().expect("cache lock").get(s) {
            return Ok(d.clone());
        }
        if s.degree() > BigInt::from(self.declared_degree_bound) {
            return Err(Error::Oracle(format!(
                "{s} exceeds the declared degree bound {}",
                self.declared_degree_bound
            )));
        }
        let d = (self.oracle)(s)?;
        self.cache
            .write()
            .expect("cache lock")
            .insert(s.clone(), d.clone());
        Ok(d)
    }

    /// `m_P(s)`.
    pub fn coefficient(&self, point: &str, s: &LatticePoint) -> Result<BigInt> {
        Ok(self.evaluate(s)?.coefficient(point))
    }

    /// The coefficient at one point as a monoid function.
    pub fn component(&self, point: &str) -> MonoidFunction {
        let me = self.clone();
        let p = point.to_string();
        MonoidFunction::new(
            self.domain.clone(),
            format!("{} at {point}", self.label),
            self.declared_degree_bound,
            move |s| Ok(arith::rat_int(&me.coefficient(&p, s)?)),
        )
    }

    /// The straightening of one component.
    pub fn straightened(&self, point: &str, opts: IndexOptions) -> StraightenedFunction {
        StraightenedFunction::from_monoid(self.component(point), opts)
    }

    /// The system seen at a single point.
    pub fn restrict(&self, point: &str) -> MobileSystem {
        let me = self.clone();
        let p = point.to_string();
        MobileSystem::new(
            self.domain.clone(),
            [point],
            format!("{} at {point}", self.label),
            self.declared_degree_bound,
            move |s| {
                Ok(CurveDivisor::from_pairs([(
                    p.clone(),
                    me.coefficient(&p, s)?,
                )]))
            },
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;

    #[test]
    fn floor_linear_values() {
        let forms = BTreeMap::from([("P".to_string(), vec![rat(5, 3)])]);
        let m = MobileSystem::floor_linear(FgMonoid::standard(1), &forms).unwrap();
        let at = |n| m.evaluate(&LatticePoint::from_i64s(&[n])).unwrap();
        assert_eq!(at(1), CurveDivisor::single("P", 1));
        assert_eq!(at(2), CurveDivisor::single("P", 3));
        assert_eq!(at(3), CurveDivisor::single("P", 5));
    }

    #[test]
    fn expressions_and_restriction() {
        let comps = BTreeMap::from([
            ("P".to_string(), "floor((5a+4b)/3)".to_string()),
            ("Q".to_string(), "a+b".to_string()),
        ]);
        let m = MobileSystem::from_exprs(FgMonoid::standard(2), &comps).unwrap();
        let s = LatticePoint::from_i64s(&[1, 1]);
        assert_eq!(
            m.evaluate(&s).unwrap(),
            CurveDivisor::single("P", 3).add(&CurveDivisor::single("Q", 2))
        );
        assert_eq!(
            m.restrict("Q").evaluate(&s).unwrap(),
            CurveDivisor::single("Q", 2)
        );
        assert_eq!(m.component("P").evaluate(&s).unwrap(), rat(3, 1));
    }

    #[test]
    fn non_integral_components_are_rejected() {
        let comps = BTreeMap::from([("P".to_string(), "n/2".to_string())]);
        let m = MobileSystem::from_exprs(FgMonoid::standard(1), &comps).unwrap();
        assert!(matches!(
            m.evaluate(&LatticePoint::from_i64s(&[1])),
            Err(Error::Oracle(_))
        ));
    }

    #[test]
    fn tables_respect_bounds() {
        let table = BTreeMap::from([(LatticePoint::from_i64s(&[1]), CurveDivisor::single("P", 1))]);
        let m = MobileSystem::from_table(FgMonoid::standard(1), ["P"], table, 1);
        assert!(m
            .evaluate(&LatticePoint::from_i64s(&[0]))
            .unwrap()
            .is_zero());
        assert!(m.evaluate(&LatticePoint::from_i64s(&[2])).is_err());
    }
}
