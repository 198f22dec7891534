use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, RwLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use crate::arith;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::lattice_cone::{FgMonoid, LatticePoint};

/// Degree bound attached to closed-form oracles, which are total.
pub const UNBOUNDED_DEGREE: u64 = 1 << 40;

pub type Oracle = Arc<dyn Fn(&LatticePoint) -> Result<BigRational> + Send + Sync>;

/// A rational-valued function on a monoid, backed by a pure oracle and a
/// memo that never changes results.
#[derive(Clone)]
pub struct MonoidFunction {
    domain: FgMonoid,
    label: String,
    oracle: Oracle,
    cache: Arc<RwLock<HashMap<LatticePoint, BigRational>>>,
    declared_degree_bound: u64,
}

impl fmt::Debug for MonoidFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MonoidFunction")
            .field("label", &self.label)
            .field("domain", &self.domain)
            .field("declared_degree_bound", &self.declared_degree_bound)
            .finish()
    }
}

impl MonoidFunction {
    pub fn new(
        domain: FgMonoid,
        label: impl Into<String>,
        declared_degree_bound: u64,
        oracle: impl Fn(&LatticePoint) -> Result<BigRational> + Send + Sync + 'static,
    ) -> Self {
        MonoidFunction {
            domain,
            label: label.into(),
            oracle: Arc::new(oracle),
            cache: Arc::new(RwLock::new(HashMap::new())),
            declared_degree_bound,
        }
    }

    pub fn from_expr(domain: FgMonoid, source: &str) -> Result<Self> {
        let e = Expr::parse(source, domain.dim())?;
        Ok(Self::new(domain, source, UNBOUNDED_DEGREE, move |p| {
            e.eval_int(p.coords())
        }))
    }

    /// The linear function `Σ c_i x_i`.
    pub fn linear(domain: FgMonoid, coeffs: Vec<BigRational>) -> Result<Self> {
        if coeffs.len() != domain.dim() {
            return Err(Error::DimensionMismatch {
                expected: domain.dim(),
                found: coeffs.len(),
            });
        }
        let label = format!(
            "linear({})",
            coeffs
                .iter()
                .map(arith::format_rational)
                .collect::<Vec<_>>()
                .join(",")
        );
        Ok(Self::new(domain, label, UNBOUNDED_DEGREE, move |p| {
            Ok(arith::dot(&coeffs, &p.to_rational().0))
        }))
    }

    /// An explicit value table; points missing from the table are oracle
    /// failures.
    pub fn from_table(
        domain: FgMonoid,
        table: BTreeMap<LatticePoint, BigRational>,
        declared_degree_bound: u64,
    ) -> Self {
        Self::new(domain, "table", declared_degree_bound, move |p| {
            table
                .get(p)
                .cloned()
                .ok_or_else(|| Error::Oracle(format!("no table value at {p}")))
        })
    }

    pub fn domain(&self) -> &FgMonoid {
        &self.domain
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn declared_degree_bound(&self) -> u64 {
        self.declared_degree_bound
    }

    pub fn evaluate(&self, p: &LatticePoint) -> Result<BigRational> {
        p.check_dim(self.domain.dim())?;
        if let Some(v) = self.cache.read().expect("cache lock").get(p) {
            return Ok(v.clone());
        }
        if p.degree() > BigInt::from(self.declared_degree_bound) {
            return Err(Error::Oracle(format!(
                "{p} exceeds the declared degree bound {}",
                self.declared_degree_bound
            )));
        }
        let v = (self.oracle)(p)?;
        self.cache
            .write()
            .expect("cache lock")
            .insert(p.clone(), v.clone());
        Ok(v)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuperadditivityVerdict {
    pub holds: bool,
    pub witness: Option<(LatticePoint, LatticePoint)>,
    pub pairs_checked: u64,
}

/// Checks `f(x) + f(y) <= f(x+y)` over every pair of monoid elements whose
/// degrees sum to at most `degree_bound`. The first violation in
/// (degree, lex) order is the witness.
pub fn check_superadditive(
    f: &MonoidFunction,
    degree_bound: u64,
) -> Result<SuperadditivityVerdict> {
    if degree_bound > f.declared_degree_bound() {
        return Err(Error::invalid(format!(
            "degree bound {degree_bound} exceeds declared bound {}",
            f.declared_degree_bound()
        )));
    }
    let elems = f.domain().elements_up_to_degree(degree_bound)?;
    let degs: Vec<BigInt> = elems.iter().map(LatticePoint::degree).collect();
    let vals: Vec<BigRational> = elems.iter().map(|p| f.evaluate(p)).collect::<Result<_>>()?;
    let bound = BigInt::from(degree_bound);
    let mut checked = 0;
    for i in 0..elems.len() {
        for j in i..elems.len() {
            if &degs[i] + &degs[j] > bound {
                break;
            }
            checked += 1;
            let sum = &elems[i] + &elems[j];
            if &vals[i] + &vals[j] > f.evaluate(&sum)? {
                return Ok(SuperadditivityVerdict {
                    holds: false,
                    witness: Some((elems[i].clone(), elems[j].clone())),
                    pairs_checked: checked,
                });
            }
        }
    }
    Ok(SuperadditivityVerdict {
        holds: true,
        witness: None,
        pairs_checked: checked,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;

    fn n1() -> FgMonoid {
        FgMonoid::standard(1)
    }

    #[test]
    fn floor_five_thirds_is_superadditive() {
        let f = MonoidFunction::from_expr(n1(), "floor(5n/3)").unwrap();
        let v = check_superadditive(&f, 50).unwrap();
        assert!(v.holds);
        assert!(v.pairs_checked > 600);
    }

    #[test]
    fn ceiling_half_fails_at_one_one() {
        let f = MonoidFunction::from_expr(n1(), "ceil(n/2)").unwrap();
        let v = check_superadditive(&f, 50).unwrap();
        assert!(!v.holds);
        let (x, y) = v.witness.unwrap();
        assert_eq!(
            (x, y),
            (LatticePoint::from_i64s(&[1]), LatticePoint::from_i64s(&[1]))
        );
    }

    #[test]
    fn linear_functions_pass() {
        let f = MonoidFunction::linear(FgMonoid::standard(2), vec![rat(2, 3), rat(-1, 1)]).unwrap();
        assert!(check_superadditive(&f, 12).unwrap().holds);
    }

    #[test]
    fn table_oracles_respect_their_bound() {
        let table: BTreeMap<LatticePoint, BigRational> = (0..=6)
            .map(|n| (LatticePoint::from_i64s(&[n]), rat(5 * n / 3, 1)))
            .collect();
        let f = MonoidFunction::from_table(n1(), table, 6);
        assert!(check_superadditive(&f, 6).unwrap().holds);
        assert!(check_superadditive(&f, 7).is_err());
        assert!(matches!(
            f.evaluate(&LatticePoint::from_i64s(&[9])),
            Err(Error::Oracle(_))
        ));
    }
}
