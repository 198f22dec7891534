use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, RwLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use super::function::MonoidFunction;
use crate::arith;
use crate::error::{Error, Result};
use crate::lattice_cone::{ConePosition, FgMonoid, LatticePoint, RationalCone, RationalPoint};

pub const DEFAULT_INDEX_CAP: u64 = 64;
pub const DEFAULT_CONFIRM: u64 = 20;

/// How far to look for a point whose multiple lands in the monoid.
const MAX_MULTIPLE_SEARCH: u64 = 4096;

/// Scan parameters for the index: `λ` runs up to `cap`, and stability
/// `f(μλs) = μ f(λs)` is confirmed for `μ <= confirm`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct IndexOptions {
    pub cap: u64,
    pub confirm: u64,
}

impl Default for IndexOptions {
    fn default() -> Self {
        IndexOptions {
            cap: DEFAULT_INDEX_CAP,
            confirm: DEFAULT_CONFIRM,
        }
    }
}

/// Smallest `λ <= cap` with `f(μλs) = μ f(λs)` for every `μ <= confirm`.
pub fn compute_index(f: &MonoidFunction, s: &LatticePoint, opts: IndexOptions) -> Result<u64> {
    if s.is_zero() {
        return Ok(1);
    }
    'scan: for lambda in 1..=opts.cap {
        let base = s.scale_u64(lambda);
        let v = f.evaluate(&base)?;
        for mu in 2..=opts.confirm {
            let w = f.evaluate(&base.scale_u64(mu))?;
            if w != &v * arith::rat(mu as i64, 1) {
                continue 'scan;
            }
        }
        return Ok(lambda);
    }
    Err(Error::IndexNotFound {
        point: s.to_string(),
        cap: opts.cap,
    })
}

type Explicit = Arc<dyn Fn(&RationalPoint) -> Result<BigRational> + Send + Sync>;

#[derive(Clone)]
enum Source {
    Monoid {
        f: MonoidFunction,
        opts: IndexOptions,
        index_table: Arc<RwLock<HashMap<LatticePoint, u64>>>,
    },
    Explicit(Explicit),
}

/// A positively homogeneous function on a rational cone, either the
/// straightening of a monoid function or given in closed form.
#[derive(Clone)]
pub struct StraightenedFunction {
    source: Source,
    domain_cone: RationalCone,
    lattice: Option<FgMonoid>,
    label: String,
}

impl fmt::Debug for StraightenedFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StraightenedFunction")
            .field("label", &self.label)
            .field("domain_cone", &self.domain_cone)
            .finish()
    }
}

impl StraightenedFunction {
    pub fn from_monoid(f: MonoidFunction, opts: IndexOptions) -> Self {
        StraightenedFunction {
            domain_cone: f.domain().cone(),
            lattice: Some(f.domain().clone()),
            label: format!("straightening of {}", f.label()),
            source: Source::Monoid {
                f,
                opts,
                index_table: Arc::new(RwLock::new(HashMap::new())),
            },
        }
    }

    /// A function given directly on the cone; the caller vouches for
    /// homogeneity and superlinearity.
    pub fn explicit(
        domain_cone: RationalCone,
        lattice: Option<FgMonoid>,
        label: impl Into<String>,
        value: impl Fn(&RationalPoint) -> Result<BigRational> + Send + Sync + 'static,
    ) -> Self {
        StraightenedFunction {
            source: Source::Explicit(Arc::new(value)),
            domain_cone,
            lattice,
            label: label.into(),
        }
    }

    pub fn dim(&self) -> usize {
        self.domain_cone.dim()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn domain_cone(&self) -> &RationalCone {
        &self.domain_cone
    }

    /// The monoid whose points certificates are built from, if any.
    pub fn lattice(&self) -> Option<&FgMonoid> {
        self.lattice.as_ref()
    }

    pub fn base(&self) -> Option<&MonoidFunction> {
        match &self.source {
            Source::Monoid { f, .. } => Some(f),
            Source::Explicit(_) => None,
        }
    }

    pub fn index_options(&self) -> Option<IndexOptions> {
        match &self.source {
            Source::Monoid { opts, .. } => Some(*opts),
            Source::Explicit(_) => None,
        }
    }

    /// Memoized index of a monoid point.
    pub fn index(&self, p: &LatticePoint) -> Result<u64> {
        let Source::Monoid {
            f,
            opts,
            index_table,
        } = &self.source
        else {
            return Err(Error::invalid("explicit functions carry no index table"));
        };
        if let Some(i) = index_table.read().expect("index lock").get(p) {
            return Ok(*i);
        }
        let i = compute_index(f, p, *opts)?;
        index_table
            .write()
            .expect("index lock")
            .insert(p.clone(), i);
        Ok(i)
    }

    /// Smallest positive integer `κ` with `κs` in the monoid.
    pub fn smallest_multiple(&self, s: &RationalPoint) -> Result<BigInt> {
        let monoid = self
            .lattice
            .as_ref()
            .ok_or_else(|| Error::invalid("no lattice domain"))?;
        let l = s.denominator_lcm();
        for j in 1..=MAX_MULTIPLE_SEARCH {
            let k = &l * BigInt::from(j);
            let p = s
                .scale(&arith::rat_int(&k))
                .to_lattice()
                .expect("denominators cleared");
            if p.is_nonnegative() && monoid.contains(&p)? {
                return Ok(k);
            }
        }
        Err(Error::invalid(format!(
            "no multiple of {s} up to {MAX_MULTIPLE_SEARCH} times its denominator lies in the monoid"
        )))
    }

    /// `f(ι κs)/(ι κ)` for an explicit multiple `κ` with `κs` in the monoid.
    pub fn value_with_multiple(&self, s: &RationalPoint, kappa: &BigInt) -> Result<BigRational> {
        let Source::Monoid { f, .. } = &self.source else {
            return Err(Error::invalid("explicit functions have no multiples"));
        };
        let p = s
            .scale(&arith::rat_int(kappa))
            .to_lattice()
            .ok_or_else(|| Error::invalid(format!("{kappa}·{s} is not a lattice point")))?;
        let iota = self.index(&p)?;
        let top = f.evaluate(&p.scale_u64(iota))?;
        Ok(top / arith::rat_int(&(kappa * BigInt::from(iota))))
    }

    pub fn value(&self, s: &RationalPoint) -> Result<BigRational> {
        s.check_dim(self.dim())?;
        if s.is_zero() {
            return Ok(BigRational::zero());
        }
        if self.domain_cone.position(s)? == ConePosition::Outside {
            return Err(Error::invalid(format!("{s} lies outside the domain cone")));
        }
        match &self.source {
            Source::Explicit(g) => g(s),
            Source::Monoid { .. } => {
                let k = self.smallest_multiple(s)?;
                self.value_with_multiple(s, &k)
            }
        }
    }

    pub fn value_lattice(&self, p: &LatticePoint) -> Result<BigRational> {
        self.value(&p.to_rational())
    }
}

/// `f♯(s)` with default index options.
pub fn straighten(f: &MonoidFunction, s: &RationalPoint) -> Result<BigRational> {
    StraightenedFunction::from_monoid(f.clone(), IndexOptions::default()).value(s)
}

/// `f♯(s) - f(s)` at a monoid point.
pub fn straightening_gap(sf: &StraightenedFunction, p: &LatticePoint) -> Result<BigRational> {
    let f = sf
        .base()
        .ok_or_else(|| Error::invalid("explicit functions have no base"))?;
    Ok(sf.value_lattice(p)? - f.evaluate(p)?)
}
