use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use super::function::MonoidFunction;
use crate::arith;
use crate::error::{Error, Result};
use crate::lattice_cone::{combine, FgMonoid, LatticePoint};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OnePointVerdict {
    pub holds: bool,
    /// Coefficients `s_i > 0` with `s₀ = Σ s_i e_i`.
    #[serde(serialize_with = "ser_ints")]
    pub coefficients: Vec<BigInt>,
    pub kappa_max: u64,
    pub failure: Option<String>,
}

fn ser_ints<S: serde::Serializer>(v: &[BigInt], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::Serialize;
    v.iter()
        .map(crate::lattice_cone::point::serde_num::int_to_json)
        .collect::<Vec<_>>()
        .serialize(s)
}

/// Coefficients `s_i >= 1` with `s₀ = Σ s_i e_i`, if any exist.
pub fn positive_representation(
    domain: &FgMonoid,
    s0: &LatticePoint,
) -> Result<Option<Vec<BigInt>>> {
    s0.check_dim(domain.dim())?;
    let all = combine(
        domain.generators(),
        &vec![BigInt::one(); domain.generators().len()],
    );
    let rest = s0 - &all;
    if !rest.is_nonnegative() {
        return Ok(None);
    }
    Ok(domain
        .membership(&rest)?
        .map(|w| w.into_iter().map(|c| c + 1).collect()))
}

/// The one-point test for an arbitrary evaluator on the monoid `domain`:
/// `f(s₀) = Σ s_i f(e_i)` and `f(κ s₀) = κ f(s₀)` for `κ <= kappa_max`.
pub fn one_point_additivity_by(
    domain: &FgMonoid,
    s0: &LatticePoint,
    kappa_max: u64,
    eval: impl Fn(&LatticePoint) -> Result<BigRational>,
) -> Result<OnePointVerdict> {
    let coefficients = positive_representation(domain, s0)?.ok_or_else(|| {
        Error::invalid(format!(
            "{s0} has no representation with every generator coefficient positive"
        ))
    })?;
    let mut verdict = OnePointVerdict {
        holds: true,
        coefficients,
        kappa_max,
        failure: None,
    };
    let v0 = eval(s0)?;
    let mut sum = BigRational::zero();
    for (g, c) in domain.generators().iter().zip(&verdict.coefficients) {
        sum += eval(g)? * arith::rat_int(c);
    }
    if v0 != sum {
        verdict.holds = false;
        verdict.failure = Some(format!(
            "f({s0}) = {} but the generator sum is {}",
            arith::format_rational(&v0),
            arith::format_rational(&sum)
        ));
        return Ok(verdict);
    }
    for k in 2..=kappa_max {
        let vk = eval(&s0.scale_u64(k))?;
        if vk != &v0 * arith::rat(k as i64, 1) {
            verdict.holds = false;
            verdict.failure = Some(format!(
                "f({k}·{s0}) = {} differs from {k}·f({s0})",
                arith::format_rational(&vk)
            ));
            return Ok(verdict);
        }
    }
    Ok(verdict)
}

pub fn one_point_additivity(
    f: &MonoidFunction,
    s0: &LatticePoint,
    kappa_max: u64,
) -> Result<OnePointVerdict> {
    one_point_additivity_by(f.domain(), s0, kappa_max, |p| f.evaluate(p))
}

/// Exhaustive additivity `f(p) = Σ λ_i f(e_i)` over every representation
/// found for points up to `degree`; returns the first failing point.
pub fn first_non_additive_point(f: &MonoidFunction, degree: u64) -> Result<Option<LatticePoint>> {
    let gens = f.domain().generators();
    let gvals: Vec<BigRational> = gens.iter().map(|g| f.evaluate(g)).collect::<Result<_>>()?;
    for p in f.domain().elements_up_to_degree(degree)? {
        let w = f
            .domain()
            .membership(&p)?
            .expect("enumerated points are members");
        let lin: BigRational = w
            .iter()
            .zip(&gvals)
            .map(|(c, v)| v * arith::rat_int(c))
            .sum();
        if lin != f.evaluate(&p)? {
            return Ok(Some(p));
        }
    }
    Ok(None)
}
