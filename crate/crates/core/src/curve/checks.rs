//! Boundedness, saturation, the b-constant, and the consequences of
//! saturation checked pointwise.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::certificate::{Certificate, Verdict};
use super::system::MobileSystem;
use crate::arith::{self, format_rational, rat, rat_int};
use crate::error::{Error, Result};
use crate::lattice_cone::LatticePoint;
use crate::superlinear::{compute_index, IndexOptions};

/// `F = Σ -f_P P`, given by the `f_P`; points absent from the map have
/// `f_P = 0`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(
    try_from = "BTreeMap<String, String>",
    into = "BTreeMap<String, String>"
)]
pub struct SaturationDatum {
    f: BTreeMap<String, BigRational>,
}

impl TryFrom<BTreeMap<String, String>> for SaturationDatum {
    type Error = Error;
    fn try_from(m: BTreeMap<String, String>) -> Result<Self> {
        let mut f = BTreeMap::new();
        for (p, v) in m {
            f.insert(p, arith::parse_rational(&v)?);
        }
        SaturationDatum::new(f)
    }
}

impl From<SaturationDatum> for BTreeMap<String, String> {
    fn from(d: SaturationDatum) -> Self {
        d.f.iter()
            .map(|(p, v)| (p.clone(), format_rational(v)))
            .collect()
    }
}

impl SaturationDatum {
    pub fn new(f: BTreeMap<String, BigRational>) -> Result<Self> {
        if let Some((p, v)) = f.iter().find(|(_, v)| **v >= BigRational::one()) {
            return Err(Error::invalid(format!(
                "f at {p} is {}, but saturation data need f < 1",
                format_rational(v)
            )));
        }
        Ok(SaturationDatum { f })
    }

    pub fn single(point: &str, f: BigRational) -> Result<Self> {
        Self::new(BTreeMap::from([(point.to_string(), f)]))
    }

    pub fn f(&self, point: &str) -> BigRational {
        self.f.get(point).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn points(&self) -> impl Iterator<Item = &str> {
        self.f.keys().map(String::as_str)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BConstant {
    #[serde(with = "crate::lattice_cone::point::serde_num::rat")]
    pub f: BigRational,
    #[serde(with = "crate::lattice_cone::point::serde_num::rat")]
    pub b: BigRational,
    /// Set when `f < 1/2`, where straightening changes nothing.
    pub trivial: bool,
}

impl BConstant {
    /// `⌊1/b⌋`.
    pub fn index_cap(&self) -> u64 {
        arith::floor(&(BigRational::one() / &self.b))
            .try_into()
            .expect("b is at most 1/2 and positive")
    }
}

/// `b = min(1 - f, 1/2)` for a single coefficient.
pub fn b_for(f: &BigRational) -> Result<BConstant> {
    if f >= &BigRational::one() {
        return Err(Error::invalid(format!(
            "f = {} is not below 1",
            format_rational(f)
        )));
    }
    let half = rat(1, 2);
    Ok(BConstant {
        f: f.clone(),
        b: arith::min_rat(BigRational::one() - f, half.clone()),
        trivial: f < &half,
    })
}

pub fn compute_b(datum: &SaturationDatum) -> Result<BTreeMap<String, BConstant>> {
    datum
        .f
        .iter()
        .map(|(p, f)| Ok((p.clone(), b_for(f)?)))
        .collect()
}

/// `b` at every support point (points without data have `f = 0`).
pub fn b_on_support(
    m: &MobileSystem,
    datum: &SaturationDatum,
) -> Result<BTreeMap<String, BConstant>> {
    m.support()
        .iter()
        .map(|p| Ok((p.clone(), b_for(&datum.f(p))?)))
        .collect()
}

/// The smallest `b` over the support.
pub fn b_min(bs: &BTreeMap<String, BConstant>) -> BigRational {
    bs.values()
        .map(|c| c.b.clone())
        .min()
        .unwrap_or_else(|| rat(1, 2))
}

fn nonzero_elements(m: &MobileSystem, degree: u64) -> Result<Vec<LatticePoint>> {
    Ok(m.domain()
        .elements_up_to_degree(degree)?
        .into_iter()
        .filter(|p| !p.is_zero())
        .collect())
}

fn points_of(m: &MobileSystem, datum: &SaturationDatum) -> Vec<String> {
    let mut pts: BTreeSet<String> = m.support().clone();
    pts.extend(datum.points().map(str::to_string));
    pts.into_iter().collect()
}

/// Effectivity, support containment and superadditivity to `degree_bound`,
/// plus a monotone-and-bounded surrogate for the ray limits along the
/// doubling chains `s, 2s, 4s, …`.
pub fn validate_system(
    m: &MobileSystem,
    datum: Option<&SaturationDatum>,
    degree_bound: u64,
    ray_samples: &[LatticePoint],
    chain_length: u32,
) -> Result<Certificate> {
    let mut cert = Certificate::new("validate_system")
        .param("degree_bound", degree_bound)
        .param("chain_length", chain_length)
        .param("support", m.support());
    if degree_bound > m.declared_degree_bound() {
        return Err(Error::invalid(format!(
            "degree bound {degree_bound} exceeds declared bound {}",
            m.declared_degree_bound()
        )));
    }
    let elems = nonzero_elements(m, degree_bound)?;
    for s in &elems {
        let d = m.evaluate(s)?;
        cert.checked += 1;
        if let Some(p) = d.support().find(|p| !m.support().contains(*p)) {
            cert.fail(json!({"kind": "support", "s": s, "point": p, "value": d}));
            return Ok(cert);
        }
        if !d.is_effective() {
            cert.fail(json!({"kind": "effective", "s": s, "value": d}));
            return Ok(cert);
        }
    }
    let degs: Vec<u64> = elems
        .iter()
        .map(|p| p.degree().try_into().unwrap_or(u64::MAX))
        .collect();
    for i in 0..elems.len() {
        for j in i..elems.len() {
            if degs[i] + degs[j] > degree_bound {
                break;
            }
            cert.checked += 1;
            let lhs = m.evaluate(&elems[i])?.add(&m.evaluate(&elems[j])?);
            let rhs = m.evaluate(&(&elems[i] + &elems[j]))?;
            if !lhs.le(&rhs) {
                cert.fail(json!({"kind": "superadditive", "s1": elems[i], "s2": elems[j]}));
                return Ok(cert);
            }
        }
    }
    let samples: Vec<LatticePoint> = if ray_samples.is_empty() {
        elems
            .iter()
            .take_while(|p| p.degree() <= BigInt::from(3))
            .cloned()
            .collect()
    } else {
        ray_samples.to_vec()
    };
    let mut exact = true;
    let bound = BigInt::from(m.declared_degree_bound());
    for s in &samples {
        let base = m.evaluate(s)?;
        let mut prev: BTreeMap<String, BigRational> = m
            .support()
            .iter()
            .map(|p| (p.clone(), rat_int(&base.coefficient(p))))
            .collect();
        for k in 1..=chain_length {
            let kappa = BigInt::one() << k;
            let point = s.scale(&kappa);
            if point.degree() > bound {
                cert.note(format!(
                    "chain at {s} stops before 2^{k}: declared degree bound"
                ));
                break;
            }
            let d = m.evaluate(&point)?;
            for p in m.support() {
                let v = rat_int(&d.coefficient(p)) / rat_int(&kappa);
                if v != prev[p] {
                    exact = false;
                }
                if v < prev[p] {
                    cert.inconclusive(
                        "ray-limit surrogate: chain decreased",
                        json!({"kind": "monotone", "s": s, "kappa": kappa.to_string(), "point": p}),
                    );
                }
                if let Some(datum) = datum {
                    let cap = rat_int(&base.coefficient(p)) + datum.f(p);
                    if v > cap {
                        cert.inconclusive(
                            "ray-limit surrogate: chain exceeded m(s) + f",
                            json!({"kind": "bounded", "s": s, "kappa": kappa.to_string(), "point": p}),
                        );
                    }
                }
                prev.insert(p.clone(), v);
            }
        }
    }
    cert.set_param("ray_samples", samples.len());
    cert.set_param("surrogate_exact", exact);
    Ok(cert)
}

/// `⌈(μ/ν) m_P(νs) - f_P⌉ <= m_P(μs)` for every `s` of degree at most
/// `s_bound` and `1 <= μ, ν <= mu_nu_bound`. Witnesses come in (s, μ, ν)
/// order with `s` in degree-lexicographic order.
pub fn check_saturation(
    m: &MobileSystem,
    datum: &SaturationDatum,
    s_bound: u64,
    mu_nu_bound: u64,
) -> Result<Certificate> {
    let mut cert = Certificate::new("check_saturation")
        .param("s_bound", s_bound)
        .param("mu_nu_bound", mu_nu_bound)
        .param("f", datum);
    let points = points_of(m, datum);
    for s in nonzero_elements(m, s_bound)? {
        let values: Vec<_> = (1..=mu_nu_bound)
            .map(|k| m.evaluate(&s.scale_u64(k)))
            .collect::<Result<_>>()?;
        for mu in 1..=mu_nu_bound {
            for nu in 1..=mu_nu_bound {
                for p in &points {
                    cert.checked += 1;
                    let scaled = rat(mu as i64, nu as i64)
                        * rat_int(&values[nu as usize - 1].coefficient(p));
                    let lhs = arith::ceil(&(scaled - datum.f(p)));
                    let rhs = values[mu as usize - 1].coefficient(p);
                    if lhs > rhs {
                        cert.fail(json!({
                            "s": s, "mu": mu, "nu": nu, "point": p,
                            "lhs": lhs.to_string(), "rhs": rhs.to_string(),
                        }));
                        return Ok(cert);
                    }
                }
            }
        }
    }
    Ok(cert)
}

fn dichotomy_index_options(b: &BConstant) -> IndexOptions {
    let cap = b.index_cap();
    IndexOptions {
        cap: cap.max(crate::superlinear::straighten::DEFAULT_INDEX_CAP),
        confirm: (cap + 1).max(crate::superlinear::straighten::DEFAULT_CONFIRM),
    }
}

/// Index options under which the index scan is complete: `λ` runs to
/// `⌊1/b⌋`.
pub fn bounded_index_options(b: &BConstant) -> IndexOptions {
    let cap = b.index_cap();
    IndexOptions {
        cap,
        confirm: (cap + 1).max(crate::superlinear::straighten::DEFAULT_CONFIRM),
    }
}

/// `e_s = m♯(s) - m(s)` is `0` or lies in `[b, 1-b]`, and `m = ⌊m♯⌋`.
pub fn dichotomy_check(
    m: &MobileSystem,
    datum: &SaturationDatum,
    s_bound: u64,
) -> Result<Certificate> {
    let bs = b_on_support(m, datum)?;
    let mut cert = Certificate::new("dichotomy_check")
        .param("s_bound", s_bound)
        .param("b", &bs);
    let elems = nonzero_elements(m, s_bound)?;
    let mut nonzero_gaps = 0u64;
    for (p, b) in &bs {
        let sf = m.straightened(p, dichotomy_index_options(b));
        let upper = BigRational::one() - &b.b;
        for s in &elems {
            cert.checked += 1;
            let sharp = sf.value_lattice(s)?;
            let base = rat_int(&m.coefficient(p, s)?);
            let e = &sharp - &base;
            if !e.is_zero() {
                nonzero_gaps += 1;
            }
            if !(e.is_zero() || (e >= b.b && e <= upper)) {
                cert.fail(json!({"kind": "gap", "s": s, "point": p, "e": format_rational(&e)}));
                return Ok(cert);
            }
            if rat_int(&arith::floor(&sharp)) != base {
                cert.fail(
                    json!({"kind": "floor", "s": s, "point": p, "sharp": format_rational(&sharp)}),
                );
                return Ok(cert);
            }
        }
    }
    cert.set_param("nonzero_gaps", nonzero_gaps);
    Ok(cert)
}

/// `ι_s <= ⌊1/b⌋`, with the index scan capped at `⌊1/b⌋`.
pub fn index_bound_check(
    m: &MobileSystem,
    datum: &SaturationDatum,
    s_bound: u64,
) -> Result<Certificate> {
    let bs = b_on_support(m, datum)?;
    let mut cert = Certificate::new("index_bound_check")
        .param("s_bound", s_bound)
        .param("b", &bs);
    let elems = nonzero_elements(m, s_bound)?;
    let mut max_index = BTreeMap::new();
    for (p, b) in &bs {
        let f = m.component(p);
        let opts = bounded_index_options(b);
        let mut worst = 1;
        for s in &elems {
            cert.checked += 1;
            match compute_index(&f, s, opts) {
                Ok(i) => worst = worst.max(i),
                Err(Error::IndexNotFound { .. }) => {
                    cert.fail(json!({"s": s, "point": p, "cap": opts.cap}));
                    return Ok(cert);
                }
                Err(e) => return Err(e),
            }
        }
        max_index.insert(p.clone(), worst);
    }
    cert.set_param("max_index", max_index);
    Ok(cert)
}

/// `κ m(s) <= m(κs)` at sampled points, and every term of `(φ_1 + φ_2)^κ`
/// for sampled two-term sections.
pub fn truncation_integral_check(
    m: &MobileSystem,
    kappa: u64,
    degree: u64,
    samples: u64,
    seed: u64,
) -> Result<Certificate> {
    let mut cert = Certificate::new("truncation_integral_check")
        .param("kappa", kappa)
        .param("degree", degree)
        .param("samples", samples)
        .param("seed", seed);
    if kappa == 0 {
        return Err(Error::invalid("truncation constant must be positive"));
    }
    let elems = nonzero_elements(m, degree)?;
    if elems.is_empty() {
        return Ok(cert);
    }
    let k = BigInt::from(kappa);
    for s in &elems {
        cert.checked += 1;
        let lhs = m.evaluate(s)?.scale(&k);
        if !lhs.le(&m.evaluate(&s.scale(&k))?) {
            cert.fail(json!({"kind": "monomial", "s": s}));
            return Ok(cert);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let s1 = &elems[rng.gen_range(0..elems.len())];
        let s2 = &elems[rng.gen_range(0..elems.len())];
        let (d1, d2) = (m.evaluate(s1)?, m.evaluate(s2)?);
        for i in 0..=kappa {
            cert.checked += 1;
            let j = kappa - i;
            let point = &s1.scale_u64(i) + &s2.scale_u64(j);
            let pole = d1.scale(&BigInt::from(i)).add(&d2.scale(&BigInt::from(j)));
            if !pole.le(&m.evaluate(&point)?) {
                cert.fail(json!({"kind": "binomial", "s1": s1, "s2": s2, "i": i}));
                return Ok(cert);
            }
        }
    }
    Ok(cert)
}

/// Runs saturation, then the dichotomy and index checks at `s_bound` when
/// saturation held. The last two are skipped (and the verdict is the
/// saturation verdict) otherwise.
pub fn saturation_chain(
    m: &MobileSystem,
    datum: &SaturationDatum,
    s_bound: u64,
    mu_nu_bound: u64,
) -> Result<Vec<Certificate>> {
    let sat = check_saturation(m, datum, s_bound, mu_nu_bound)?;
    if sat.verdict != Verdict::Pass {
        return Ok(vec![sat]);
    }
    Ok(vec![
        sat,
        dichotomy_check(m, datum, s_bound)?,
        index_bound_check(m, datum, s_bound)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::divisor::CurveDivisor;
    use crate::lattice_cone::FgMonoid;

    fn five_thirds() -> MobileSystem {
        let forms = BTreeMap::from([("P".to_string(), vec![rat(5, 3)])]);
        MobileSystem::floor_linear(FgMonoid::standard(1), &forms).unwrap()
    }

    fn expr_system(src: &str) -> MobileSystem {
        let comps = BTreeMap::from([("P".to_string(), src.to_string())]);
        MobileSystem::from_exprs(FgMonoid::standard(1), &comps).unwrap()
    }

    fn f(v: BigRational) -> SaturationDatum {
        SaturationDatum::single("P", v).unwrap()
    }

    #[test]
    fn b_constants() {
        let b = |n, d| b_for(&rat(n, d)).unwrap();
        assert_eq!(b(2, 3).b, rat(1, 3));
        assert!(!b(2, 3).trivial);
        assert_eq!(b(1, 4).b, rat(1, 2));
        assert!(b(1, 4).trivial);
        assert_eq!(b(9, 10).b, rat(1, 10));
        assert_eq!(b(9, 10).index_cap(), 10);
        assert!(!b(1, 2).trivial);
        assert!(b_for(&rat(1, 1)).is_err());
        assert!(SaturationDatum::single("P", rat(3, 2)).is_err());
    }

    #[test]
    fn validation() {
        let m = five_thirds();
        let c = validate_system(&m, Some(&f(rat(2, 3))), 50, &[], 6).unwrap();
        assert!(c.passed(), "{c:?}");
        let add = expr_system("2n");
        let c = validate_system(&add, None, 30, &[], 6).unwrap();
        assert!(c.passed());
        assert_eq!(c.parameters["surrogate_exact"], json!(true));

        let table = BTreeMap::from([
            (LatticePoint::from_i64s(&[1]), CurveDivisor::single("P", 1)),
            (LatticePoint::from_i64s(&[2]), CurveDivisor::single("Q", 2)),
        ]);
        let bad = MobileSystem::from_table(FgMonoid::standard(1), ["P"], table, 2);
        let c = validate_system(&bad, None, 2, &[LatticePoint::from_i64s(&[1])], 1).unwrap();
        assert_eq!(c.verdict, Verdict::Fail);
        assert_eq!(c.witnesses[0]["s"], json!([2]));
        assert_eq!(c.witnesses[0]["kind"], json!("support"));
    }

    #[test]
    fn surrogate_failure_is_inconclusive() {
        // superadditive, but m(2^k)/2^k overshoots m(1) + f
        let m = expr_system("max(0, 2n - 1)");
        let c = validate_system(
            &m,
            Some(&f(rat(1, 3))),
            20,
            &[LatticePoint::from_i64s(&[1])],
            4,
        )
        .unwrap();
        assert_eq!(c.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn saturation_examples() {
        let c = check_saturation(&five_thirds(), &f(rat(2, 3)), 50, 12).unwrap();
        assert!(c.passed());
        assert_eq!(c.checked, 50 * 144);
        let c = check_saturation(&expr_system("3n"), &f(rat(1, 2)), 20, 6).unwrap();
        assert!(c.passed());
        let jump = expr_system("max(min(n, 1), 2n * min(max(n - 1, 0), 1))");
        assert_eq!(
            jump.coefficient("P", &LatticePoint::from_i64s(&[1]))
                .unwrap(),
            BigInt::from(1)
        );
        assert_eq!(
            jump.coefficient("P", &LatticePoint::from_i64s(&[3]))
                .unwrap(),
            BigInt::from(6)
        );
        let c = check_saturation(&jump, &f(rat(1, 2)), 20, 6).unwrap();
        assert_eq!(c.verdict, Verdict::Fail);
        let w = &c.witnesses[0];
        assert_eq!(
            (w["s"].clone(), w["mu"].clone(), w["nu"].clone()),
            (json!([1]), json!(1), json!(2))
        );
    }

    #[test]
    fn three_halves_control() {
        // saturated at f = 1/2 with m♯(1) = 3/2, so f = 1/2 does not force m♯ = m
        let m = expr_system("floor(3n/2)");
        assert!(check_saturation(&m, &f(rat(1, 2)), 50, 12)
            .unwrap()
            .passed());
        let d = dichotomy_check(&m, &f(rat(1, 2)), 50).unwrap();
        assert!(d.passed());
        let c = check_saturation(&m, &f(rat(1, 3)), 50, 12).unwrap();
        assert_eq!(c.verdict, Verdict::Fail);
        let w = &c.witnesses[0];
        assert_eq!(
            (w["s"].clone(), w["mu"].clone(), w["nu"].clone()),
            (json!([1]), json!(1), json!(2))
        );
    }

    #[test]
    fn dichotomy_and_index() {
        let m = five_thirds();
        let d = dichotomy_check(&m, &f(rat(2, 3)), 50).unwrap();
        assert!(d.passed(), "{d:?}");
        let sf = m.straightened("P", IndexOptions::default());
        let one = LatticePoint::from_i64s(&[1]);
        let two = LatticePoint::from_i64s(&[2]);
        assert_eq!(sf.value_lattice(&one).unwrap() - rat(1, 1), rat(2, 3));
        assert_eq!(sf.value_lattice(&two).unwrap() - rat(3, 1), rat(1, 3));
        let i = index_bound_check(&m, &f(rat(2, 3)), 50).unwrap();
        assert!(i.passed());
        assert_eq!(i.parameters["max_index"]["P"], json!(3));
        let add = expr_system("2n");
        let i = index_bound_check(&add, &f(rat(1, 3)), 30).unwrap();
        assert_eq!(i.parameters["max_index"]["P"], json!(1));
    }

    #[test]
    fn index_violation_is_reported() {
        // ⌊5n/3⌋ is not saturated at f = 1/3, and its index 3 exceeds ⌊1/b⌋ = 2
        let i = index_bound_check(&five_thirds(), &f(rat(1, 3)), 10).unwrap();
        assert_eq!(i.verdict, Verdict::Fail);
        assert_eq!(i.witnesses[0]["s"], json!([1]));
    }

    #[test]
    fn truncation_powers() {
        let m = five_thirds();
        let c = truncation_integral_check(&m, 6, 10, 50, 1).unwrap();
        assert!(c.passed());
        assert_eq!(
            m.coefficient("P", &LatticePoint::from_i64s(&[6])).unwrap(),
            BigInt::from(10)
        );
    }
}
