//! Doubling an additive system off the boundary of `N²` keeps it
//! superadditive and saturated ray by ray, but its straightening jumps by a
//! factor of two across the boundary rays.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use serde_json::json;

use super::certificate::{overall, Certificate, Verdict};
use super::checks::{check_saturation, SaturationDatum};
use super::system::MobileSystem;
use crate::arith::{self, format_rational, rat};
use crate::error::{Error, Result};
use crate::lattice_cone::{FgMonoid, LatticePoint, RationalPoint};
use crate::superlinear::IndexOptions;

#[derive(Clone, Debug)]
pub struct CounterexampleOptions {
    pub additivity_degree: u64,
    pub superadditivity_degree: u64,
    pub saturation_bounds: (u64, u64),
    /// Interior points `(1, 2^-k)` and `(2^-k, 1)` for `k` up to this.
    pub approach_steps: u32,
}

impl Default for CounterexampleOptions {
    fn default() -> Self {
        CounterexampleOptions {
            additivity_degree: 12,
            superadditivity_degree: 20,
            saturation_bounds: (30, 8),
            approach_steps: 10,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundaryRay {
    pub ray: LatticePoint,
    pub point: String,
    #[serde(with = "crate::lattice_cone::point::serde_num::rat")]
    pub boundary_value: BigRational,
    /// Value at `ray` of the linear function that `n♯` equals on the interior.
    #[serde(with = "crate::lattice_cone::point::serde_num::rat")]
    pub interior_limit: BigRational,
    #[serde(serialize_with = "ser_opt_rat")]
    pub jump_factor: Option<BigRational>,
}

fn ser_opt_rat<S: serde::Serializer>(
    v: &Option<BigRational>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    v.as_ref().map(format_rational).serialize(s)
}

#[derive(Clone, Debug, Serialize)]
pub struct CounterexampleReport {
    pub verdict: Verdict,
    pub rays: Vec<BoundaryRay>,
    pub certificates: Vec<Certificate>,
}

fn on_boundary(s: &LatticePoint) -> bool {
    s.coords().iter().any(Zero::is_zero)
}

/// `n(s) = m(s)` on the boundary of `N²`, `m(2s)` inside.
pub fn doubled_system(m: &MobileSystem) -> MobileSystem {
    let inner = m.clone();
    MobileSystem::new(
        m.domain().clone(),
        m.support().iter().cloned(),
        format!("boundary doubling of {}", m.label()),
        m.declared_degree_bound() / 2,
        move |s| {
            if on_boundary(s) {
                inner.evaluate(s)
            } else {
                inner.evaluate(&s.scale_u64(2))
            }
        },
    )
}

fn additivity_certificate(m: &MobileSystem, degree: u64) -> Result<Certificate> {
    let mut cert = Certificate::new("additive_input").param("degree", degree);
    let e = [
        LatticePoint::from_i64s(&[1, 0]),
        LatticePoint::from_i64s(&[0, 1]),
    ];
    let unit = [m.evaluate(&e[0])?, m.evaluate(&e[1])?];
    for s in m.domain().elements_up_to_degree(degree)? {
        cert.checked += 1;
        let expect = unit[0]
            .scale(&s.coords()[0])
            .add(&unit[1].scale(&s.coords()[1]));
        if m.evaluate(&s)? != expect {
            cert.fail(json!({"s": s}));
            break;
        }
    }
    Ok(cert)
}

pub fn boundary_counterexample(
    m: &MobileSystem,
    datum: &SaturationDatum,
    opts: &CounterexampleOptions,
) -> Result<(MobileSystem, CounterexampleReport)> {
    if m.domain() != &FgMonoid::standard(2) {
        return Err(Error::invalid("the construction needs the monoid N²"));
    }
    let add = additivity_certificate(m, opts.additivity_degree)?;
    if !add.passed() {
        return Err(Error::invalid(format!(
            "input system is not additive: {:?}",
            add.witnesses
        )));
    }
    let n = doubled_system(m);
    let mut certs = vec![add];

    let mut sup = Certificate::new("superadditive").param("degree", opts.superadditivity_degree);
    let elems = n
        .domain()
        .elements_up_to_degree(opts.superadditivity_degree)?;
    let deg = |p: &LatticePoint| -> u64 { p.degree().try_into().unwrap_or(u64::MAX) };
    for (i, a) in elems.iter().enumerate() {
        for b in &elems[i..] {
            if deg(a) + deg(b) > opts.superadditivity_degree {
                continue;
            }
            sup.checked += 1;
            if !n
                .evaluate(a)?
                .add(&n.evaluate(b)?)
                .le(&n.evaluate(&(a + b))?)
            {
                sup.fail(json!({"s1": a, "s2": b}));
                break;
            }
        }
        if !sup.passed() {
            break;
        }
    }
    certs.push(sup);
    let (sb, mb) = opts.saturation_bounds;
    certs.push(check_saturation(&n, datum, sb, mb)?);

    let mut jump = Certificate::new("discontinuity").param("approach_steps", opts.approach_steps);
    let mut rays = Vec::new();
    for (axis, ray) in [[1i64, 0], [0, 1]].iter().enumerate() {
        let ray_pt = LatticePoint::from_i64s(ray);
        for p in n.support() {
            let sharp = n.straightened(p, IndexOptions::default());
            let boundary = sharp.value_lattice(&ray_pt)?;
            // interior points approaching the ray
            let near = |k: u32| -> RationalPoint {
                let t = BigRational::new(BigInt::one(), BigInt::one() << k);
                let mut c = vec![BigRational::one(), t];
                if axis == 1 {
                    c.reverse();
                }
                RationalPoint::new(c)
            };
            let v1 = sharp.value(&near(1))?;
            let v2 = sharp.value(&near(2))?;
            // the line through (1/2, v1), (1/4, v2) in the small coordinate, at 0
            let limit = &v2 * rat(2, 1) - &v1;
            for k in 1..=opts.approach_steps {
                jump.checked += 1;
                let t = BigRational::new(BigInt::one(), BigInt::one() << k);
                let v = sharp.value(&near(k))?;
                let predicted = &limit + (&v1 - &limit) * &t * rat(2, 1);
                let gap = arith::abs(&(&v - &boundary));
                if v != predicted || gap * rat(2, 1) < boundary.abs() {
                    jump.fail(json!({
                        "ray": ray_pt, "point": p, "k": k,
                        "value": format_rational(&v), "boundary": format_rational(&boundary),
                    }));
                }
            }
            let factor = (!boundary.is_zero()).then(|| &limit / &boundary);
            if factor != Some(rat(2, 1)) {
                jump.fail(json!({"ray": ray_pt, "point": p, "factor": factor.as_ref().map(format_rational)}));
            }
            rays.push(BoundaryRay {
                ray: ray_pt.clone(),
                point: p.clone(),
                boundary_value: boundary,
                interior_limit: limit,
                jump_factor: factor,
            });
        }
    }
    certs.push(jump);
    let verdict = overall(&certs);
    Ok((
        n,
        CounterexampleReport {
            verdict,
            rays,
            certificates: certs,
        },
    ))
}

/// `m(a, b) = (a + b)·P`.
pub fn sum_system(point: &str) -> Result<MobileSystem> {
    MobileSystem::from_exprs(
        FgMonoid::standard(2),
        &BTreeMap::from([(point.to_string(), "a + b".to_string())]),
    )
}
