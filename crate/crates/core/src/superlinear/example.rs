//! A superlinear, rational-valued function on a rank-two cone that is not
//! piecewise linear near the ray through `(0,1)`.
//!
//! The domain is the cone over `(-1,1)` and `(1,0)` with monoid
//! `N(-1,1) + N(1,0)`. Put `x_1 = (1,0)` and `x_n = (2^-n, 1)` for
//! `n >= 2`, `a_n = f(x_n)`, and
//!
//! ```text
//! a_2 = 3,  ε_2 = 23/8,
//! a_n = (a_{n-1} + ε_{n-1}) / 2,
//! ε_n = (a_n - 2^-n + ε_{n-1}) / 2.
//! ```
//!
//! The gap `d_n = a_n - ε_n` satisfies `d_n = d_{n-1}/4 + 2^-(n+1)`, so
//! `0 < d_n < 2^-n` and both strict inequalities `a_n - 2^-n < ε_n < ε_{n-1}`
//! hold. The quantity `a_n + 2ε_n` drops by exactly `2^-n` per step, which
//! pins the common limit at `17/6`. The function is linear on each cone
//! spanned by `x_n, x_{n+1}` and on the cone over `(-1,1), (0,1)`.

use std::sync::{Arc, RwLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::straighten::StraightenedFunction;
use crate::arith::{self, rat};
use crate::error::{Error, Result};
use crate::lattice_cone::{RationalCone, RationalPoint};

/// `lim a_n`.
pub fn limit_value() -> BigRational {
    rat(17, 6)
}

fn dyadic(n: u32) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::one() << n)
}

/// The sequences `a_n` and `ε_n`, extended lazily from `n = 2`.
#[derive(Clone, Default)]
pub struct Sequences {
    table: Arc<RwLock<Vec<(BigRational, BigRational)>>>,
}

impl Sequences {
    /// `(a_n, ε_n)` for `n >= 2`.
    pub fn get(&self, n: u32) -> (BigRational, BigRational) {
        assert!(n >= 2, "sequence starts at n = 2");
        let idx = (n - 2) as usize;
        if let Some(v) = self.table.read().expect("sequence lock").get(idx) {
            return v.clone();
        }
        let mut t = self.table.write().expect("sequence lock");
        if t.is_empty() {
            t.push((rat(3, 1), rat(23, 8)));
        }
        while t.len() <= idx {
            let k = t.len() as u32 + 2;
            let (a_prev, e_prev) = t.last().cloned().expect("seeded");
            let a = (&a_prev + &e_prev) / rat(2, 1);
            let e = (&a - dyadic(k) + &e_prev) / rat(2, 1);
            t.push((a, e));
        }
        t[idx].clone()
    }

    pub fn a(&self, n: u32) -> BigRational {
        self.get(n).0
    }

    pub fn epsilon(&self, n: u32) -> BigRational {
        self.get(n).1
    }
}

/// `x_n` as a rational point: `(1,0)` for `n = 1`, `(2^-n, 1)` after.
pub fn x_point(n: u32) -> RationalPoint {
    if n == 1 {
        RationalPoint::from_i64s(&[1, 0])
    } else {
        RationalPoint::new(vec![dyadic(n), BigRational::one()])
    }
}

pub fn domain_cone() -> RationalCone {
    RationalCone::from_i64_rays(2, &[&[-1, 1], &[1, 0]]).expect("valid cone")
}

/// Evaluates the example at a point of the domain cone.
pub fn evaluate(seq: &Sequences, p: &RationalPoint) -> Result<BigRational> {
    let (x, y) = (&p.coords()[0], &p.coords()[1]);
    if y.is_negative() || (x + y).is_negative() {
        return Err(Error::invalid(format!("{p} lies outside the domain cone")));
    }
    if y.is_zero() {
        return Ok(x / rat(2, 1));
    }
    if !x.is_positive() {
        return Ok(limit_value() * y + x);
    }
    let t = x / y;
    let quarter = rat(1, 4);
    if t >= quarter {
        return Ok((x - y * &quarter) / rat(2, 1) + rat(3, 1) * y);
    }
    // 2^-(n+1) <= t < 2^-n
    let mut n = 2u32;
    while t < dyadic(n + 1) {
        n += 1;
    }
    let scale = arith::rat_int(&(BigInt::one() << (n + 1)));
    let alpha = &scale * x - y;
    let beta = rat(2, 1) * y - &scale * x;
    Ok(alpha * seq.a(n) + beta * seq.a(n + 1))
}

pub fn build_example_3_3() -> StraightenedFunction {
    let seq = Sequences::default();
    StraightenedFunction::explicit(
        domain_cone(),
        None,
        "non-PL example on cone<(-1,1),(1,0)>",
        move |p| evaluate(&seq, p),
    )
}

/// The subcone on which the example is probed for piecewise linearity.
pub fn probe_cone() -> RationalCone {
    RationalCone::from_i64_rays(2, &[&[1, 4], &[0, 1]]).expect("valid cone")
}

/// Slice `y = 1`, under which dyadic bisection of the probe cone lands on
/// the breakpoints `x_n`.
pub fn probe_slice() -> RationalPoint {
    RationalPoint::from_i64s(&[0, 1])
}

/// Checks the strict inequalities of the construction up to `n_max`.
pub fn check_recurrence(n_max: u32) -> Result<bool> {
    let seq = Sequences::default();
    for n in 3..=n_max {
        let (a, e) = seq.get(n);
        let e_prev = seq.epsilon(n - 1);
        if !(&a - dyadic(n) < e && e < e_prev) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuperadditivitySample {
    pub pairs: u64,
    pub holds: bool,
    pub witness: Option<(RationalPoint, RationalPoint)>,
}

/// A random point of the linear region `index`: 0 is the cone over
/// `(-1,1), (0,1)`, 1 is `C_1`, and `k >= 2` is `C_k`.
fn sample_in_region(rng: &mut ChaCha8Rng, index: u32) -> RationalPoint {
    let (u, v) = if index == 0 {
        (
            RationalPoint::from_i64s(&[-1, 1]),
            RationalPoint::from_i64s(&[0, 1]),
        )
    } else {
        (x_point(index), x_point(index + 1))
    };
    let alpha = rat(rng.gen_range(0..=12), rng.gen_range(1..=6));
    let beta = rat(rng.gen_range(1..=12), rng.gen_range(1..=6));
    u.scale(&alpha).add(&v.scale(&beta))
}

/// Superadditivity on `pairs` random pairs drawn from two different linear
/// regions each.
pub fn superadditivity_sample(
    f: &StraightenedFunction,
    pairs: u64,
    seed: u64,
) -> Result<SuperadditivitySample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..pairs {
        let r1 = rng.gen_range(0..=10);
        let mut r2 = rng.gen_range(0..=10);
        if r2 == r1 {
            r2 = (r1 + 1) % 11;
        }
        let p = sample_in_region(&mut rng, r1);
        let q = sample_in_region(&mut rng, r2);
        if f.value(&p)? + f.value(&q)? > f.value(&p.add(&q))? {
            return Ok(SuperadditivitySample {
                pairs: i + 1,
                holds: false,
                witness: Some((p, q)),
            });
        }
    }
    Ok(SuperadditivitySample {
        pairs,
        holds: true,
        witness: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_terms() {
        let s = Sequences::default();
        assert_eq!(s.a(2), rat(3, 1));
        assert_eq!(s.epsilon(2), rat(23, 8));
        assert_eq!(s.a(3), rat(47, 16));
        assert_eq!(s.epsilon(3), rat(91, 32));
    }

    #[test]
    fn strict_inequalities_hold() {
        assert!(check_recurrence(80).unwrap());
    }

    #[test]
    fn sequences_approach_the_limit() {
        let s = Sequences::default();
        let gap = |n| (s.a(n) - limit_value()).abs();
        assert!(gap(40) < gap(20));
        assert!(gap(60) < rat(1, 1 << 40));
        // invariant a_n + 2 ε_n = 17/2 + 2^-n
        for n in 2..30 {
            let (a, e) = s.get(n);
            assert_eq!(a + rat(2, 1) * e, rat(17, 2) + dyadic(n));
        }
    }

    #[test]
    fn values_at_the_marked_rays() {
        let f = build_example_3_3();
        let s = Sequences::default();
        assert_eq!(f.value(&x_point(1)).unwrap(), rat(1, 2));
        for n in 2..12 {
            assert_eq!(f.value(&x_point(n)).unwrap(), s.a(n), "n = {n}");
        }
        assert_eq!(
            f.value(&RationalPoint::from_i64s(&[0, 1])).unwrap(),
            rat(17, 6)
        );
        assert_eq!(
            f.value(&RationalPoint::from_i64s(&[-1, 1])).unwrap(),
            rat(11, 6)
        );
    }

    #[test]
    fn homogeneous() {
        let f = build_example_3_3();
        let p = RationalPoint::from_ratios(&[(3, 37), (2, 3)]);
        let k = rat(7, 5);
        assert_eq!(f.value(&p.scale(&k)).unwrap(), k * f.value(&p).unwrap());
    }

    #[test]
    fn superadditive_on_samples() {
        let f = build_example_3_3();
        let r = superadditivity_sample(&f, 300, 7).unwrap();
        assert!(r.holds, "{:?}", r.witness);
    }

    #[test]
    fn probe_yields_slope_evidence_not_a_decomposition() {
        use crate::superlinear::pl::{pl_detect, PlOptions, PlOutcome};
        let f = build_example_3_3();
        let opts = PlOptions {
            slice: Some(probe_slice()),
            ..PlOptions::default()
        };
        match pl_detect(&f, &probe_cone(), &opts).unwrap() {
            PlOutcome::Evidence(e) => {
                assert_eq!(e.distinct_slopes, 12);
                assert_eq!(e.uncertified.len(), 1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
