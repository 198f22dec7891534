//! Simultaneous approximants `‖q x_i‖ < q^{-1/r}` and the `u_0, …, u_r`
//! system built from them.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use serde::{Serialize, Serializer};

use super::surd::{Interval, Surd};
use crate::arith::{self, rat_int};
use crate::error::{Error, Result};
use crate::lattice_cone::LatticePoint;

/// Default enclosure precision, in bits.
pub const DEFAULT_PRECISION_BITS: u32 = 64;

/// `x = (1, x_1, …, x_r)` with rational or quadratic-surd coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TargetPoint {
    coords: Vec<Surd>,
}

impl TargetPoint {
    pub fn new(coords: Vec<Surd>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::invalid(
                "target point needs at least two coordinates",
            ));
        }
        if coords[0] != Surd::one() {
            return Err(Error::invalid(format!(
                "first coordinate must be 1, found {}",
                coords[0]
            )));
        }
        if let Some(c) = coords.iter().find(|c| !c.is_positive()) {
            return Err(Error::invalid(format!("coordinate {c} is not positive")));
        }
        Ok(TargetPoint { coords })
    }

    /// Reads descriptors like `"1"`, `"3/4"`, `"sqrt(2)"`, `"1/2 + 3/5*sqrt(7)"`.
    pub fn parse<S: AsRef<str>>(descriptors: &[S]) -> Result<Self> {
        let coords = descriptors
            .iter()
            .map(|d| Surd::parse(d.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(coords)
    }

    /// The number `r` of coordinates after the leading 1.
    pub fn rank(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Surd] {
        &self.coords
    }

    pub fn is_rational(&self) -> bool {
        self.coords.iter().all(Surd::is_rational)
    }

    pub fn scaled(&self, q: u64) -> Vec<Surd> {
        let k = arith::rat(q as i64, 1);
        self.coords.iter().map(|c| c.scale(&k)).collect()
    }

    pub fn descriptors(&self) -> Vec<String> {
        self.coords.iter().map(Surd::to_string).collect()
    }
}

impl fmt::Display for TargetPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.descriptors().join(", "))
    }
}

impl Serialize for TargetPoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.descriptors().serialize(s)
    }
}

/// A rational enclosure in report form.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Enclosure {
    pub lo: String,
    pub hi: String,
    pub approx: f64,
}

impl From<&Interval> for Enclosure {
    fn from(iv: &Interval) -> Self {
        Enclosure {
            lo: arith::format_rational(&iv.lo),
            hi: arith::format_rational(&iv.hi),
            approx: iv.mid_f64(),
        }
    }
}

/// `‖α‖` with an enclosure no wider than `2^-bits`.
pub fn nearest_integer_distance(alpha: &Surd, bits: u32) -> (Surd, Interval) {
    let d = alpha.distance_to_nearest_integer();
    let iv = match d.as_rational() {
        Some(r) => Interval::point(r),
        None => d.enclosure_within(&BigRational::new(BigInt::one(), BigInt::one() << bits)),
    };
    (d, iv)
}

#[derive(Clone, Debug, Serialize)]
pub struct Approximant {
    pub q: u64,
    #[serde(serialize_with = "crate::lattice_cone::point::serde_num::serialize_int_vec")]
    pub p: Vec<BigInt>,
    /// Exact `‖q x_i‖`.
    #[serde(skip)]
    pub distances: Vec<Surd>,
    pub errors: Vec<Enclosure>,
    /// Bits at which the strict inequality was first certified, and the
    /// doubled precision of the re-check.
    pub certified_bits: u32,
    pub recheck_bits: u32,
    /// Whether the ball of radius `1/q` around `x` lies in the open orthant.
    pub ball_in_interior: bool,
}

#[derive(Clone, Debug)]
pub struct ApproximantOptions {
    /// Smallest `q` tried; `None` means `r^r + 1`, the least `q` with
    /// `q^{1/r} > r`.
    pub q_min: Option<u64>,
    pub q_max: u64,
    pub precision_bits: u32,
}

impl Default for ApproximantOptions {
    fn default() -> Self {
        ApproximantOptions {
            q_min: None,
            q_max: 1_000_000,
            precision_bits: DEFAULT_PRECISION_BITS,
        }
    }
}

pub fn default_q_min(r: usize) -> u64 {
    (r as u64).checked_pow(r as u32).map_or(u64::MAX, |v| v + 1)
}

/// Decides `q·t^r < 1` from the upper end of an enclosure of `t ≥ 0`.
fn bound_holds(hi: &BigRational, q: u64, r: usize) -> bool {
    let mut v = arith::rat(q as i64, 1);
    for _ in 0..r {
        v *= hi;
    }
    v < BigRational::one()
}

/// Certifies `‖q x_i‖ < q^{-1/r}` from enclosures, refining until decided,
/// then re-checks at twice the bits that decided it.
fn certify(dist: &Surd, q: u64, r: usize, start_bits: u32) -> Option<(u32, u32)> {
    // the sign of q·d^r - 1 is what's being decided, compute it exactly once
    let mut power = Surd::one();
    for _ in 0..r {
        power = &power * dist;
    }
    let exact = (&power.scale(&arith::rat(q as i64, 1)) - &Surd::one()).sign();
    if exact != Ordering::Less {
        return None;
    }
    let mut bits = start_bits;
    loop {
        let hi = match dist.as_rational() {
            Some(v) => v,
            None => dist.enclosure(bits).hi,
        };
        if bound_holds(&hi, q, r) {
            break;
        }
        bits *= 2;
    }
    let hi2 = dist
        .as_rational()
        .unwrap_or_else(|| dist.enclosure(bits * 2).hi);
    bound_holds(&hi2, q, r).then_some((bits, bits * 2))
}

pub fn find_approximant(x: &TargetPoint, opts: &ApproximantOptions) -> Result<Approximant> {
    let r = x.rank();
    let q_min = opts.q_min.unwrap_or_else(|| default_q_min(r)).max(1);
    if opts.q_max < q_min {
        return Err(Error::ApproximantNotFound { q_max: opts.q_max });
    }
    'scan: for q in q_min..=opts.q_max {
        let qx = x.scaled(q);
        let mut p = Vec::with_capacity(r);
        let mut distances = Vec::with_capacity(r);
        let mut errors = Vec::with_capacity(r);
        let mut certified_bits = 0;
        let mut recheck_bits = 0;
        for a in &qx[1..] {
            let (d, iv) = nearest_integer_distance(a, opts.precision_bits);
            match certify(&d, q, r, opts.precision_bits) {
                Some((b, b2)) => {
                    certified_bits = certified_bits.max(b);
                    recheck_bits = recheck_bits.max(b2);
                }
                None => continue 'scan,
            }
            p.push(a.round());
            distances.push(d);
            errors.push(Enclosure::from(&iv));
        }
        let inv_q = Surd::from_rational(arith::rat(1, q as i64));
        let ball_in_interior = x
            .coords()
            .iter()
            .all(|c| c.cmp_value(&inv_q) == Ordering::Greater);
        return Ok(Approximant {
            q,
            p,
            distances,
            errors,
            certified_bits,
            recheck_bits,
            ball_in_interior,
        });
    }
    Err(Error::ApproximantNotFound { q_max: opts.q_max })
}

/// `u_0 = q e_0 + Σ p_i e_i`, `u_i` with `p_i` swapped for the other of
/// `⌊q x_i⌋, ⌈q x_i⌉`, and the convex weights of `q x`.
#[derive(Clone, Debug, Serialize)]
pub struct USystem {
    pub q: u64,
    pub u: Vec<LatticePoint>,
    /// Exact weights: `1 - Σ‖q x_i‖` then `‖q x_1‖, …, ‖q x_r‖`.
    #[serde(skip)]
    pub weights: Vec<Surd>,
    #[serde(rename = "weights")]
    pub weight_enclosures: Vec<Enclosure>,
    #[serde(skip)]
    pub target: Vec<Surd>,
    /// `‖Σ w_i u_i - q x‖_∞`, zero when the relation is exact.
    pub relation_residual: Enclosure,
    pub relation_exact: bool,
}

impl USystem {
    pub fn rank(&self) -> usize {
        self.u.len() - 1
    }

    pub fn weights_f64(&self) -> Vec<f64> {
        self.weights.iter().map(Surd::to_f64).collect()
    }
}

pub fn build_u_system(x: &TargetPoint, a: &Approximant, precision_bits: u32) -> Result<USystem> {
    let r = x.rank();
    if a.p.len() != r {
        return Err(Error::DimensionMismatch {
            expected: r,
            found: a.p.len(),
        });
    }
    let qx = x.scaled(a.q);
    let q = BigInt::from(a.q);
    let mut weights = vec![Surd::one()];
    let mut integral = Vec::new();
    for (i, a_i) in qx[1..].iter().enumerate() {
        let d = (a_i - &Surd::from_rational(rat_int(&a.p[i]))).abs();
        if a_i.distance_to_nearest_integer() != d {
            return Err(Error::invalid(format!(
                "p_{} = {} is not the nearest integer to {a_i}",
                i + 1,
                a.p[i]
            )));
        }
        if d.is_zero() {
            integral.push(i + 1);
        }
        weights[0] = &weights[0] - &d;
        weights.push(d);
    }
    if !integral.is_empty() && !x.is_rational() {
        return Err(Error::Degenerate(integral));
    }
    if !weights[0].is_positive() && !weights[0].is_zero() {
        return Err(Error::invalid("weights of the approximant sum past 1"));
    }
    let mut u0 = vec![q.clone()];
    u0.extend(a.p.iter().cloned());
    let mut u = vec![LatticePoint::new(u0.clone())];
    for i in 1..=r {
        let mut ui = u0.clone();
        let below = qx[i].cmp_value(&Surd::from_rational(rat_int(&a.p[i - 1]))) == Ordering::Less;
        ui[i] = if below { &ui[i] - 1 } else { &ui[i] + 1 };
        u.push(LatticePoint::new(ui));
    }
    if u.iter().any(|v| v.coords().iter().any(Signed::is_negative)) {
        return Err(Error::invalid("u-system has a negative coordinate"));
    }
    let mut residual = Surd::zero();
    let mut exact = true;
    for c in 0..=r {
        let mut s = Surd::zero();
        for (w, ui) in weights.iter().zip(&u) {
            s = &s + &w.scale(&rat_int(&ui.coords()[c]));
        }
        let diff = (&s - &qx[c]).abs();
        if !diff.is_zero() {
            exact = false;
        }
        if diff.cmp_value(&residual) == Ordering::Greater {
            residual = diff;
        }
    }
    let width = BigRational::new(BigInt::one(), BigInt::one() << precision_bits);
    let enclose = |s: &Surd| match s.as_rational() {
        Some(v) => Interval::point(v),
        None => s.enclosure_within(&width),
    };
    Ok(USystem {
        q: a.q,
        u,
        weight_enclosures: weights
            .iter()
            .map(|w| Enclosure::from(&enclose(w)))
            .collect(),
        weights,
        target: qx,
        relation_residual: Enclosure::from(&enclose(&residual)),
        relation_exact: exact,
    })
}

/// Integer-scaled enclosure `[lo, hi]·2^-SCALE` of a surd, for quick sign tests.
pub(crate) const SCALE: u32 = 60;

pub(crate) fn scaled_enclosure(s: &Surd) -> (i128, i128) {
    let iv = s.enclosure(SCALE + 8);
    let k = arith::rat_int(&(BigInt::one() << SCALE));
    let lo = arith::floor(&(&iv.lo * &k));
    let hi = arith::ceil(&(&iv.hi * &k));
    (
        lo.to_i128().unwrap_or(i128::MIN / 4),
        hi.to_i128().unwrap_or(i128::MAX / 4),
    )
}
