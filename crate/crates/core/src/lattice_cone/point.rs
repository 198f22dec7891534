use std::fmt;
use std::ops::{Add, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::arith::{self, format_rational, parse_rational};
use crate::error::{Error, Result};

/// A point of Z^r. Elements of monoids live in N^r.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticePoint(pub Vec<BigInt>);

impl LatticePoint {
    pub fn new(coords: Vec<BigInt>) -> Self {
        LatticePoint(coords)
    }

    pub fn from_i64s(coords: &[i64]) -> Self {
        LatticePoint(coords.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero(dim: usize) -> Self {
        LatticePoint(vec![BigInt::zero(); dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[BigInt] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.0.iter().all(|c| !c.is_negative())
    }

    /// Coordinate sum; the grading used for every degree bound.
    pub fn degree(&self) -> BigInt {
        self.0.iter().sum()
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        LatticePoint(self.0.iter().map(|c| c * k).collect())
    }

    pub fn scale_u64(&self, k: u64) -> Self {
        self.scale(&BigInt::from(k))
    }

    pub fn to_rational(&self) -> RationalPoint {
        RationalPoint(self.0.iter().map(arith::rat_int).collect())
    }

    pub fn to_i64s(&self) -> Result<Vec<i64>> {
        self.0.iter().map(arith::to_i64).collect()
    }

    /// Componentwise `self <= other`.
    pub fn le(&self, other: &Self) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub(crate) fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: self.dim(),
            });
        }
        Ok(())
    }
}

impl Add for &LatticePoint {
    type Output = LatticePoint;
    fn add(self, rhs: &LatticePoint) -> LatticePoint {
        LatticePoint(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &LatticePoint {
    type Output = LatticePoint;
    fn sub(self, rhs: &LatticePoint) -> LatticePoint {
        LatticePoint(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// A point of Q^r.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RationalPoint(pub Vec<BigRational>);

impl RationalPoint {
    pub fn new(coords: Vec<BigRational>) -> Self {
        RationalPoint(coords)
    }

    pub fn from_ratios(coords: &[(i64, i64)]) -> Self {
        RationalPoint(coords.iter().map(|&(n, d)| arith::rat(n, d)).collect())
    }

    pub fn from_i64s(coords: &[i64]) -> Self {
        RationalPoint(coords.iter().map(|&n| arith::rat(n, 1)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[BigRational] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        arith::is_zero_vec(&self.0)
    }

    pub fn scale(&self, k: &BigRational) -> Self {
        RationalPoint(self.0.iter().map(|c| c * k).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        RationalPoint(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        RationalPoint(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    /// Sup norm.
    pub fn norm_inf(&self) -> BigRational {
        self.0
            .iter()
            .map(|c| c.abs())
            .max()
            .unwrap_or_else(BigRational::zero)
    }

    /// Least common multiple of the coordinate denominators.
    pub fn denominator_lcm(&self) -> BigInt {
        arith::lcm_of_denominators(&self.0)
    }

    /// `Some` when every coordinate is an integer.
    pub fn to_lattice(&self) -> Option<LatticePoint> {
        self.0
            .iter()
            .map(|c| c.is_integer().then(|| c.to_integer()))
            .collect::<Option<Vec<_>>>()
            .map(LatticePoint)
    }

    /// Primitive integer vector on the ray through `self`.
    pub fn primitive(&self) -> LatticePoint {
        LatticePoint(arith::primitive_integer(&self.0))
    }

    pub(crate) fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: self.dim(),
            });
        }
        Ok(())
    }
}

impl fmt::Display for RationalPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", format_rational(c))?;
        }
        write!(f, ")")
    }
}

/// Serde helpers: integers as JSON numbers when they fit in i64 (strings
/// otherwise), rationals always as `"p/q"` strings. Both accept either form.
pub mod serde_num {
    use super::*;

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum NumOrStr {
        Int(i64),
        Str(String),
    }

    pub fn int_to_json(v: &BigInt) -> serde_json::Value {
        match arith::to_i64(v) {
            Ok(i) => serde_json::Value::from(i),
            Err(_) => serde_json::Value::from(v.to_string()),
        }
    }

    pub fn rat_to_json(v: &BigRational) -> serde_json::Value {
        serde_json::Value::from(format_rational(v))
    }

    pub fn serialize_int<S: Serializer>(v: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
        int_to_json(v).serialize(s)
    }

    pub fn deserialize_int<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<BigInt, D::Error> {
        match NumOrStr::deserialize(d)? {
            NumOrStr::Int(i) => Ok(BigInt::from(i)),
            NumOrStr::Str(s) => s
                .trim()
                .parse::<BigInt>()
                .map_err(|_| serde::de::Error::custom(format!("not an integer: {s:?}"))),
        }
    }

    pub fn serialize_rat<S: Serializer>(
        v: &BigRational,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(v))
    }

    pub fn deserialize_rat<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<BigRational, D::Error> {
        match NumOrStr::deserialize(d)? {
            NumOrStr::Int(i) => Ok(arith::rat(i, 1)),
            NumOrStr::Str(s) => parse_rational(&s).map_err(serde::de::Error::custom),
        }
    }

    pub mod rat {
        pub use super::deserialize_rat as deserialize;
        pub use super::serialize_rat as serialize;
    }

    pub mod int {
        pub use super::deserialize_int as deserialize;
        pub use super::serialize_int as serialize;
    }

    pub fn serialize_int_vec<S: Serializer>(
        v: &[BigInt],
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        v.iter().map(int_to_json).collect::<Vec<_>>().serialize(s)
    }

    pub fn serialize_rat_vec<S: Serializer>(
        v: &[BigRational],
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        v.iter()
            .map(format_rational)
            .collect::<Vec<_>>()
            .serialize(s)
    }
}

#[derive(Serialize, Deserialize)]
struct IntWrap(#[serde(with = "serde_num::int")] BigInt);

#[derive(Serialize, Deserialize)]
struct RatWrap(#[serde(with = "serde_num::rat")] BigRational);

impl Serialize for LatticePoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<serde_json::Value> = self.0.iter().map(serde_num::int_to_json).collect();
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for LatticePoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v: Vec<IntWrap> = Vec::deserialize(d)?;
        Ok(LatticePoint(v.into_iter().map(|w| w.0).collect()))
    }
}

impl Serialize for RationalPoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<String> = self.0.iter().map(format_rational).collect();
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for RationalPoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v: Vec<RatWrap> = Vec::deserialize(d)?;
        Ok(RationalPoint(v.into_iter().map(|w| w.0).collect()))
    }
}
