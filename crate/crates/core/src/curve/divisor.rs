//! Divisors on an affine curve, as finitely supported maps from point names
//! to coefficients.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};

use crate::arith::{self, format_rational};

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CurveDivisor {
    coeffs: BTreeMap<String, BigInt>,
}

impl CurveDivisor {
    pub fn zero() -> Self {
        CurveDivisor::default()
    }

    pub fn from_pairs<S: Into<String>>(pairs: impl IntoIterator<Item = (S, BigInt)>) -> Self {
        let mut d = CurveDivisor::zero();
        for (p, c) in pairs {
            d.add_at(p.into(), &c);
        }
        d
    }

    /// `c·P`.
    pub fn single(point: &str, c: i64) -> Self {
        Self::from_pairs([(point, BigInt::from(c))])
    }

    fn add_at(&mut self, point: String, c: &BigInt) {
        let e = self
            .coeffs
            .entry(point.clone())
            .or_insert_with(BigInt::zero);
        *e += c;
        if e.is_zero() {
            self.coeffs.remove(&point);
        }
    }

    pub fn coefficient(&self, point: &str) -> BigInt {
        self.coeffs.get(point).cloned().unwrap_or_default()
    }

    pub fn support(&self) -> impl Iterator<Item = &str> {
        self.coeffs.keys().map(String::as_str)
    }

    pub fn is_effective(&self) -> bool {
        self.coeffs.values().all(|c| !c.is_negative())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut d = self.clone();
        for (p, c) in &other.coeffs {
            d.add_at(p.clone(), c);
        }
        d
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        Self::from_pairs(self.coeffs.iter().map(|(p, c)| (p.clone(), c * k)))
    }

    /// Componentwise `self <= other`.
    pub fn le(&self, other: &Self) -> bool {
        self.coeffs
            .keys()
            .chain(other.coeffs.keys())
            .all(|p| self.coefficient(p) <= other.coefficient(p))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &BigInt)> {
        self.coeffs.iter().map(|(p, c)| (p.as_str(), c))
    }

    pub fn to_rational(&self) -> RCurveDivisor {
        RCurveDivisor::from_pairs(
            self.coeffs
                .iter()
                .map(|(p, c)| (p.clone(), arith::rat_int(c))),
        )
    }
}

impl fmt::Display for CurveDivisor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_terms(
            f,
            self.coeffs
                .iter()
                .map(|(p, c)| (p, c.to_string(), c.is_negative(), c.abs().is_one())),
        )
    }
}

fn write_terms<'a>(
    f: &mut fmt::Formatter<'_>,
    terms: impl Iterator<Item = (&'a String, String, bool, bool)>,
) -> fmt::Result {
    let mut first = true;
    for (p, c, neg, unit) in terms {
        let mag = c.trim_start_matches('-');
        match (first, neg) {
            (true, true) => f.write_str("-")?,
            (true, false) => {}
            (false, true) => f.write_str(" - ")?,
            (false, false) => f.write_str(" + ")?,
        }
        if unit {
            write!(f, "{p}")?;
        } else {
            write!(f, "{mag}{p}")?;
        }
        first = false;
    }
    if first {
        f.write_str("0")?;
    }
    Ok(())
}

impl Serialize for CurveDivisor {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let m: BTreeMap<&str, serde_json::Value> = self
            .coeffs
            .iter()
            .map(|(p, c)| {
                (
                    p.as_str(),
                    crate::lattice_cone::point::serde_num::int_to_json(c),
                )
            })
            .collect();
        m.serialize(s)
    }
}

/// A divisor with rational coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RCurveDivisor {
    coeffs: BTreeMap<String, BigRational>,
}

impl RCurveDivisor {
    pub fn from_pairs<S: Into<String>>(pairs: impl IntoIterator<Item = (S, BigRational)>) -> Self {
        let mut coeffs = BTreeMap::new();
        for (p, c) in pairs {
            let p = p.into();
            let e: &mut BigRational = coeffs.entry(p.clone()).or_insert_with(BigRational::zero);
            *e += c;
            if e.is_zero() {
                coeffs.remove(&p);
            }
        }
        RCurveDivisor { coeffs }
    }

    pub fn coefficient(&self, point: &str) -> BigRational {
        self.coeffs
            .get(point)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &BigRational)> {
        self.coeffs.iter().map(|(p, c)| (p.as_str(), c))
    }

    /// Componentwise floor.
    pub fn floor(&self) -> CurveDivisor {
        CurveDivisor::from_pairs(
            self.coeffs
                .iter()
                .map(|(p, c)| (p.clone(), arith::floor(c))),
        )
    }
}

impl fmt::Display for RCurveDivisor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_terms(
            f,
            self.coeffs
                .iter()
                .map(|(p, c)| (p, format_rational(c), c.is_negative(), c.abs().is_one())),
        )
    }
}

impl Serialize for RCurveDivisor {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let m: BTreeMap<&str, String> = self
            .coeffs
            .iter()
            .map(|(p, c)| (p.as_str(), format_rational(c)))
            .collect();
        m.serialize(s)
    }
}
