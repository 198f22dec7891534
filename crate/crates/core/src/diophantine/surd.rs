//! Exact arithmetic in `Q(√d_1, √d_2, …)`: finite sums `Σ c_n √n` over
//! squarefree `n`, closed under multiplication. Square roots of distinct
//! squarefree integers are linearly independent over Q, so a sum is zero
//! exactly when every coefficient is, and any other sign is found by
//! refining enclosures until they exclude zero.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{self, format_rational, parse_rational};
use crate::error::{Error, Result};

/// Closed rational interval.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl Interval {
    pub fn point(v: BigRational) -> Self {
        Interval {
            lo: v.clone(),
            hi: v,
        }
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    pub fn mid_f64(&self) -> f64 {
        arith::to_f64(&((&self.lo + &self.hi) / arith::rat(2, 1)))
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}, {}]",
            format_rational(&self.lo),
            format_rational(&self.hi)
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Surd {
    /// Squarefree radicand to coefficient; radicand 1 is the rational part.
    terms: BTreeMap<BigInt, BigRational>,
}

/// Splits `n = k² m` with `m` squarefree.
fn squarefree_split(n: &BigInt) -> Result<(BigInt, BigInt)> {
    let mut m = n
        .to_u64()
        .ok_or_else(|| Error::invalid(format!("radicand {n} is too large")))?;
    if m > 1 << 48 {
        return Err(Error::invalid(format!("radicand {n} is too large")));
    }
    let mut k: u64 = 1;
    let mut rest: u64 = 1;
    let mut p = 2u64;
    while p * p <= m {
        let mut e = 0;
        while m % p == 0 {
            m /= p;
            e += 1;
        }
        k *= p.pow(e / 2);
        if e % 2 == 1 {
            rest *= p;
        }
        p += 1;
    }
    rest *= m;
    Ok((BigInt::from(k), BigInt::from(rest)))
}

impl Surd {
    pub fn zero() -> Self {
        Surd::default()
    }

    pub fn from_rational(r: BigRational) -> Self {
        let mut s = Surd::zero();
        s.push(BigInt::one(), r);
        s
    }

    pub fn from_i64(v: i64) -> Self {
        Self::from_rational(arith::rat(v, 1))
    }

    pub fn one() -> Self {
        Self::from_i64(1)
    }

    /// `c·√n` for a nonnegative integer `n`.
    pub fn term(c: BigRational, n: &BigInt) -> Result<Self> {
        if n.is_negative() {
            return Err(Error::invalid(format!("square root of negative {n}")));
        }
        let mut s = Surd::zero();
        if n.is_zero() {
            return Ok(s);
        }
        let (k, m) = squarefree_split(n)?;
        s.push(m, c * arith::rat_int(&k));
        Ok(s)
    }

    pub fn sqrt(n: i64) -> Result<Self> {
        Self::term(arith::rat(1, 1), &BigInt::from(n))
    }

    fn push(&mut self, radicand: BigInt, c: BigRational) {
        let entry = self
            .terms
            .entry(radicand.clone())
            .or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&radicand);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self.terms.get(&BigInt::one()).cloned(),
            _ => None,
        }
    }

    pub fn is_rational(&self) -> bool {
        self.as_rational().is_some()
    }

    pub fn scale(&self, k: &BigRational) -> Surd {
        let mut s = Surd::zero();
        for (n, c) in &self.terms {
            s.push(n.clone(), c * k);
        }
        s
    }

    /// Enclosure using `√n ∈ [⌊√(n 4^k)⌋, ⌊√(n 4^k)⌋ + 1] / 2^k`.
    pub fn enclosure(&self, bits: u32) -> Interval {
        let mut lo = BigRational::zero();
        let mut hi = BigRational::zero();
        let denom = BigInt::one() << bits;
        for (n, c) in &self.terms {
            if n.is_one() {
                lo += c;
                hi += c;
                continue;
            }
            let s = (n << (2 * bits as usize)).sqrt();
            let a = BigRational::new(s.clone(), denom.clone());
            let b = BigRational::new(s + 1, denom.clone());
            if c.is_positive() {
                lo += c * &a;
                hi += c * &b;
            } else {
                lo += c * &b;
                hi += c * &a;
            }
        }
        Interval { lo, hi }
    }

    /// Enclosure no wider than `width`.
    pub fn enclosure_within(&self, width: &BigRational) -> Interval {
        let mut bits = 32;
        loop {
            let iv = self.enclosure(bits);
            if &iv.width() <= width {
                return iv;
            }
            bits *= 2;
        }
    }

    pub fn sign(&self) -> Ordering {
        if self.is_zero() {
            return Ordering::Equal;
        }
        let mut bits = 24;
        loop {
            let iv = self.enclosure(bits);
            if iv.lo.is_positive() {
                return Ordering::Greater;
            }
            if iv.hi.is_negative() {
                return Ordering::Less;
            }
            bits *= 2;
        }
    }

    pub fn is_positive(&self) -> bool {
        self.sign() == Ordering::Greater
    }

    pub fn is_negative(&self) -> bool {
        self.sign() == Ordering::Less
    }

    pub fn abs(&self) -> Surd {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    pub fn floor(&self) -> BigInt {
        if let Some(r) = self.as_rational() {
            return arith::floor(&r);
        }
        let mut bits = 24;
        loop {
            let iv = self.enclosure(bits);
            let m = arith::floor(&iv.lo);
            if arith::floor(&iv.hi) == m {
                return m;
            }
            let below = self - &Surd::from_rational(arith::rat_int(&(&m + 1)));
            if below.is_negative() {
                return m;
            }
            bits *= 2;
        }
    }

    pub fn ceil(&self) -> BigInt {
        -(-self).floor()
    }

    /// Nearest integer; exact halves round down.
    pub fn round(&self) -> BigInt {
        let f = self.floor();
        let frac = self - &Surd::from_rational(arith::rat_int(&f));
        if frac.cmp_value(&Surd::from_rational(arith::rat(1, 2))) == Ordering::Greater {
            f + 1
        } else {
            f
        }
    }

    /// `‖α‖ = min(α - ⌊α⌋, ⌈α⌉ - α)` as an exact element.
    pub fn distance_to_nearest_integer(&self) -> Surd {
        let r = self.round();
        (self - &Surd::from_rational(arith::rat_int(&r))).abs()
    }

    pub fn cmp_value(&self, other: &Surd) -> Ordering {
        (self - other).sign()
    }

    /// Nearest f64, refining an exact enclosure so cancelling terms keep
    /// full relative precision.
    pub fn to_f64(&self) -> f64 {
        if let Some(q) = self.as_rational() {
            return arith::to_f64(&q);
        }
        let mut bits = 64;
        loop {
            let iv = self.enclosure(bits);
            let tight = iv.lo.signum() == iv.hi.signum()
                && iv.width() * BigRational::from_integer(BigInt::one() << 60u32) <= iv.lo.abs();
            if tight || bits >= 1 << 14 {
                return iv.mid_f64();
            }
            bits *= 2;
        }
    }

    pub fn radicands(&self) -> impl Iterator<Item = &BigInt> {
        self.terms.keys()
    }

    /// Parses sums like `1/2 + 3/5*sqrt(7) - sqrt(3)`.
    pub fn parse(s: &str) -> Result<Surd> {
        let text: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if text.is_empty() {
            return Err(Error::Parse("empty number".into()));
        }
        let mut out = Surd::zero();
        let mut rest = text.as_str();
        let mut first = true;
        while !rest.is_empty() {
            let mut sign = BigRational::one();
            if let Some(r) = rest.strip_prefix('+') {
                rest = r;
            } else if let Some(r) = rest.strip_prefix('-') {
                rest = r;
                sign = -sign;
            } else if !first {
                return Err(Error::Parse(format!("expected '+' or '-' in {s:?}")));
            }
            first = false;
            let end = rest[1.min(rest.len())..]
                .find(['+', '-'])
                .map_or(rest.len(), |i| i + 1);
            let (term, tail) = rest.split_at(end);
            rest = tail;
            out = &out + &parse_term(term, s)?.scale(&sign);
        }
        Ok(out)
    }
}

fn parse_term(term: &str, whole: &str) -> Result<Surd> {
    let bad = || Error::Parse(format!("cannot read term {term:?} in {whole:?}"));
    let (coeff, radical) = match term.find("sqrt(") {
        Some(i) => {
            let inner = term[i + 5..].strip_suffix(')').ok_or_else(bad)?;
            let n: BigInt = inner.parse().map_err(|_| bad())?;
            let c = term[..i].strip_suffix('*').unwrap_or(&term[..i]);
            (c, Some(n))
        }
        None => (term, None),
    };
    let c = if coeff.is_empty() {
        BigRational::one()
    } else {
        parse_rational(coeff).map_err(|_| bad())?
    };
    match radical {
        Some(n) => Surd::term(c, &n),
        None => Ok(Surd::from_rational(c)),
    }
}

impl Add for &Surd {
    type Output = Surd;
    fn add(self, rhs: &Surd) -> Surd {
        let mut s = self.clone();
        for (n, c) in &rhs.terms {
            s.push(n.clone(), c.clone());
        }
        s
    }
}

impl Sub for &Surd {
    type Output = Surd;
    fn sub(self, rhs: &Surd) -> Surd {
        let mut s = self.clone();
        for (n, c) in &rhs.terms {
            s.push(n.clone(), -c);
        }
        s
    }
}

impl Neg for &Surd {
    type Output = Surd;
    fn neg(self) -> Surd {
        self.scale(&-BigRational::one())
    }
}

impl Mul for &Surd {
    type Output = Surd;
    fn mul(self, rhs: &Surd) -> Surd {
        let mut s = Surd::zero();
        for (a, ca) in &self.terms {
            for (b, cb) in &rhs.terms {
                let g = a.gcd(b);
                let key = (a / &g) * (b / &g);
                s.push(key, ca * cb * arith::rat_int(&g));
            }
        }
        s
    }
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (n, c)) in self.terms.iter().enumerate() {
            let mag = c.abs();
            if i == 0 {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else if c.is_negative() {
                f.write_str(" - ")?;
            } else {
                f.write_str(" + ")?;
            }
            if n.is_one() {
                f.write_str(&format_rational(&mag))?;
            } else if mag.is_one() {
                write!(f, "sqrt({n})")?;
            } else {
                write!(f, "{}*sqrt({n})", format_rational(&mag))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;

    #[test]
    fn to_f64_survives_cancellation() {
        // (99 - 70√2) = 1/(99 + 70√2)
        let s = Surd::parse("99 - 70*sqrt(2)").unwrap();
        let want = 1.0 / (99.0 + 70.0 * 2f64.sqrt());
        assert!((s.to_f64() - want).abs() <= want * 1e-15, "{}", s.to_f64());
        let tiny = &(&s * &s) * &(&s * &s);
        let want4 = want.powi(4);
        assert!((tiny.to_f64() - want4).abs() <= want4 * 1e-14);
    }

    #[test]
    fn parsing_and_display() {
        let s = Surd::parse("1/2 + 3/5*sqrt(7)").unwrap();
        assert_eq!(s.to_string(), "1/2 + 3/5*sqrt(7)");
        assert_eq!(Surd::parse("sqrt(8)").unwrap().to_string(), "2*sqrt(2)");
        assert_eq!(Surd::parse("sqrt(9)").unwrap(), Surd::from_i64(3));
        assert_eq!(
            Surd::parse("-3/4").unwrap(),
            Surd::from_rational(rat(-3, 4))
        );
        assert_eq!(
            Surd::parse("2sqrt(3) - sqrt(3)").unwrap(),
            Surd::sqrt(3).unwrap()
        );
        assert!(Surd::parse("sqrt(x)").is_err());
        assert!(Surd::parse("").is_err());
        assert!(Surd::parse("sqrt(-2)").is_err());
    }

    #[test]
    fn products_stay_in_the_field() {
        let r2 = Surd::sqrt(2).unwrap();
        let r6 = Surd::sqrt(6).unwrap();
        assert_eq!(&r2 * &r2, Surd::from_i64(2));
        assert_eq!(&r2 * &r6, Surd::parse("2*sqrt(3)").unwrap());
        let x = Surd::parse("1 + sqrt(2)").unwrap();
        let y = Surd::parse("-1 + sqrt(2)").unwrap();
        assert_eq!(&x * &y, Surd::from_i64(1));
    }

    #[test]
    fn exact_signs() {
        let d = &Surd::parse("sqrt(2) + sqrt(3)").unwrap() - &Surd::parse("sqrt(10)").unwrap();
        assert_eq!(d.sign(), Ordering::Less);
        // 99/70 is a convergent of sqrt(2) from above
        let e = &Surd::sqrt(2).unwrap() - &Surd::from_rational(rat(99, 70));
        assert_eq!(e.sign(), Ordering::Less);
        assert_eq!(Surd::zero().sign(), Ordering::Equal);
    }

    #[test]
    fn floors_and_distances() {
        let r2 = Surd::sqrt(2).unwrap();
        assert_eq!(r2.floor(), BigInt::from(1));
        assert_eq!(r2.ceil(), BigInt::from(2));
        assert_eq!((-&r2).floor(), BigInt::from(-2));
        let d = r2.distance_to_nearest_integer();
        assert_eq!(d, &r2 - &Surd::from_i64(1));
        let d2 = r2.scale(&rat(2, 1)).distance_to_nearest_integer();
        assert_eq!(d2, &Surd::from_i64(3) - &r2.scale(&rat(2, 1)));
        assert_eq!(
            Surd::from_rational(rat(5, 4)).distance_to_nearest_integer(),
            Surd::from_rational(rat(1, 4))
        );
        assert_eq!(
            Surd::from_i64(3).distance_to_nearest_integer(),
            Surd::zero()
        );
    }

    #[test]
    fn enclosures_are_tight_and_correct() {
        let r2 = Surd::sqrt(2).unwrap();
        let iv = r2.enclosure_within(&rat(1, 1_000_000_000_000));
        assert!(iv.width() <= rat(1, 1_000_000_000_000));
        assert!(iv.lo.clone() * &iv.lo <= rat(2, 1));
        assert!(iv.hi.clone() * &iv.hi >= rat(2, 1));
        assert!((iv.mid_f64() - std::f64::consts::SQRT_2).abs() < 1e-12);
    }
}
