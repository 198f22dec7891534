use std::collections::{BTreeSet, HashSet};

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::cone::RationalCone;
use super::point::LatticePoint;
use crate::error::{Error, Result};

/// A finitely generated submonoid of N^r.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FgMonoid {
    dim: usize,
    generators: Vec<LatticePoint>,
}

impl FgMonoid {
    /// Validates and deduplicates the generator list (first occurrence wins).
    pub fn new(dim: usize, generators: Vec<LatticePoint>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("ambient dimension must be positive"));
        }
        if generators.is_empty() {
            return Err(Error::invalid("a monoid needs at least one generator"));
        }
        let mut seen = BTreeSet::new();
        let mut gens = Vec::with_capacity(generators.len());
        for g in generators {
            g.check_dim(dim)?;
            if g.is_zero() {
                return Err(Error::invalid("monoid generators must be nonzero"));
            }
            if !g.is_nonnegative() {
                return Err(Error::invalid(format!(
                    "generator {g} has a negative coordinate; monoids live in N^r"
                )));
            }
            if seen.insert(g.clone()) {
                gens.push(g);
            }
        }
        Ok(FgMonoid {
            dim,
            generators: gens,
        })
    }

    pub fn from_i64s(dim: usize, generators: &[&[i64]]) -> Result<Self> {
        Self::new(
            dim,
            generators
                .iter()
                .map(|g| LatticePoint::from_i64s(g))
                .collect(),
        )
    }

    /// N^r with its standard basis.
    pub fn standard(dim: usize) -> Self {
        let gens = (0..dim)
            .map(|i| {
                let mut v = vec![0i64; dim];
                v[i] = 1;
                LatticePoint::from_i64s(&v)
            })
            .collect();
        Self::new(dim, gens).expect("standard basis is valid")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[LatticePoint] {
        &self.generators
    }

    /// The associated cone, strongly convex because it sits in the orthant.
    pub fn cone(&self) -> RationalCone {
        RationalCone::new(
            self.dim,
            self.generators
                .iter()
                .map(LatticePoint::to_rational)
                .collect(),
        )
        .expect("cone of a submonoid of N^r is strongly convex")
    }

    pub(crate) fn generators_i64(&self) -> Result<Vec<Vec<i64>>> {
        self.generators.iter().map(LatticePoint::to_i64s).collect()
    }

    /// Returns coefficients `λ` with `p = Σ λ_i e_i` when `p` lies in the
    /// monoid, `None` otherwise.
    pub fn membership(&self, p: &LatticePoint) -> Result<Option<Vec<BigInt>>> {
        p.check_dim(self.dim)?;
        if !p.is_nonnegative() {
            return Ok(None);
        }
        let gens = self.generators_i64()?;
        let target = p.to_i64s()?;
        Ok(solve_membership(&gens, &target).map(|c| c.into_iter().map(BigInt::from).collect()))
    }

    pub fn contains(&self, p: &LatticePoint) -> Result<bool> {
        Ok(self.membership(p)?.is_some())
    }

    /// The truncation generated by `κ_i e_i`.
    pub fn truncate(&self, kappa: &[BigInt]) -> Result<FgMonoid> {
        if kappa.len() != self.generators.len() {
            return Err(Error::DimensionMismatch {
                expected: self.generators.len(),
                found: kappa.len(),
            });
        }
        if let Some(k) = kappa.iter().find(|k| !k.is_positive()) {
            return Err(Error::invalid(format!(
                "truncation factors must be positive, got {k}"
            )));
        }
        let gens = self
            .generators
            .iter()
            .zip(kappa)
            .map(|(g, k)| g.scale(k))
            .collect();
        FgMonoid::new(self.dim, gens)
    }

    pub fn truncate_uniform(&self, kappa: &BigInt) -> Result<FgMonoid> {
        self.truncate(&vec![kappa.clone(); self.generators.len()])
    }

    /// All elements with coordinate sum at most `max_degree`, ordered by
    /// degree and then lexicographically. Includes the origin.
    pub fn elements_up_to_degree(&self, max_degree: u64) -> Result<Vec<LatticePoint>> {
        let gens = self.generators_i64()?;
        let max = i64::try_from(max_degree).map_err(|_| Error::Overflow(max_degree.to_string()))?;
        let mut seen: HashSet<Vec<i64>> = HashSet::new();
        let mut frontier = vec![vec![0i64; self.dim]];
        seen.insert(frontier[0].clone());
        while let Some(p) = frontier.pop() {
            let deg: i64 = p.iter().sum();
            for g in &gens {
                let gd: i64 = g.iter().sum();
                if deg + gd > max {
                    continue;
                }
                let q: Vec<i64> = p.iter().zip(g).map(|(a, b)| a + b).collect();
                if seen.insert(q.clone()) {
                    frontier.push(q);
                }
            }
        }
        let mut out: Vec<Vec<i64>> = seen.into_iter().collect();
        sort_by_degree(&mut out);
        Ok(out.iter().map(|v| LatticePoint::from_i64s(v)).collect())
    }
}

pub(crate) fn sort_by_degree(points: &mut [Vec<i64>]) {
    points.sort_by(|a, b| {
        let da: i64 = a.iter().sum();
        let db: i64 = b.iter().sum();
        da.cmp(&db).then_with(|| a.cmp(b))
    });
}

/// Depth-first search over coefficient vectors, largest coefficient first.
/// Remaining targets must stay in the orthant, which bounds every branch.
fn solve_membership(gens: &[Vec<i64>], target: &[i64]) -> Option<Vec<i64>> {
    fn go(
        i: usize,
        rem: &mut Vec<i64>,
        gens: &[Vec<i64>],
        coeffs: &mut [i64],
        failed: &mut HashSet<(usize, Vec<i64>)>,
    ) -> bool {
        if rem.iter().all(|&x| x == 0) {
            return true;
        }
        if i == gens.len() || failed.contains(&(i, rem.clone())) {
            return false;
        }
        let g = &gens[i];
        let max = g
            .iter()
            .zip(rem.iter())
            .filter(|(gc, _)| **gc > 0)
            .map(|(gc, rc)| rc / gc)
            .min()
            .unwrap_or(0);
        for lam in (0..=max).rev() {
            for (r, gc) in rem.iter_mut().zip(g) {
                *r -= lam * gc;
            }
            coeffs[i] = lam;
            let ok = go(i + 1, rem, gens, coeffs, failed);
            for (r, gc) in rem.iter_mut().zip(g) {
                *r += lam * gc;
            }
            if ok {
                return true;
            }
        }
        coeffs[i] = 0;
        failed.insert((i, rem.clone()));
        false
    }
    let mut coeffs = vec![0; gens.len()];
    let mut rem = target.to_vec();
    let mut failed = HashSet::new();
    go(0, &mut rem, gens, &mut coeffs, &mut failed).then_some(coeffs)
}

/// Dense membership table of the monoid on the box `[0, bounds]`.
pub(crate) struct BoxTable {
    pub(crate) bounds: Vec<i64>,
    strides: Vec<usize>,
    pub(crate) cells: Vec<bool>,
}

impl BoxTable {
    pub(crate) fn size_of(bounds: &[i64]) -> Option<usize> {
        bounds.iter().try_fold(1usize, |acc, &b| {
            acc.checked_mul(usize::try_from(b + 1).ok()?)
        })
    }

    /// Fills the table in index order: a point is in the monoid when
    /// subtracting some generator lands on a point already marked.
    pub(crate) fn build(gens: &[Vec<i64>], bounds: &[i64]) -> Result<BoxTable> {
        let size =
            Self::size_of(bounds).ok_or_else(|| Error::Overflow(format!("box {bounds:?}")))?;
        let dim = bounds.len();
        let mut strides = vec![1usize; dim];
        for i in (0..dim.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * (bounds[i + 1] + 1) as usize;
        }
        let mut cells = vec![false; size];
        cells[0] = true;
        let offsets: Vec<Option<usize>> = gens
            .iter()
            .map(|g| {
                if g.iter().zip(bounds).any(|(a, b)| a > b) {
                    None
                } else {
                    Some(g.iter().zip(&strides).map(|(&a, &s)| a as usize * s).sum())
                }
            })
            .collect();
        let mut p = vec![0i64; dim];
        for idx in 1..size {
            increment(&mut p, bounds);
            cells[idx] = gens.iter().zip(&offsets).any(|(g, off)| match off {
                Some(off) => g.iter().zip(&p).all(|(a, b)| a <= b) && cells[idx - off],
                None => false,
            });
        }
        Ok(BoxTable {
            bounds: bounds.to_vec(),
            strides,
            cells,
        })
    }

    pub(crate) fn index(&self, p: &[i64]) -> Option<usize> {
        let mut idx = 0;
        for ((&c, &b), &s) in p.iter().zip(&self.bounds).zip(&self.strides) {
            if c < 0 || c > b {
                return None;
            }
            idx += c as usize * s;
        }
        Some(idx)
    }

    /// Visits every point of the box in index order.
    pub(crate) fn points(&self) -> impl Iterator<Item = (usize, Vec<i64>)> + '_ {
        let mut p = vec![0i64; self.bounds.len()];
        let mut first = true;
        (0..self.cells.len()).map(move |i| {
            if !first {
                increment(&mut p, &self.bounds);
            }
            first = false;
            (i, p.clone())
        })
    }
}

fn increment(p: &mut [i64], bounds: &[i64]) {
    for i in (0..p.len()).rev() {
        if p[i] < bounds[i] {
            p[i] += 1;
            return;
        }
        p[i] = 0;
    }
}

#[derive(Serialize, Deserialize)]
struct MonoidDoc {
    dim: usize,
    generators: Vec<LatticePoint>,
}

impl Serialize for FgMonoid {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MonoidDoc {
            dim: self.dim,
            generators: self.generators.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FgMonoid {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = MonoidDoc::deserialize(d)?;
        FgMonoid::new(doc.dim, doc.generators).map_err(serde::de::Error::custom)
    }
}

/// `Σ λ_i e_i` for a coefficient vector.
pub fn combine(gens: &[LatticePoint], coeffs: &[BigInt]) -> LatticePoint {
    let dim = gens.first().map_or(0, LatticePoint::dim);
    let mut acc = vec![BigInt::zero(); dim];
    for (g, c) in gens.iter().zip(coeffs) {
        for (a, x) in acc.iter_mut().zip(g.coords()) {
            *a += x * c;
        }
    }
    LatticePoint(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(v: &[i64]) -> LatticePoint {
        LatticePoint::from_i64s(v)
    }

    #[test]
    fn membership_with_witness() {
        let s = FgMonoid::from_i64s(2, &[&[1, 0], &[1, 1]]).unwrap();
        let w = s.membership(&lp(&[3, 2])).unwrap().unwrap();
        assert_eq!(w, vec![BigInt::from(1), BigInt::from(2)]);
        assert_eq!(combine(s.generators(), &w), lp(&[3, 2]));
        assert!(s.membership(&lp(&[1, 2])).unwrap().is_none());
    }

    #[test]
    fn origin_is_the_empty_combination() {
        let s = FgMonoid::standard(2);
        let w = s.membership(&lp(&[0, 0])).unwrap().unwrap();
        assert!(w.iter().all(Zero::is_zero));
    }

    #[test]
    fn parity_obstruction() {
        let s = FgMonoid::from_i64s(2, &[&[2, 0], &[0, 2]]).unwrap();
        assert!(!s.contains(&lp(&[1, 1])).unwrap());
        assert!(s.contains(&lp(&[4, 2])).unwrap());
    }

    #[test]
    fn membership_dimension_mismatch() {
        let s = FgMonoid::standard(2);
        assert!(matches!(
            s.membership(&lp(&[1, 2, 3])),
            Err(Error::DimensionMismatch {
                expected: 2,
                found: 3
            })
        ));
    }

    #[test]
    fn validation() {
        assert!(FgMonoid::from_i64s(2, &[&[0, 0]]).is_err());
        assert!(FgMonoid::from_i64s(2, &[&[1, -1]]).is_err());
        assert!(FgMonoid::new(2, vec![]).is_err());
        let s = FgMonoid::from_i64s(1, &[&[2], &[3], &[2]]).unwrap();
        assert_eq!(s.generators().len(), 2);
    }

    #[test]
    fn truncations() {
        let s = FgMonoid::standard(2);
        let t = s.truncate(&[BigInt::from(2), BigInt::from(3)]).unwrap();
        assert_eq!(t.generators(), &[lp(&[2, 0]), lp(&[0, 3])]);
        assert_eq!(s.truncate(&[BigInt::from(1), BigInt::from(1)]).unwrap(), s);
        assert!(s.truncate(&[BigInt::from(0), BigInt::from(1)]).is_err());
        assert!(s.truncate(&[BigInt::from(1)]).is_err());
        let u = s.truncate_uniform(&BigInt::from(6)).unwrap();
        assert_eq!(u.generators(), &[lp(&[6, 0]), lp(&[0, 6])]);
    }

    #[test]
    fn elements_by_degree() {
        let s = FgMonoid::from_i64s(1, &[&[2], &[3]]).unwrap();
        let e: Vec<LatticePoint> = s.elements_up_to_degree(7).unwrap();
        let v: Vec<i64> = e.iter().map(|p| p.to_i64s().unwrap()[0]).collect();
        assert_eq!(v, vec![0, 2, 3, 4, 5, 6, 7]);
    }

    #[test]
    fn box_table_matches_membership() {
        let s = FgMonoid::from_i64s(2, &[&[2, 1], &[0, 3], &[1, 1]]).unwrap();
        let t = BoxTable::build(&s.generators_i64().unwrap(), &[6, 7]).unwrap();
        for (i, p) in t.points() {
            assert_eq!(t.cells[i], s.contains(&lp(&p)).unwrap(), "{p:?}");
        }
    }

    #[test]
    fn json_shape() {
        let s = FgMonoid::from_i64s(2, &[&[1, 0], &[1, 1]]).unwrap();
        let j = serde_json::to_string(&s).unwrap();
        assert_eq!(j, r#"{"dim":2,"generators":[[1,0],[1,1]]}"#);
        let back: FgMonoid = serde_json::from_str(&j).unwrap();
        assert_eq!(back, s);
        assert!(serde_json::from_str::<FgMonoid>(r#"{"dim":2,"generators":[[1,-1]]}"#).is_err());
    }
}
