//! Hilbert basis of `S ∩ C` by bounded enumeration.
//!
//! Write `E` for the generator matrix of `S` and let
//! `K = {λ ≥ 0 : Eλ ∈ C}`. Every irreducible of `S ∩ C` is the image of an
//! irreducible of the normal monoid `K ∩ Z^n`, and those sit in half-open
//! parallelotopes spanned by at most `dim K` extreme rays of `K`. Summing
//! the largest images of the rays therefore bounds every basis element
//! coordinatewise.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::cone::{rays_of_inequalities, IntegerCone, RationalCone};
use super::monoid::{sort_by_degree, BoxTable, FgMonoid};
use super::point::LatticePoint;
use crate::arith::{self, dot};
use crate::error::{Error, Result};
use crate::linalg::{self, Row};

pub const DEFAULT_COORDINATE_BOUND: u64 = 64;

/// Largest box the enumeration is willing to allocate.
const MAX_BOX_CELLS: usize = 1 << 26;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HilbertOptions {
    pub coordinate_bound: u64,
}

impl Default for HilbertOptions {
    fn default() -> Self {
        HilbertOptions {
            coordinate_bound: DEFAULT_COORDINATE_BOUND,
        }
    }
}

pub fn hilbert_basis_intersection(s: &FgMonoid, c: &RationalCone) -> Result<FgMonoid> {
    hilbert_basis_intersection_with(s, c, HilbertOptions::default())
}

/// Coordinatewise bound on the Hilbert basis of `S ∩ C`; `None` when the
/// intersection is the zero monoid.
pub fn enumeration_bound(s: &FgMonoid, c: &RationalCone) -> Result<Option<Vec<BigInt>>> {
    if s.dim() != c.dim() {
        return Err(Error::DimensionMismatch {
            expected: s.dim(),
            found: c.dim(),
        });
    }
    let gens = s.generators();
    let n = gens.len();
    let column =
        |j: usize| -> Vec<BigRational> { gens[j].coords().iter().map(arith::rat_int).collect() };
    let pullback = |row: &[BigRational]| -> Row { (0..n).map(|j| dot(row, &column(j))).collect() };
    let mut ineqs: Vec<Row> = (0..n)
        .map(|i| {
            let mut e = vec![BigRational::zero(); n];
            e[i] = arith::rat(1, 1);
            e
        })
        .collect();
    for f in c.facet_normals() {
        ineqs.push(pullback(f.coords()));
    }
    for e in c.span_equations() {
        let row = pullback(e.coords());
        ineqs.push(row.iter().map(|x| -x).collect());
        ineqs.push(row);
    }
    let rays = rays_of_inequalities(n, &ineqs);
    if rays.is_empty() {
        return Ok(None);
    }
    let ray_rows: Vec<Row> = rays
        .iter()
        .map(|r| r.coords().iter().map(arith::rat_int).collect())
        .collect();
    let k = linalg::rank(&ray_rows, n);
    let images: Vec<Vec<BigInt>> = rays
        .iter()
        .map(|r| {
            (0..s.dim())
                .map(|i| {
                    gens.iter()
                        .zip(r.coords())
                        .map(|(g, l)| &g.coords()[i] * l)
                        .sum()
                })
                .collect()
        })
        .collect();
    let bound = (0..s.dim())
        .map(|i| {
            let mut col: Vec<BigInt> = images.iter().map(|y| y[i].clone()).collect();
            col.sort_by(|a, b| b.cmp(a));
            col.into_iter().take(k).sum()
        })
        .collect();
    Ok(Some(bound))
}

pub fn hilbert_basis_intersection_with(
    s: &FgMonoid,
    c: &RationalCone,
    opts: HilbertOptions,
) -> Result<FgMonoid> {
    let bound =
        enumeration_bound(s, c)?.ok_or_else(|| Error::invalid("S ∩ C is the zero monoid"))?;
    let limit = BigInt::from(opts.coordinate_bound);
    if let Some(b) = bound.iter().find(|b| **b > limit) {
        return Err(Error::BoundExceeded {
            what: "Hilbert basis enumeration box".into(),
            needed: b.to_string(),
            bound: opts.coordinate_bound.to_string(),
        });
    }
    let bounds: Vec<i64> = bound.iter().map(arith::to_i64).collect::<Result<_>>()?;
    match BoxTable::size_of(&bounds) {
        Some(n) if n <= MAX_BOX_CELLS => {}
        _ => {
            return Err(Error::BoundExceeded {
                what: "Hilbert basis enumeration cells".into(),
                needed: format!("box {bounds:?}"),
                bound: MAX_BOX_CELLS.to_string(),
            })
        }
    }
    let table = BoxTable::build(&s.generators_i64()?, &bounds)?;
    let cone = IntegerCone::from_cone(c)?;
    let mut members = vec![false; table.cells.len()];
    let mut points = Vec::new();
    for (i, p) in table.points() {
        if table.cells[i] && cone.contains(&p) {
            members[i] = true;
            if i != 0 {
                points.push(p);
            }
        }
    }
    sort_by_degree(&mut points);
    let mut basis: Vec<Vec<i64>> = Vec::new();
    for p in points {
        let reducible = basis.iter().any(|h| {
            let diff: Vec<i64> = p.iter().zip(h).map(|(a, b)| a - b).collect();
            table.index(&diff).is_some_and(|i| members[i])
        });
        if !reducible {
            basis.push(p);
        }
    }
    FgMonoid::new(
        s.dim(),
        basis.iter().map(|v| LatticePoint::from_i64s(v)).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gens(m: &FgMonoid) -> Vec<Vec<i64>> {
        let mut v: Vec<Vec<i64>> = m
            .generators()
            .iter()
            .map(|g| g.to_i64s().unwrap())
            .collect();
        v.sort();
        v
    }

    #[test]
    fn orthant_cut_by_a_steep_cone() {
        let s = FgMonoid::standard(2);
        let c = RationalCone::from_i64_rays(2, &[&[1, 0], &[1, 2]]).unwrap();
        let h = hilbert_basis_intersection(&s, &c).unwrap();
        assert_eq!(gens(&h), vec![vec![1, 0], vec![1, 1], vec![1, 2]]);
    }

    #[test]
    fn whole_quadrant() {
        let s = FgMonoid::standard(2);
        let h = hilbert_basis_intersection(&s, &RationalCone::orthant(2)).unwrap();
        assert_eq!(gens(&h), vec![vec![0, 1], vec![1, 0]]);
    }

    #[test]
    fn non_standard_monoid() {
        let s = FgMonoid::from_i64s(2, &[&[1, 0], &[1, 1]]).unwrap();
        let c = RationalCone::from_i64_rays(2, &[&[2, 1], &[1, 1]]).unwrap();
        let h = hilbert_basis_intersection(&s, &c).unwrap();
        assert_eq!(gens(&h), vec![vec![1, 1], vec![2, 1]]);
    }

    #[test]
    fn rank_one_numerical_semigroup() {
        let s = FgMonoid::from_i64s(1, &[&[3], &[5]]).unwrap();
        let h = hilbert_basis_intersection(&s, &RationalCone::orthant(1)).unwrap();
        assert_eq!(gens(&h), vec![vec![3], vec![5]]);
    }

    #[test]
    fn bound_is_enforced() {
        let s = FgMonoid::standard(2);
        let c = RationalCone::from_i64_rays(2, &[&[1, 0], &[1, 100]]).unwrap();
        let err = hilbert_basis_intersection(&s, &c).unwrap_err();
        assert!(matches!(err, Error::BoundExceeded { .. }));
        let opts = HilbertOptions {
            coordinate_bound: 200,
        };
        let h = hilbert_basis_intersection_with(&s, &c, opts).unwrap();
        assert_eq!(h.generators().len(), 101);
    }

    #[test]
    fn trivial_intersection_is_an_error() {
        let s = FgMonoid::from_i64s(2, &[&[1, 0]]).unwrap();
        let c = RationalCone::from_i64_rays(2, &[&[0, 1], &[1, 2]]).unwrap();
        assert!(hilbert_basis_intersection(&s, &c).is_err());
    }

    #[test]
    fn lower_dimensional_cone() {
        let s = FgMonoid::standard(3);
        let c = RationalCone::from_i64_rays(3, &[&[1, 0, 1], &[0, 1, 1]]).unwrap();
        let h = hilbert_basis_intersection(&s, &c).unwrap();
        assert_eq!(gens(&h), vec![vec![0, 1, 1], vec![1, 0, 1]]);
    }
}
