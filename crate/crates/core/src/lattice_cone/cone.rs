use std::collections::BTreeSet;
use std::sync::{Arc, OnceLock};

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::point::{LatticePoint, RationalPoint};
use crate::arith::{self, dot};
use crate::error::{Error, Result};
use crate::linalg::{self, Row};

/// Where a point sits relative to a cone. The origin counts as relative
/// interior.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConePosition {
    Outside,
    Boundary,
    RelativeInterior,
}

/// Hyperplane through the origin, the kernel of a rational functional.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalHyperplane {
    normal: RationalPoint,
}

impl RationalHyperplane {
    pub fn new(normal: RationalPoint) -> Result<Self> {
        if normal.is_zero() {
            return Err(Error::invalid("hyperplane normal must be nonzero"));
        }
        Ok(RationalHyperplane { normal })
    }

    pub fn normal(&self) -> &RationalPoint {
        &self.normal
    }

    pub fn evaluate(&self, p: &RationalPoint) -> BigRational {
        dot(self.normal.coords(), p.coords())
    }

    pub fn contains(&self, p: &RationalPoint) -> bool {
        self.evaluate(p).is_zero()
    }
}

#[derive(Clone, Debug)]
struct Geometry {
    /// Basis of the orthogonal complement of the linear span.
    equations: Vec<Row>,
    /// Inward facet normals, primitive integral, lying in the linear span.
    facets: Vec<Row>,
    span_dim: usize,
}

/// A strongly convex rational polyhedral cone given by its extreme rays.
#[derive(Clone, Debug)]
pub struct RationalCone {
    dim: usize,
    generators: Vec<RationalPoint>,
    geometry: Arc<OnceLock<Geometry>>,
}

impl PartialEq for RationalCone {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.generators == other.generators
    }
}

impl Eq for RationalCone {}

impl RationalCone {
    /// Builds the cone spanned by `generators`. Proportional duplicates and
    /// generators that are not extreme rays are dropped; the first
    /// representative of each ray is kept.
    pub fn new(dim: usize, generators: Vec<RationalPoint>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("ambient dimension must be positive"));
        }
        let mut seen = BTreeSet::new();
        let mut gens = Vec::new();
        for g in generators {
            g.check_dim(dim)?;
            if g.is_zero() {
                return Err(Error::invalid("cone generators must be nonzero"));
            }
            if seen.insert(g.primitive()) {
                gens.push(g);
            }
        }
        let geometry = compute_geometry(dim, &gens);
        if !is_pointed(dim, &geometry) {
            return Err(Error::NotStronglyConvex);
        }
        let extreme: Vec<RationalPoint> = gens
            .iter()
            .filter(|g| is_extreme(dim, &geometry, g))
            .cloned()
            .collect();
        let cone = RationalCone {
            dim,
            generators: extreme,
            geometry: Arc::new(OnceLock::new()),
        };
        let _ = cone.geometry.set(geometry);
        Ok(cone)
    }

    pub fn from_i64_rays(dim: usize, rays: &[&[i64]]) -> Result<Self> {
        Self::new(
            dim,
            rays.iter().map(|r| RationalPoint::from_i64s(r)).collect(),
        )
    }

    /// The nonnegative orthant of R^dim.
    pub fn orthant(dim: usize) -> Self {
        let rays = (0..dim)
            .map(|i| {
                let mut v = vec![0i64; dim];
                v[i] = 1;
                RationalPoint::from_i64s(&v)
            })
            .collect();
        Self::new(dim, rays).expect("orthant is strongly convex")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[RationalPoint] {
        &self.generators
    }

    fn geometry(&self) -> &Geometry {
        self.geometry
            .get_or_init(|| compute_geometry(self.dim, &self.generators))
    }

    /// Dimension of the linear span.
    pub fn span_dim(&self) -> usize {
        self.geometry().span_dim
    }

    pub fn is_full_dimensional(&self) -> bool {
        self.span_dim() == self.dim
    }

    pub fn is_simplicial(&self) -> bool {
        self.span_dim() == self.generators.len()
    }

    /// Inward facet normals (primitive integral, inside the linear span).
    pub fn facet_normals(&self) -> Vec<RationalPoint> {
        self.geometry()
            .facets
            .iter()
            .map(|f| RationalPoint::new(f.clone()))
            .collect()
    }

    pub fn facet_hyperplanes(&self) -> Vec<RationalHyperplane> {
        self.facet_normals()
            .into_iter()
            .map(|n| RationalHyperplane { normal: n })
            .collect()
    }

    /// Basis of the linear equations cutting out the span.
    pub fn span_equations(&self) -> Vec<RationalPoint> {
        self.geometry()
            .equations
            .iter()
            .map(|f| RationalPoint::new(f.clone()))
            .collect()
    }

    pub fn position(&self, p: &RationalPoint) -> Result<ConePosition> {
        p.check_dim(self.dim)?;
        Ok(position_in(self.geometry(), p.coords()))
    }

    pub fn contains(&self, p: &RationalPoint) -> Result<bool> {
        Ok(self.position(p)? != ConePosition::Outside)
    }

    pub fn contains_lattice(&self, p: &LatticePoint) -> Result<bool> {
        self.contains(&p.to_rational())
    }

    /// `true` when every generator of `inner` lies in the relative interior
    /// of `self` (so `inner` minus the origin sits inside it).
    pub fn contains_in_interior(&self, inner: &RationalCone) -> Result<bool> {
        for g in inner.generators() {
            if self.position(g)? != ConePosition::RelativeInterior {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// A functional that is positive on every nonzero point of the cone:
    /// the sum of the inward facet normals (which lie in the span).
    pub fn positive_functional(&self) -> RationalPoint {
        let g = self.geometry();
        let mut w = vec![BigRational::zero(); self.dim];
        if g.facets.is_empty() {
            return RationalPoint::new(w);
        }
        for f in &g.facets {
            for (a, b) in w.iter_mut().zip(f) {
                *a += b;
            }
        }
        RationalPoint::new(w)
    }

    /// Triangulates the cone without new rays (pulling from the first
    /// generator, recursively on the facets that avoid it).
    pub fn simplicial_subdivision(&self) -> Vec<RationalCone> {
        let idx: Vec<usize> = (0..self.generators.len()).collect();
        pulling(self.dim, &self.generators, &idx)
            .into_iter()
            .map(|simplex| RationalCone {
                dim: self.dim,
                generators: simplex
                    .iter()
                    .map(|&i| self.generators[i].clone())
                    .collect(),
                geometry: Arc::new(OnceLock::new()),
            })
            .collect()
    }
}

fn position_in(geom: &Geometry, p: &[BigRational]) -> ConePosition {
    if geom.equations.iter().any(|e| !dot(e, p).is_zero()) {
        return ConePosition::Outside;
    }
    let mut on_wall = false;
    for f in &geom.facets {
        let v = dot(f, p);
        if v.is_negative() {
            return ConePosition::Outside;
        }
        if v.is_zero() {
            on_wall = true;
        }
    }
    if on_wall && !arith::is_zero_vec(p) {
        ConePosition::Boundary
    } else {
        ConePosition::RelativeInterior
    }
}

fn primitive_row(v: &[BigRational]) -> Row {
    arith::primitive_integer(v)
        .iter()
        .map(arith::rat_int)
        .collect()
}

fn rows_of(points: &[RationalPoint]) -> Vec<Row> {
    points.iter().map(|p| p.coords().to_vec()).collect()
}

fn compute_geometry(dim: usize, gens: &[RationalPoint]) -> Geometry {
    let rows = rows_of(gens);
    let span_dim = linalg::rank(&rows, dim);
    let equations = linalg::nullspace(&rows, dim);
    let mut facets: Vec<Row> = Vec::new();
    if span_dim == 0 {
        return Geometry {
            equations,
            facets,
            span_dim,
        };
    }
    let mut seen = BTreeSet::new();
    for subset in combinations(gens.len(), span_dim - 1) {
        let mut sys: Vec<Row> = subset.iter().map(|&i| rows[i].clone()).collect();
        if linalg::rank(&sys, dim) != span_dim - 1 {
            continue;
        }
        sys.extend(equations.iter().cloned());
        let normal = linalg::nullspace(&sys, dim);
        debug_assert_eq!(normal.len(), 1);
        let n = &normal[0];
        let values: Vec<BigRational> = rows.iter().map(|g| dot(n, g)).collect();
        let oriented = if values.iter().all(|v| !v.is_negative()) {
            primitive_row(n)
        } else if values.iter().all(|v| !v.is_positive()) {
            let neg: Row = n.iter().map(|x| -x).collect();
            primitive_row(&neg)
        } else {
            continue;
        };
        if seen.insert(oriented.clone()) {
            facets.push(oriented);
        }
    }
    Geometry {
        equations,
        facets,
        span_dim,
    }
}

fn is_pointed(dim: usize, geom: &Geometry) -> bool {
    let mut rows = geom.equations.clone();
    rows.extend(geom.facets.iter().cloned());
    linalg::rank(&rows, dim) == dim
}

fn is_extreme(dim: usize, geom: &Geometry, g: &RationalPoint) -> bool {
    let mut rows = geom.equations.clone();
    rows.extend(
        geom.facets
            .iter()
            .filter(|f| dot(f, g.coords()).is_zero())
            .cloned(),
    );
    linalg::rank(&rows, dim) == dim - 1
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub(crate) fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] != i + n - k {
                break;
            }
            if i == 0 && cur[0] == n - k {
                return out;
            }
        }
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

fn pulling(dim: usize, all: &[RationalPoint], idx: &[usize]) -> Vec<Vec<usize>> {
    let pts: Vec<RationalPoint> = idx.iter().map(|&i| all[i].clone()).collect();
    let rows = rows_of(&pts);
    let r = linalg::rank(&rows, dim);
    if r == idx.len() {
        return vec![idx.to_vec()];
    }
    let geom = compute_geometry(dim, &pts);
    let apex = &rows[0];
    let mut out = Vec::new();
    for f in &geom.facets {
        if dot(f, apex).is_zero() {
            continue;
        }
        let face: Vec<usize> = idx
            .iter()
            .zip(&rows)
            .filter(|(_, g)| dot(f, g).is_zero())
            .map(|(&i, _)| i)
            .collect();
        for mut simplex in pulling(dim, all, &face) {
            simplex.insert(0, idx[0]);
            out.push(simplex);
        }
    }
    out
}

/// Extreme rays of `{x : row . x >= 0 for all rows}`, assumed pointed.
/// Each ray is returned as a primitive integer vector.
pub(crate) fn rays_of_inequalities(dim: usize, ineqs: &[Row]) -> Vec<LatticePoint> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    if dim == 0 {
        return out;
    }
    for subset in combinations(ineqs.len(), dim - 1) {
        let sys: Vec<Row> = subset.iter().map(|&i| ineqs[i].clone()).collect();
        if linalg::rank(&sys, dim) != dim - 1 {
            continue;
        }
        let n = linalg::nullspace(&sys, dim).remove(0);
        for cand in [n.clone(), n.iter().map(|x| -x).collect::<Row>()] {
            if ineqs.iter().all(|row| !dot(row, &cand).is_negative()) {
                let prim = LatticePoint(arith::primitive_integer(&cand));
                if seen.insert(prim.clone()) {
                    out.push(prim);
                }
            }
        }
    }
    out
}

#[derive(Serialize, Deserialize)]
struct ConeDoc {
    dim: usize,
    generators: Vec<RationalPoint>,
}

impl Serialize for RationalCone {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ConeDoc {
            dim: self.dim,
            generators: self.generators.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for RationalCone {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = ConeDoc::deserialize(d)?;
        RationalCone::new(doc.dim, doc.generators).map_err(serde::de::Error::custom)
    }
}

/// Integer facet data for fast membership tests during enumeration.
pub(crate) struct IntegerCone {
    equations: Vec<Vec<i64>>,
    facets: Vec<Vec<i64>>,
}

impl IntegerCone {
    pub(crate) fn from_cone(c: &RationalCone) -> Result<Self> {
        let conv = |rows: &[Row]| -> Result<Vec<Vec<i64>>> {
            rows.iter()
                .map(|r| {
                    arith::primitive_integer(r)
                        .iter()
                        .map(arith::to_i64)
                        .collect::<Result<Vec<i64>>>()
                })
                .collect()
        };
        let g = c.geometry();
        Ok(IntegerCone {
            equations: conv(&g.equations)?,
            facets: conv(&g.facets)?,
        })
    }

    pub(crate) fn contains(&self, p: &[i64]) -> bool {
        let d = |row: &[i64]| -> i128 {
            row.iter()
                .zip(p)
                .map(|(&a, &b)| a as i128 * b as i128)
                .sum()
        };
        self.equations.iter().all(|e| d(e) == 0) && self.facets.iter().all(|f| d(f) >= 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cone(rays: &[&[i64]]) -> RationalCone {
        RationalCone::from_i64_rays(rays[0].len(), rays).unwrap()
    }

    #[test]
    fn quadrant_positions() {
        let c = cone(&[&[1, 0], &[0, 1]]);
        let pos = |x, y| c.position(&RationalPoint::from_i64s(&[x, y])).unwrap();
        assert_eq!(pos(1, 1), ConePosition::RelativeInterior);
        assert_eq!(pos(1, 0), ConePosition::Boundary);
        assert_eq!(pos(-1, 1), ConePosition::Outside);
        assert_eq!(pos(0, 0), ConePosition::RelativeInterior);
    }

    #[test]
    fn lower_dimensional_cone_positions() {
        let c = cone(&[&[1, 0, 0], &[1, 1, 0]]);
        assert_eq!(c.span_dim(), 2);
        let pos = |v: &[i64]| c.position(&RationalPoint::from_i64s(v)).unwrap();
        assert_eq!(pos(&[2, 1, 0]), ConePosition::RelativeInterior);
        assert_eq!(pos(&[1, 1, 0]), ConePosition::Boundary);
        assert_eq!(pos(&[2, 1, 1]), ConePosition::Outside);
    }

    #[test]
    fn rejects_lines_and_drops_redundant_rays() {
        assert_eq!(
            RationalCone::from_i64_rays(1, &[&[1], &[-1]]).unwrap_err(),
            Error::NotStronglyConvex
        );
        assert_eq!(
            RationalCone::from_i64_rays(2, &[&[1, 0], &[0, 1], &[-1, 0]]).unwrap_err(),
            Error::NotStronglyConvex
        );
        let c = cone(&[&[1, 0], &[2, 0], &[1, 1], &[0, 1]]);
        assert_eq!(c.generators().len(), 2);
        assert!(c.is_simplicial());
    }

    #[test]
    fn square_pyramid_has_four_facets_and_two_simplices() {
        let c = cone(&[&[1, 0, 0], &[1, 1, 0], &[1, 1, 1], &[1, 0, 1]]);
        assert_eq!(c.facet_normals().len(), 4);
        assert!(!c.is_simplicial());
        let pieces = c.simplicial_subdivision();
        assert_eq!(pieces.len(), 2);
        for p in &pieces {
            assert!(p.is_simplicial());
            assert!(p
                .generators()
                .contains(&RationalPoint::from_i64s(&[1, 0, 0])));
        }
    }

    #[test]
    fn planar_cones_are_their_own_subdivision() {
        let c = cone(&[&[1, 3], &[2, -1]]);
        assert_eq!(c.simplicial_subdivision(), vec![c.clone()]);
    }

    #[test]
    fn inequality_rays() {
        // x >= 0, y >= 0, x - 2y <= 0  ==> rays (0,1) and (2,1)
        let ineqs = vec![
            vec![arith::rat(1, 1), arith::rat(0, 1)],
            vec![arith::rat(0, 1), arith::rat(1, 1)],
            vec![arith::rat(-1, 1), arith::rat(2, 1)],
        ];
        let mut rays = rays_of_inequalities(2, &ineqs);
        rays.sort();
        assert_eq!(
            rays,
            vec![
                LatticePoint::from_i64s(&[0, 1]),
                LatticePoint::from_i64s(&[2, 1])
            ]
        );
    }

    #[test]
    fn combinations_enumerate_all_subsets() {
        assert_eq!(combinations(4, 2).len(), 6);
        assert_eq!(combinations(3, 0), vec![Vec::<usize>::new()]);
        assert_eq!(combinations(3, 3), vec![vec![0, 1, 2]]);
        assert!(combinations(2, 3).is_empty());
    }

    #[test]
    fn json_round_trip_is_stable() {
        let c = RationalCone::new(
            2,
            vec![
                RationalPoint::from_ratios(&[(1, 2), (1, 1)]),
                RationalPoint::from_ratios(&[(1, 1), (0, 1)]),
            ],
        )
        .unwrap();
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(s, r#"{"dim":2,"generators":[["1/2","1"],["1","0"]]}"#);
        let back: RationalCone = serde_json::from_str(&s).unwrap();
        assert_eq!(serde_json::to_string(&back).unwrap(), s);
    }
}
