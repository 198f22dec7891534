//! Piecewise-linear detection on a subcone.
//!
//! A cone is triangulated, each simplex is tested for linearity, and failed
//! simplices are bisected in the slice `w·x = 1` up to a maximum depth. For
//! a concave homogeneous `F` and a simplicial cone with rays `g_i`,
//! `F(Σ g_i) = Σ F(g_i)` forces `F` to agree with the interpolating linear
//! map on the whole cone, so one evaluation per piece certifies it. Each
//! piece also carries the Hilbert-basis form of the certificate when the
//! function has a lattice domain.

use std::collections::BTreeSet;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use super::additivity::{one_point_additivity_by, OnePointVerdict};
use super::straighten::StraightenedFunction;
use crate::arith::{self, dot};
use crate::error::{Error, Result};
use crate::lattice_cone::{
    hilbert_basis_intersection_with, ConePosition, HilbertOptions, LatticePoint, RationalCone,
    RationalPoint,
};
use crate::linalg::{self, Row};

pub const NON_PL_NOTE: &str =
    "evidence only: distinct slopes on certified pieces near an uncertified region; this is not a proof that the function is not piecewise linear";

#[derive(Clone, Debug)]
pub struct PlOptions {
    /// Maximum bisection depth; cells shrink to `2^-depth` of the start.
    pub max_depth: u32,
    /// Slice functional; defaults to the sum of inward facet normals.
    pub slice: Option<RationalPoint>,
    pub kappa_max: u64,
    pub evidence_threshold: usize,
    pub hilbert: HilbertOptions,
}

impl Default for PlOptions {
    fn default() -> Self {
        PlOptions {
            max_depth: 12,
            slice: None,
            kappa_max: 20,
            evidence_threshold: 10,
            hilbert: HilbertOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PieceCertificate {
    pub rays: Vec<LatticePoint>,
    #[serde(serialize_with = "ser_rats")]
    pub ray_values: Vec<BigRational>,
    pub s0: LatticePoint,
    #[serde(with = "crate::lattice_cone::point::serde_num::rat")]
    pub s0_value: BigRational,
    pub hilbert_basis: Option<Vec<LatticePoint>>,
    pub hilbert_s0: Option<LatticePoint>,
    pub hilbert_verdict: Option<OnePointVerdict>,
    pub note: Option<String>,
}

fn ser_rats<S: serde::Serializer>(v: &[BigRational], s: S) -> std::result::Result<S::Ok, S::Error> {
    v.iter()
        .map(arith::format_rational)
        .collect::<Vec<_>>()
        .serialize(s)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LinearPiece {
    pub cone: RationalCone,
    pub functional: RationalPoint,
    pub certificate: PieceCertificate,
}

/// A piece on which every component of a vector-valued function is linear.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MultiPiece {
    pub cone: RationalCone,
    pub functionals: Vec<RationalPoint>,
    pub certificates: Vec<PieceCertificate>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PlDecomposition {
    pub covered: RationalCone,
    pub pieces: Vec<LinearPiece>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NonPlEvidence {
    pub note: &'static str,
    /// One interior ray per certified piece, with the slope found there.
    pub rays: Vec<RationalPoint>,
    pub slopes: Vec<RationalPoint>,
    pub distinct_slopes: usize,
    pub uncertified: Vec<RationalCone>,
    pub max_depth: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PlOutcome {
    Decomposition(PlDecomposition),
    Evidence(NonPlEvidence),
}

/// Raw result of the search for several components at once.
#[derive(Clone, Debug)]
pub struct PlSearch {
    pub covered: RationalCone,
    pub pieces: Vec<MultiPiece>,
    pub uncertified: Vec<RationalCone>,
}

#[derive(Clone, Debug)]
struct Cell {
    /// Rays normalized to the slice `w·x = 1`.
    points: Vec<RationalPoint>,
    depth: u32,
}

fn primitive_rays(points: &[RationalPoint]) -> Vec<LatticePoint> {
    points.iter().map(RationalPoint::primitive).collect()
}

fn sum_points(dim: usize, pts: &[LatticePoint]) -> LatticePoint {
    pts.iter().fold(LatticePoint::zero(dim), |acc, p| &acc + p)
}

/// The linear functional in the span of `rays` taking `values` on them.
fn interpolate(dim: usize, rays: &[LatticePoint], values: &[BigRational]) -> Result<RationalPoint> {
    let mut rows: Vec<Row> = rays.iter().map(|r| r.to_rational().0).collect();
    let eqs = linalg::nullspace(&rows, dim);
    let mut rhs = values.to_vec();
    for e in eqs {
        rows.push(e);
        rhs.push(BigRational::zero());
    }
    let columns: Vec<Row> = (0..dim)
        .map(|j| rows.iter().map(|r| r[j].clone()).collect())
        .collect();
    linalg::solve_combination(&columns, &rhs)
        .map(RationalPoint::new)
        .ok_or_else(|| Error::invalid("piece rays are not linearly independent"))
}

fn certify_component(
    f: &StraightenedFunction,
    rays: &[LatticePoint],
    opts: &PlOptions,
) -> Result<Option<(RationalPoint, PieceCertificate)>> {
    let dim = f.dim();
    let ray_values: Vec<BigRational> = rays
        .iter()
        .map(|r| f.value_lattice(r))
        .collect::<Result<_>>()?;
    let s0 = sum_points(dim, rays);
    let s0_value = f.value_lattice(&s0)?;
    let total: BigRational = ray_values.iter().sum();
    if s0_value != total {
        return Ok(None);
    }
    let functional = interpolate(dim, rays, &ray_values)?;
    let mut cert = PieceCertificate {
        rays: rays.to_vec(),
        ray_values,
        s0,
        s0_value,
        hilbert_basis: None,
        hilbert_s0: None,
        hilbert_verdict: None,
        note: None,
    };
    if let Some(monoid) = f.lattice() {
        let cone = RationalCone::new(dim, rays.iter().map(LatticePoint::to_rational).collect())?;
        match hilbert_basis_intersection_with(monoid, &cone, opts.hilbert) {
            Ok(h) => {
                let hs0 = sum_points(dim, h.generators());
                let verdict =
                    one_point_additivity_by(&h, &hs0, opts.kappa_max, |p| f.value_lattice(p))?;
                if !verdict.holds {
                    return Ok(None);
                }
                cert.hilbert_basis = Some(h.generators().to_vec());
                cert.hilbert_s0 = Some(hs0);
                cert.hilbert_verdict = Some(verdict);
            }
            Err(Error::BoundExceeded { needed, bound, .. }) => {
                cert.note = Some(format!(
                    "Hilbert basis skipped (needs coordinate bound {needed}, limit {bound}); certified by ray linearity"
                ));
            }
            Err(e) => return Err(e),
        }
    } else {
        cert.note = Some("no lattice domain; certified by ray linearity".into());
    }
    Ok(Some((functional, cert)))
}

fn certify_cell(
    fs: &[&StraightenedFunction],
    cell: &Cell,
    opts: &PlOptions,
) -> Result<Option<MultiPiece>> {
    let dim = fs[0].dim();
    let rays = primitive_rays(&cell.points);
    let mut functionals = Vec::new();
    let mut certificates = Vec::new();
    for f in fs {
        match certify_component(f, &rays, opts)? {
            Some((l, c)) => {
                functionals.push(l);
                certificates.push(c);
            }
            None => return Ok(None),
        }
    }
    Ok(Some(MultiPiece {
        cone: RationalCone::new(dim, rays.iter().map(LatticePoint::to_rational).collect())?,
        functionals,
        certificates,
    }))
}

fn split(cell: &Cell) -> Option<(Cell, Cell)> {
    let n = cell.points.len();
    if n < 2 {
        return None;
    }
    let mut best = (0, 1, BigRational::zero());
    for i in 0..n {
        for j in i + 1..n {
            let d = cell.points[i].sub(&cell.points[j]).norm_inf();
            if d > best.2 {
                best = (i, j, d);
            }
        }
    }
    let (i, j, _) = best;
    let mid = cell.points[i].add(&cell.points[j]).scale(&arith::rat(1, 2));
    let mut a = cell.points.clone();
    a[j] = mid.clone();
    let mut b = cell.points.clone();
    b[i] = mid;
    Some((
        Cell {
            points: a,
            depth: cell.depth + 1,
        },
        Cell {
            points: b,
            depth: cell.depth + 1,
        },
    ))
}

fn normalize(p: &RationalPoint, w: &RationalPoint) -> RationalPoint {
    let s = dot(w.coords(), p.coords());
    p.scale(&(arith::rat(1, 1) / s))
}

/// Runs the search for every component in `fs` simultaneously; a piece is
/// accepted only when all components are linear on it.
pub fn pl_search(
    fs: &[&StraightenedFunction],
    c: &RationalCone,
    opts: &PlOptions,
) -> Result<PlSearch> {
    let Some(first) = fs.first() else {
        return Err(Error::invalid("no functions to decompose"));
    };
    let dim = first.dim();
    if c.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: c.dim(),
        });
    }
    for f in fs {
        if f.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: f.dim(),
            });
        }
        let domain = f.domain_cone();
        if !domain.is_full_dimensional() || !domain.contains_in_interior(c)? {
            return Err(Error::invalid(
                "target cone must lie in the interior of the domain cone",
            ));
        }
    }
    if c.generators().is_empty() {
        return Err(Error::invalid("target cone is the origin"));
    }
    let w = opts
        .slice
        .clone()
        .unwrap_or_else(|| c.positive_functional());
    w.check_dim(dim)?;
    if c.generators()
        .iter()
        .any(|g| !dot(w.coords(), g.coords()).is_positive())
    {
        return Err(Error::invalid(
            "slice functional must be positive on the target cone",
        ));
    }

    let mut queue: Vec<Cell> = c
        .simplicial_subdivision()
        .iter()
        .map(|s| Cell {
            points: s.generators().iter().map(|g| normalize(g, &w)).collect(),
            depth: 0,
        })
        .collect();
    let mut certified: Vec<(Cell, MultiPiece)> = Vec::new();
    let mut failed: Vec<Cell> = Vec::new();
    while !queue.is_empty() {
        let results: Vec<Option<MultiPiece>> = queue
            .par_iter()
            .map(|cell| certify_cell(fs, cell, opts))
            .collect::<Result<_>>()?;
        let mut next = Vec::new();
        for (cell, res) in queue.into_iter().zip(results) {
            match res {
                Some(piece) => certified.push((cell, piece)),
                None if cell.depth < opts.max_depth => match split(&cell) {
                    Some((a, b)) => {
                        next.push(a);
                        next.push(b);
                    }
                    None => failed.push(cell),
                },
                None => failed.push(cell),
            }
        }
        queue = next;
    }

    if c.span_dim() == 2 {
        return planar_finish(fs, c, certified, failed, opts);
    }
    Ok(PlSearch {
        covered: c.clone(),
        pieces: certified.into_iter().map(|(_, p)| p).collect(),
        uncertified: cells_to_cones(dim, &failed)?,
    })
}

fn cells_to_cones(dim: usize, cells: &[Cell]) -> Result<Vec<RationalCone>> {
    cells
        .iter()
        .map(|c| {
            RationalCone::new(
                dim,
                primitive_rays(&c.points)
                    .iter()
                    .map(LatticePoint::to_rational)
                    .collect(),
            )
        })
        .collect()
}

#[derive(Clone, Debug)]
struct Segment {
    lo: RationalPoint,
    hi: RationalPoint,
    piece: Option<MultiPiece>,
}

/// In a planar cone, cells are segments of the slice line. Runs of
/// uncertified segments between two certified neighbours are split at the
/// kinks predicted by the neighbours, and adjacent pieces with equal
/// functionals are merged.
fn planar_finish(
    fs: &[&StraightenedFunction],
    c: &RationalCone,
    certified: Vec<(Cell, MultiPiece)>,
    failed: Vec<Cell>,
    opts: &PlOptions,
) -> Result<PlSearch> {
    let dim = c.dim();
    let w = opts
        .slice
        .clone()
        .unwrap_or_else(|| c.positive_functional());
    let a = normalize(&c.generators()[0], &w);
    let b = normalize(&c.generators()[1], &w);
    let dir = b.sub(&a);
    let param = |p: &RationalPoint| dot(p.sub(&a).coords(), dir.coords());
    let to_segment = |cell: &Cell, piece: Option<MultiPiece>| {
        let (mut lo, mut hi) = (cell.points[0].clone(), cell.points[1].clone());
        if param(&lo) > param(&hi) {
            std::mem::swap(&mut lo, &mut hi);
        }
        Segment { lo, hi, piece }
    };
    let mut segs: Vec<Segment> = certified
        .into_iter()
        .map(|(cell, p)| to_segment(&cell, Some(p)))
        .chain(failed.iter().map(|cell| to_segment(cell, None)))
        .collect();
    segs.sort_by(|x, y| param(&x.lo).cmp(&param(&y.lo)));

    let certify_segment = |lo: &RationalPoint, hi: &RationalPoint| -> Result<Option<MultiPiece>> {
        certify_cell(
            fs,
            &Cell {
                points: vec![lo.clone(), hi.clone()],
                depth: 0,
            },
            opts,
        )
    };

    let mut repaired: Vec<Segment> = Vec::new();
    let mut i = 0;
    while i < segs.len() {
        if segs[i].piece.is_some() {
            repaired.push(segs[i].clone());
            i += 1;
            continue;
        }
        let start = i;
        while i < segs.len() && segs[i].piece.is_none() {
            i += 1;
        }
        let run = &segs[start..i];
        let left = start.checked_sub(1).and_then(|k| segs[k].piece.as_ref());
        let right = segs.get(i).and_then(|s| s.piece.as_ref());
        let mut fixed = None;
        if let (Some(l), Some(r)) = (left, right) {
            let lo = run[0].lo.clone();
            let hi = run[run.len() - 1].hi.clone();
            let mut cuts: Vec<RationalPoint> = Vec::new();
            let span = hi.sub(&lo);
            for (fl, fr) in l.functionals.iter().zip(&r.functionals) {
                let delta = fl.sub(fr);
                let denom = dot(delta.coords(), span.coords());
                if denom.is_zero() {
                    continue;
                }
                let tau = -dot(delta.coords(), lo.coords()) / denom;
                if tau.is_positive() && tau < arith::rat(1, 1) {
                    cuts.push(lo.add(&span.scale(&tau)));
                }
            }
            cuts.sort_by(|x, y| param(x).cmp(&param(y)));
            cuts.dedup();
            let mut bounds = vec![lo];
            bounds.extend(cuts);
            bounds.push(hi);
            let mut pieces = Vec::new();
            for win in bounds.windows(2) {
                match certify_segment(&win[0], &win[1])? {
                    Some(p) => pieces.push(Segment {
                        lo: win[0].clone(),
                        hi: win[1].clone(),
                        piece: Some(p),
                    }),
                    None => {
                        pieces.clear();
                        break;
                    }
                }
            }
            if !pieces.is_empty() {
                fixed = Some(pieces);
            }
        }
        match fixed {
            Some(p) => repaired.extend(p),
            None => repaired.extend(run.iter().cloned()),
        }
    }

    let mut merged: Vec<Segment> = Vec::new();
    for seg in repaired {
        if let Some(last) = merged.last_mut() {
            if let (Some(lp), Some(sp)) = (&last.piece, &seg.piece) {
                if lp.functionals == sp.functionals {
                    if let Some(p) = certify_segment(&last.lo, &seg.hi)? {
                        last.hi = seg.hi.clone();
                        last.piece = Some(p);
                        continue;
                    }
                }
            }
        }
        merged.push(seg);
    }

    let mut pieces = Vec::new();
    let mut uncertified = Vec::new();
    for s in merged {
        match s.piece {
            Some(p) => pieces.push(p),
            None => uncertified.push(RationalCone::new(
                dim,
                vec![
                    s.lo.primitive().to_rational(),
                    s.hi.primitive().to_rational(),
                ],
            )?),
        }
    }
    Ok(PlSearch {
        covered: c.clone(),
        pieces,
        uncertified,
    })
}

/// Decomposes `f` on `c`, or reports slope evidence when the search leaves
/// gaps but has seen at least `evidence_threshold` distinct slopes.
pub fn pl_detect(
    f: &StraightenedFunction,
    c: &RationalCone,
    opts: &PlOptions,
) -> Result<PlOutcome> {
    let search = pl_search(&[f], c, opts)?;
    let to_linear = |p: MultiPiece| LinearPiece {
        cone: p.cone,
        functional: p.functionals.into_iter().next().expect("one component"),
        certificate: p.certificates.into_iter().next().expect("one component"),
    };
    if search.uncertified.is_empty() {
        return Ok(PlOutcome::Decomposition(PlDecomposition {
            covered: search.covered,
            pieces: search.pieces.into_iter().map(to_linear).collect(),
        }));
    }
    let pieces: Vec<LinearPiece> = search.pieces.into_iter().map(to_linear).collect();
    let distinct: BTreeSet<&RationalPoint> = pieces.iter().map(|p| &p.functional).collect();
    if distinct.len() >= opts.evidence_threshold {
        return Ok(PlOutcome::Evidence(NonPlEvidence {
            note: NON_PL_NOTE,
            distinct_slopes: distinct.len(),
            rays: pieces
                .iter()
                .map(|p| p.certificate.s0.to_rational())
                .collect(),
            slopes: pieces.iter().map(|p| p.functional.clone()).collect(),
            uncertified: search.uncertified,
            max_depth: opts.max_depth,
        }));
    }
    Err(Error::Inconclusive(format!(
        "{} region(s) uncertified at depth {} with only {} distinct slope(s)",
        search.uncertified.len(),
        opts.max_depth,
        distinct.len()
    )))
}

/// Re-evaluates `f` at every point recorded in the certificate and checks
/// that the functional reproduces each value.
pub fn verify_piece(f: &StraightenedFunction, piece: &LinearPiece) -> Result<bool> {
    let l = piece.functional.coords();
    let cert = &piece.certificate;
    let mut points: Vec<&LatticePoint> = cert.rays.iter().collect();
    points.push(&cert.s0);
    if let Some(h) = &cert.hilbert_basis {
        points.extend(h.iter());
    }
    if let Some(h) = &cert.hilbert_s0 {
        points.push(h);
    }
    for p in points {
        if f.value_lattice(p)? != dot(l, &p.to_rational().0) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Adjacent pieces agree on the rays they share.
pub fn pieces_agree_on_faces(pieces: &[LinearPiece]) -> Result<bool> {
    for (i, a) in pieces.iter().enumerate() {
        for b in &pieces[i + 1..] {
            for r in a.cone.generators() {
                if b.cone.position(r)? != ConePosition::Outside
                    && dot(a.functional.coords(), r.coords())
                        != dot(b.functional.coords(), r.coords())
                {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// The piece containing `p`, if any.
pub fn locate<'a>(pieces: &'a [LinearPiece], p: &RationalPoint) -> Result<Option<&'a LinearPiece>> {
    for piece in pieces {
        if piece.cone.contains(p)? {
            return Ok(Some(piece));
        }
    }
    Ok(None)
}
