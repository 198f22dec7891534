//! Lipschitz constants on sup-norm boxes from concavity.
//!
//! With `g(v) = f♯(c+v) - f♯(c)` concave and `g(0) = 0`, the minimum of
//! `g` over the box `B(c, 2δ)` is attained at a vertex and
//! `g(v) <= -g(-v)`, so `|g| <= M := max(0, -min over vertices)`. The
//! standard bound then gives `L = 2M/δ` on `B(c, δ)`.

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;

use super::straighten::StraightenedFunction;
use crate::arith::{self, format_rational};
use crate::error::{Error, Result};
use crate::lattice_cone::{ConePosition, RationalPoint};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LipschitzReport {
    #[serde(with = "crate::lattice_cone::point::serde_num::rat")]
    pub constant: BigRational,
    #[serde(with = "crate::lattice_cone::point::serde_num::rat")]
    pub sup_bound: BigRational,
    pub pairs_checked: u64,
    /// Largest observed `|f(y)-f(z)| / ‖y-z‖∞` among sampled pairs.
    #[serde(with = "crate::lattice_cone::point::serde_num::rat")]
    pub max_ratio: BigRational,
    pub holds: bool,
    pub violation: Option<(RationalPoint, RationalPoint)>,
}

fn box_vertices(center: &RationalPoint, half: &BigRational) -> Vec<RationalPoint> {
    let r = center.dim();
    (0..1u64 << r)
        .map(|mask| {
            RationalPoint::new(
                center
                    .coords()
                    .iter()
                    .enumerate()
                    .map(|(i, c)| {
                        if mask >> i & 1 == 1 {
                            c + half
                        } else {
                            c - half
                        }
                    })
                    .collect(),
            )
        })
        .collect()
}

fn grid(center: &RationalPoint, delta: &BigRational, per_axis: usize) -> Vec<RationalPoint> {
    let r = center.dim();
    let steps = per_axis.max(2);
    let offsets: Vec<BigRational> = (0..steps)
        .map(|k| {
            let t = arith::rat(2 * k as i64, (steps - 1) as i64) - arith::rat(1, 1);
            t * delta
        })
        .collect();
    let mut out = vec![Vec::new()];
    for i in 0..r {
        let mut next = Vec::with_capacity(out.len() * steps);
        for prefix in &out {
            for o in &offsets {
                let mut p: Vec<BigRational> = prefix.clone();
                p.push(&center.coords()[i] + o);
                next.push(p);
            }
        }
        out = next;
    }
    out.into_iter().map(RationalPoint::new).collect()
}

/// Certified Lipschitz constant on `B(center, delta)` plus an exact check
/// over a grid of `per_axis^r` sample points.
pub fn lipschitz_estimate(
    f: &StraightenedFunction,
    center: &RationalPoint,
    delta: &BigRational,
    per_axis: usize,
) -> Result<LipschitzReport> {
    center.check_dim(f.dim())?;
    if !delta.is_positive() {
        return Err(Error::invalid("radius must be positive"));
    }
    let cone = f.domain_cone();
    if !cone.is_full_dimensional() {
        return Err(Error::invalid("domain cone has empty interior"));
    }
    let double = delta * arith::rat(2, 1);
    let vertices = box_vertices(center, &double);
    for v in &vertices {
        if cone.position(v)? != ConePosition::RelativeInterior {
            return Err(Error::invalid(format!(
                "box of radius {} around {center} touches the boundary at {v}",
                format_rational(&double)
            )));
        }
    }
    let fc = f.value(center)?;
    let mut min_g = BigRational::zero();
    for v in &vertices {
        let g = f.value(v)? - &fc;
        if g < min_g {
            min_g = g;
        }
    }
    let m = -min_g;
    let constant = &m * arith::rat(2, 1) / delta;
    let pts = grid(center, delta, per_axis);
    let vals: Vec<BigRational> = pts.iter().map(|p| f.value(p)).collect::<Result<_>>()?;
    let mut report = LipschitzReport {
        constant: constant.clone(),
        sup_bound: m,
        pairs_checked: 0,
        max_ratio: BigRational::zero(),
        holds: true,
        violation: None,
    };
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            report.pairs_checked += 1;
            let dist = pts[i].sub(&pts[j]).norm_inf();
            let diff = (&vals[i] - &vals[j]).abs();
            let ratio = &diff / &dist;
            if ratio > report.max_ratio {
                report.max_ratio = ratio;
            }
            if diff > &constant * &dist && report.holds {
                report.holds = false;
                report.violation = Some((pts[i].clone(), pts[j].clone()));
            }
        }
    }
    Ok(report)
}
