//! Random saturated instances: `⌊ℓ(s)⌋` and `min(⌊ℓ_1(s)⌋, ⌊ℓ_2(s)⌋)` for
//! linear forms with common denominator `D`, saturated at `f = 1 - 1/D`.

use std::collections::BTreeMap;

use num_rational::BigRational;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::checks::SaturationDatum;
use super::system::MobileSystem;
use crate::arith::{format_rational, rat};
use crate::error::Result;
use crate::lattice_cone::{FgMonoid, RationalCone};
use crate::superlinear::MonoidFunction;

pub const POINT: &str = "P";

#[derive(Clone, Debug, Serialize)]
pub struct InstanceDescription {
    pub rank: usize,
    pub denominator: i64,
    /// Numerators of each linear form.
    pub forms: Vec<Vec<i64>>,
    #[serde(serialize_with = "crate::lattice_cone::point::serde_num::serialize_rat")]
    pub f: BigRational,
}

#[derive(Clone, Debug)]
pub struct RandomInstance {
    pub system: MobileSystem,
    pub datum: SaturationDatum,
    pub description: InstanceDescription,
}

fn build(rank: usize, denominator: i64, forms: Vec<Vec<i64>>) -> Result<RandomInstance> {
    let domain = FgMonoid::standard(rank);
    let coeffs: Vec<Vec<BigRational>> = forms
        .iter()
        .map(|c| c.iter().map(|&v| rat(v, denominator)).collect())
        .collect();
    let label = coeffs
        .iter()
        .map(|c| {
            format!(
                "floor({})",
                c.iter().map(format_rational).collect::<Vec<_>>().join(",")
            )
        })
        .collect::<Vec<_>>()
        .join(" min ");
    let f = MonoidFunction::new(
        domain.clone(),
        label,
        crate::superlinear::function::UNBOUNDED_DEGREE,
        move |s| {
            let x = s.to_rational();
            let v = coeffs
                .iter()
                .map(|c| crate::arith::floor(&crate::arith::dot(c, x.coords())))
                .min()
                .expect("at least one form");
            Ok(crate::arith::rat_int(&v))
        },
    );
    let system = MobileSystem::from_components(domain, BTreeMap::from([(POINT.to_string(), f)]));
    let fval = rat(denominator - 1, denominator);
    Ok(RandomInstance {
        system,
        datum: SaturationDatum::single(POINT, fval.clone())?,
        description: InstanceDescription {
            rank,
            denominator,
            forms,
            f: fval,
        },
    })
}

fn form(rng: &mut ChaCha8Rng, rank: usize, max: i64) -> Vec<i64> {
    (0..rank).map(|_| rng.gen_range(1..=max)).collect()
}

/// `⌊c·s/D⌋` with `D <= 6` and numerators in `1..=12`.
pub fn random_floor_linear(rng: &mut ChaCha8Rng, rank: usize) -> Result<RandomInstance> {
    let d = rng.gen_range(1..=6);
    let c = form(rng, rank, 12);
    build(rank, d, vec![c])
}

/// The minimum of two floor-linear forms with a common denominator.
pub fn random_min_floor_linear(rng: &mut ChaCha8Rng, rank: usize) -> Result<RandomInstance> {
    let d = rng.gen_range(1..=6);
    let a = form(rng, rank, 12);
    let b = form(rng, rank, 12);
    build(rank, d, vec![a, b])
}

/// A cone inside the open orthant: the ray `(1)` in rank 1, otherwise two
/// rays with coordinates in `1..=4`.
pub fn random_interior_cone(rng: &mut ChaCha8Rng, rank: usize) -> RationalCone {
    if rank == 1 {
        return RationalCone::from_i64_rays(1, &[&[1]]).expect("ray");
    }
    loop {
        let u = form(rng, rank, 4);
        let v = form(rng, rank, 4);
        let cone = RationalCone::from_i64_rays(rank, &[&u, &v]).expect("positive rays");
        if cone.generators().len() == 2 {
            return cone;
        }
    }
}
