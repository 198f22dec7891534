//! The walk `v_0 = Σ u_i`, `v_{n+1} = v_n + u_{j_n}`, where `j_n` is the
//! unique index whose cone `K_j = R₊x + Σ_{i≠j} R₊u_i` has `v_n` in its
//! interior.
//!
//! In barycentric coordinates `β` of `w_n = v_n/(n+r+1)` with respect to the
//! `u_i`, the point `qx` has coordinates `ω` (the weights), and `w_n` lies in
//! the interior of the simplex `conv(qx, u_i : i ≠ j)` exactly when
//! `β_j/ω_j < β_k/ω_k` for every `k ≠ j`. Since `β = α/(n+r+1)` with `α` the
//! tally of chosen indices (plus one each from `v_0`), every decision is the
//! sign of an integer combination of the weights, which is decided exactly.
//! The walls through `qx` are the zero sets of `φ_ik = β_i ω_k - β_k ω_i`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Serialize, Serializer};
use std::cmp::Ordering;

use super::approx::{scaled_enclosure, Enclosure, USystem};
use super::surd::Surd;
use crate::arith::{self, rat_int};
use crate::error::{Error, Result};
use crate::lattice_cone::LatticePoint;
use crate::linalg;
use crate::superlinear::MonoidFunction;

#[derive(Clone, Debug)]
pub struct WalkOptions {
    pub steps: u64,
    /// `d_N` must fall below this for the walk to count as converged.
    pub threshold: BigRational,
    /// Check distance monotonicity to every wall at every step.
    pub check_hyperplanes: bool,
    /// Smallest `k` from which dyadic block maxima must decrease.
    pub monotone_from: u32,
}

impl Default for WalkOptions {
    fn default() -> Self {
        WalkOptions {
            steps: 100_000,
            threshold: arith::rat(1, 20),
            check_hyperplanes: true,
            monotone_from: 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WalkState {
    pub n: u64,
    pub v: LatticePoint,
    pub j: usize,
    #[serde(serialize_with = "ser_opt_rat")]
    pub e: Option<BigRational>,
}

fn ser_opt_rat<S: Serializer>(
    v: &Option<BigRational>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    v.as_ref().map(arith::format_rational).serialize(s)
}

/// Sign of `Σ c_i ω_i`: integer enclosures first, exact arithmetic when they
/// straddle zero.
struct SignOracle {
    weights: Vec<Surd>,
    enclosures: Vec<(i128, i128)>,
    exact_fallbacks: u64,
}

impl SignOracle {
    fn new(weights: &[Surd]) -> Self {
        SignOracle {
            weights: weights.to_vec(),
            enclosures: weights.iter().map(scaled_enclosure).collect(),
            exact_fallbacks: 0,
        }
    }

    fn sign(&mut self, form: &[(usize, i128)]) -> Ordering {
        let mut lo: i128 = 0;
        let mut hi: i128 = 0;
        let mut ok = true;
        for &(i, c) in form {
            let (a, b) = self.enclosures[i];
            let (x, y) = match (c.checked_mul(a), c.checked_mul(b)) {
                (Some(x), Some(y)) => (x, y),
                _ => {
                    ok = false;
                    break;
                }
            };
            let (x, y) = if c >= 0 { (x, y) } else { (y, x) };
            match (lo.checked_add(x), hi.checked_add(y)) {
                (Some(l), Some(h)) => {
                    lo = l;
                    hi = h;
                }
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if ok && lo > 0 {
            return Ordering::Greater;
        }
        if ok && hi < 0 {
            return Ordering::Less;
        }
        self.exact_fallbacks += 1;
        let mut s = Surd::zero();
        for &(i, c) in form {
            s = &s + &self.weights[i].scale(&rat_int(&BigInt::from(c)));
        }
        s.sign()
    }
}

/// Steps the walk one state at a time.
pub struct Walker<'a> {
    sys: &'a USystem,
    oracle: SignOracle,
    alpha: Vec<u64>,
    v: Vec<i64>,
    u: Vec<Vec<i64>>,
    n: u64,
    f: Option<&'a MonoidFunction>,
    f_v: Option<BigRational>,
    f_u: Vec<BigRational>,
}

impl<'a> Walker<'a> {
    pub fn new(sys: &'a USystem, f: Option<&'a MonoidFunction>) -> Result<Self> {
        let r = sys.rank();
        let zero: Vec<usize> = (0..=r).filter(|&i| sys.weights[i].is_zero()).collect();
        if !zero.is_empty() {
            // qx lies on a face of conv(u_0..u_r), hence on walls of every K_j
            return Err(Error::AmbiguousStep {
                step: 0,
                cones: zero,
            });
        }
        let u = sys
            .u
            .iter()
            .map(LatticePoint::to_i64s)
            .collect::<Result<Vec<_>>>()?;
        let mut v = vec![0i64; r + 1];
        for ui in &u {
            for (c, x) in v.iter_mut().zip(ui) {
                *c = c
                    .checked_add(*x)
                    .ok_or_else(|| Error::Overflow("walk position".into()))?;
            }
        }
        let (f_v, f_u) = match f {
            Some(f) => {
                if f.domain().dim() != r + 1 {
                    return Err(Error::DimensionMismatch {
                        expected: r + 1,
                        found: f.domain().dim(),
                    });
                }
                let fu = sys
                    .u
                    .iter()
                    .map(|p| f.evaluate(p))
                    .collect::<Result<Vec<_>>>()?;
                (Some(f.evaluate(&LatticePoint::from_i64s(&v))?), fu)
            }
            None => (None, Vec::new()),
        };
        Ok(Walker {
            oracle: SignOracle::new(&sys.weights),
            sys,
            alpha: vec![1; r + 1],
            v,
            u,
            n: 0,
            f,
            f_v,
            f_u,
        })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn position(&self) -> &[i64] {
        &self.v
    }

    pub fn tally(&self) -> &[u64] {
        &self.alpha
    }

    /// Sign of `φ_ik` at the current tally, up to the positive factor `n+r+1`.
    fn phi_sign(&mut self, i: usize, k: usize) -> Ordering {
        let (a, b) = (self.alpha[i] as i128, self.alpha[k] as i128);
        self.oracle.sign(&[(k, a), (i, -b)])
    }

    /// The index `j_n` for the current state.
    pub fn choose(&mut self) -> Result<usize> {
        let r = self.sys.rank();
        let mut j = 0;
        for k in 1..=r {
            if self.phi_sign(j, k) == Ordering::Greater {
                j = k;
            }
        }
        for k in 0..=r {
            if k != j && self.phi_sign(j, k) != Ordering::Less {
                return Err(Error::AmbiguousStep {
                    step: self.n,
                    cones: vec![j.min(k), j.max(k)],
                });
            }
        }
        Ok(j)
    }

    /// Advances one step and returns the state it left.
    pub fn step(&mut self) -> Result<WalkState> {
        let j = self.choose()?;
        let before = LatticePoint::from_i64s(&self.v);
        for (c, x) in self.v.iter_mut().zip(&self.u[j]) {
            *c = c
                .checked_add(*x)
                .ok_or_else(|| Error::Overflow("walk position".into()))?;
        }
        self.alpha[j] += 1;
        let e = match (self.f, &self.f_v) {
            (Some(f), Some(prev)) => {
                let next = f.evaluate(&LatticePoint::from_i64s(&self.v))?;
                let e = &next - prev - &self.f_u[j];
                self.f_v = Some(next);
                Some(e)
            }
            _ => None,
        };
        let state = WalkState {
            n: self.n,
            v: before,
            j,
            e,
        };
        self.n += 1;
        Ok(state)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Checkpoint {
    pub n: u64,
    pub v: LatticePoint,
    /// `d_n²` enclosed exactly.
    pub distance_squared: Enclosure,
    pub distance: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BlockMax {
    pub from: u64,
    pub to: u64,
    pub max_distance: f64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct HyperplaneCheck {
    pub walls: usize,
    pub comparisons: u64,
    pub crossings: u64,
    pub on_wall: u64,
    pub violations: u64,
    pub first_violation: Option<(u64, usize, usize)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TallyCheck {
    pub conservation_holds: bool,
    pub frequencies: Vec<f64>,
    pub weights: Vec<f64>,
    pub max_deviation: f64,
    pub bound: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct DefectLog {
    pub logged: u64,
    pub negative: u64,
    pub zero: u64,
    #[serde(serialize_with = "ser_opt_rat")]
    pub min: Option<BigRational>,
    pub first_negative: Option<u64>,
}

fn ser_rle<S: Serializer>(v: &[(usize, u64)], s: S) -> std::result::Result<S::Ok, S::Error> {
    v.iter()
        .map(|&(j, n)| [j as u64, n])
        .collect::<Vec<_>>()
        .serialize(s)
}

#[derive(Clone, Debug, Serialize)]
pub struct WalkReport {
    pub q: u64,
    pub u: Vec<LatticePoint>,
    pub weights: Vec<Enclosure>,
    pub steps: u64,
    pub v0: LatticePoint,
    pub v_final: LatticePoint,
    pub tally: Vec<u64>,
    pub checkpoints: Vec<Checkpoint>,
    pub block_maxima: Vec<BlockMax>,
    pub block_maxima_decreasing: bool,
    pub final_distance: f64,
    #[serde(serialize_with = "crate::lattice_cone::point::serde_num::serialize_rat")]
    pub threshold: BigRational,
    pub converged: bool,
    pub hyperplanes: Option<HyperplaneCheck>,
    pub tally_check: TallyCheck,
    pub defects: Option<DefectLog>,
    #[serde(serialize_with = "ser_rle")]
    pub j_sequence: Vec<(usize, u64)>,
    pub exact_fallbacks: u64,
}

impl WalkReport {
    /// All certified properties together.
    pub fn passes(&self) -> bool {
        self.converged
            && self.block_maxima_decreasing
            && self.tally_check.holds
            && self.tally_check.conservation_holds
            && self
                .hyperplanes
                .as_ref()
                .map_or(true, |h| h.violations == 0)
            && self.defects.as_ref().map_or(true, |d| d.negative == 0)
    }
}

/// `d_n² = ‖v/(n+r+1) - qx‖²` exactly.
fn distance_squared(v: &[i64], n: u64, target: &[Surd]) -> Surd {
    let m = arith::rat(1, (n + target.len() as u64) as i64);
    let mut s = Surd::zero();
    for (c, t) in v.iter().zip(target) {
        let diff = &Surd::from_rational(arith::rat(*c, 1) * &m) - t;
        s = &s + &(&diff * &diff);
    }
    s
}

fn checkpoint(v: &[i64], n: u64, target: &[Surd]) -> Checkpoint {
    let d2 = distance_squared(v, n, target);
    let iv = match d2.as_rational() {
        Some(x) => super::surd::Interval::point(x),
        None => d2.enclosure(96),
    };
    Checkpoint {
        n,
        v: LatticePoint::from_i64s(v),
        distance: iv.mid_f64().max(0.0).sqrt(),
        distance_squared: Enclosure::from(&iv),
    }
}

/// Records, for every wall `φ_ik = 0`, whether the step from `w_n` to
/// `w_{n+1}` moved strictly closer unless it crossed.
fn check_walls(
    oracle: &mut SignOracle,
    before: &[u64],
    j: usize,
    check: &mut HyperplaneCheck,
    step: u64,
) {
    let r = before.len() - 1;
    let m0: i128 = before.iter().map(|&a| a as i128).sum();
    let m1 = m0 + 1;
    let mut after = before.to_vec();
    after[j] += 1;
    for i in 0..=r {
        for k in i + 1..=r {
            let (a0, b0) = (before[i] as i128, before[k] as i128);
            let (a1, b1) = (after[i] as i128, after[k] as i128);
            let old = [(k, a0), (i, -b0)];
            let new = [(k, a1), (i, -b1)];
            let s0 = oracle.sign(&old);
            let s1 = oracle.sign(&new);
            check.comparisons += 1;
            if s0 == Ordering::Equal || s1 == Ordering::Equal {
                check.on_wall += 1;
                continue;
            }
            if s0 != s1 {
                check.crossings += 1;
                continue;
            }
            // |new|/m1 < |old|/m0  ⇔  sign·(m0·new - m1·old) < 0
            let sg: i128 = if s0 == Ordering::Greater { 1 } else { -1 };
            let form = [(k, sg * (m0 * a1 - m1 * a0)), (i, sg * (m1 * b0 - m0 * b1))];
            if oracle.sign(&form) != Ordering::Less {
                check.violations += 1;
                check.first_violation.get_or_insert((step, i, k));
            }
        }
    }
}

pub fn walk(sys: &USystem, f: Option<&MonoidFunction>, opts: &WalkOptions) -> Result<WalkReport> {
    if opts.steps == 0 {
        return Err(Error::invalid("walk needs at least one step"));
    }
    let r = sys.rank();
    let mut w = Walker::new(sys, f)?;
    let target_f64: Vec<f64> = sys.target.iter().map(Surd::to_f64).collect();
    let v0 = LatticePoint::from_i64s(w.position());
    let mut checkpoints = vec![checkpoint(w.position(), 0, &sys.target)];
    let mut hyper = opts.check_hyperplanes.then(|| HyperplaneCheck {
        walls: r * (r + 1) / 2,
        ..HyperplaneCheck::default()
    });
    let mut defects = f.map(|_| DefectLog::default());
    let mut rle: Vec<(usize, u64)> = Vec::new();
    let mut blocks: Vec<BlockMax> = Vec::new();
    let mut final_block = 0f64;
    let half = opts.steps / 2;

    for _ in 0..opts.steps {
        let before = w.tally().to_vec();
        let state = w.step()?;
        if let Some(h) = hyper.as_mut() {
            check_walls(&mut w.oracle, &before, state.j, h, state.n);
        }
        match rle.last_mut() {
            Some((j, c)) if *j == state.j => *c += 1,
            _ => rle.push((state.j, 1)),
        }
        if let (Some(log), Some(e)) = (defects.as_mut(), state.e) {
            log.logged += 1;
            match e.cmp(&BigRational::zero()) {
                Ordering::Less => {
                    log.negative += 1;
                    log.first_negative.get_or_insert(state.n);
                }
                Ordering::Equal => log.zero += 1,
                Ordering::Greater => {}
            }
            if log.min.as_ref().map_or(true, |m| &e < m) {
                log.min = Some(e);
            }
        }
        let n = w.n();
        let scale = 1.0 / (n + r as u64 + 1) as f64;
        let d = w
            .position()
            .iter()
            .zip(&target_f64)
            .map(|(c, t)| (*c as f64 * scale - t).powi(2))
            .sum::<f64>()
            .sqrt();
        // block k covers (2^(k-1), 2^k]
        let k = 64 - (n - 1).leading_zeros();
        let from = if k == 0 { 1 } else { (1u64 << (k - 1)) + 1 };
        match blocks.last_mut() {
            Some(b) if b.from == from => b.max_distance = b.max_distance.max(d),
            _ => blocks.push(BlockMax {
                from,
                to: 1u64 << k,
                max_distance: d,
            }),
        }
        if n >= half {
            final_block = final_block.max(d);
        }
        if n.is_power_of_two() || n == opts.steps {
            checkpoints.push(checkpoint(w.position(), n, &sys.target));
        }
    }
    let steps = opts.steps;
    if let Some(b) = blocks.last_mut() {
        b.to = b.to.min(steps);
    }
    // a block that ends before its dyadic end is replaced by [N/2, N]
    if !steps.is_power_of_two() {
        blocks.pop();
        blocks.push(BlockMax {
            from: half,
            to: steps,
            max_distance: final_block,
        });
    }
    let block_maxima_decreasing = blocks
        .windows(2)
        .filter(|p| p[0].to >= 1u64 << opts.monotone_from)
        .all(|p| p[1].max_distance < p[0].max_distance);

    let v_final = w.position().to_vec();
    let d2 = distance_squared(&v_final, steps, &sys.target);
    let t2 = &opts.threshold * &opts.threshold;
    let converged = (&d2 - &Surd::from_rational(t2)).is_negative();
    let final_distance = d2.to_f64().max(0.0).sqrt();

    let columns: Vec<Vec<BigRational>> = sys
        .u
        .iter()
        .map(|p| p.to_rational().coords().to_vec())
        .collect();
    let target: Vec<BigRational> = v_final.iter().map(|c| arith::rat(*c, 1)).collect();
    let alpha = w.tally().to_vec();
    let conservation_holds = linalg::solve_combination(&columns, &target).is_some_and(|sol| {
        sol.iter()
            .zip(&alpha)
            .all(|(s, a)| *s == arith::rat(*a as i64, 1))
    });
    let total = (steps + r as u64 + 1) as f64;
    let frequencies: Vec<f64> = alpha.iter().map(|a| *a as f64 / total).collect();
    let weights = sys.weights_f64();
    let max_deviation = frequencies
        .iter()
        .zip(&weights)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let bound = 10.0 * final_distance;

    Ok(WalkReport {
        q: sys.q,
        u: sys.u.clone(),
        weights: sys.weight_enclosures.clone(),
        steps,
        v0,
        v_final: LatticePoint::from_i64s(&v_final),
        tally: alpha,
        checkpoints,
        block_maxima: blocks,
        block_maxima_decreasing,
        final_distance,
        threshold: opts.threshold.clone(),
        converged,
        hyperplanes: hyper,
        tally_check: TallyCheck {
            conservation_holds,
            frequencies,
            weights,
            max_deviation,
            bound,
            holds: max_deviation <= bound,
        },
        defects,
        j_sequence: rle,
        exact_fallbacks: w.oracle.exact_fallbacks,
    })
}

/// Replays a run-length encoded index sequence from `v_0`.
pub fn replay(sys: &USystem, j_sequence: &[(usize, u64)]) -> Result<LatticePoint> {
    let mut v: Vec<BigInt> = vec![BigInt::zero(); sys.rank() + 1];
    for u in &sys.u {
        for (c, x) in v.iter_mut().zip(u.coords()) {
            *c += x;
        }
    }
    for &(j, n) in j_sequence {
        let u = sys
            .u
            .get(j)
            .ok_or_else(|| Error::invalid(format!("index {j} out of range")))?;
        for (c, x) in v.iter_mut().zip(u.coords()) {
            *c += x * BigInt::from(n);
        }
    }
    if v.iter().any(Signed::is_negative) {
        return Err(Error::invalid("replayed position left the orthant"));
    }
    Ok(LatticePoint::new(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diophantine::approx::{
        build_u_system, find_approximant, ApproximantOptions, TargetPoint,
    };
    use crate::lattice_cone::FgMonoid;

    fn system(d: &[&str]) -> USystem {
        let x = TargetPoint::parse(d).unwrap();
        let a = find_approximant(&x, &ApproximantOptions::default()).unwrap();
        build_u_system(&x, &a, 64).unwrap()
    }

    #[test]
    fn starts_at_sum_of_u() {
        let sys = system(&["1", "sqrt(2)"]);
        let w = Walker::new(&sys, None).unwrap();
        assert_eq!(w.position(), &[4, 5]);
    }

    #[test]
    fn sqrt2_converges() {
        let sys = system(&["1", "sqrt(2)"]);
        let rep = walk(&sys, None, &WalkOptions::default()).unwrap();
        assert!(rep.converged, "d_N = {}", rep.final_distance);
        assert!(rep.final_distance < 0.05);
        assert!(rep.block_maxima_decreasing, "{:?}", rep.block_maxima);
        let h = rep.hyperplanes.as_ref().unwrap();
        assert_eq!(h.violations, 0);
        assert!(rep.tally_check.conservation_holds);
        assert!(rep.tally_check.holds);
        assert_eq!(replay(&sys, &rep.j_sequence).unwrap(), rep.v_final);
        assert!(rep.checkpoints.iter().any(|c| c.n == 1 << 16));
    }

    #[test]
    fn two_surds_converge() {
        let sys = system(&["1", "sqrt(2)", "sqrt(3)"]);
        let opts = WalkOptions {
            steps: 20_000,
            ..WalkOptions::default()
        };
        let rep = walk(&sys, None, &opts).unwrap();
        assert!(rep.converged);
        assert_eq!(rep.hyperplanes.unwrap().violations, 0);
        assert!(rep.tally_check.holds && rep.tally_check.conservation_holds);
    }

    #[test]
    fn rational_targets_hit_walls() {
        for d in [["1", "1/2"], ["1", "1/3"]] {
            let sys = system(&d);
            let err = walk(&sys, None, &WalkOptions::default()).unwrap_err();
            assert!(matches!(err, Error::AmbiguousStep { .. }), "{d:?}: {err}");
        }
    }

    #[test]
    fn defects_of_a_linear_function_vanish() {
        let sys = system(&["1", "sqrt(2)"]);
        let f = MonoidFunction::from_expr(FgMonoid::standard(2), "3*x + y").unwrap();
        let opts = WalkOptions {
            steps: 500,
            ..WalkOptions::default()
        };
        let rep = walk(&sys, Some(&f), &opts).unwrap();
        let log = rep.defects.unwrap();
        assert_eq!((log.logged, log.zero, log.negative), (500, 500, 0));
    }

    #[test]
    fn defects_of_a_superadditive_function_are_nonnegative() {
        let sys = system(&["1", "sqrt(2)"]);
        let f = MonoidFunction::from_expr(FgMonoid::standard(2), "min(2*x + y, 3*x)").unwrap();
        let opts = WalkOptions {
            steps: 2_000,
            ..WalkOptions::default()
        };
        let rep = walk(&sys, Some(&f), &opts).unwrap();
        assert_eq!(rep.defects.unwrap().negative, 0);
    }
}
