//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use lattice_hitting::geometry::{IntPoint, Kind, UnitObject};
use lattice_hitting::online::{Algorithm, Decision, OnlineError, OnlineHitter, Source, StepOutcome};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use rand::RngCore;

/// Containment by a separate exact computation on the center coordinates.
pub fn inside(obj: &UnitObject, p: &[i64]) -> bool {
    let diffs = obj.center.coords().iter().zip(p).map(|(c, &x)| c - BigRational::from_integer(x.into()));
    match obj.kind {
        Kind::Ball => {
            let sum = diffs.fold(BigRational::from_integer(0.into()), |acc, d| acc + &d * &d);
            sum <= BigRational::one()
        }
        Kind::Hypercube => diffs.into_iter().all(|d| d.abs() <= BigRational::one()),
    }
}

fn ceil(r: &BigRational) -> i64 {
    r.ceil().to_integer().to_i64().unwrap()
}

fn floor(r: &BigRational) -> i64 {
    r.floor().to_integer().to_i64().unwrap()
}

/// Integer points of the bounding box `[c - 1, c + 1]`.
pub fn bounding_box(obj: &UnitObject) -> Vec<Vec<i64>> {
    let ranges: Vec<(i64, i64)> = obj
        .center
        .coords()
        .iter()
        .map(|c| (ceil(&(c - BigRational::one())), floor(&(c + BigRational::one()))))
        .collect();
    let mut out = vec![Vec::new()];
    for (lo, hi) in ranges {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<i64>| {
                (lo..=hi).map(move |v| {
                    let mut q = prefix.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    out
}

/// `Q(σ)` by scanning the bounding box.
pub fn q_set(obj: &UnitObject) -> BTreeSet<Vec<i64>> {
    bounding_box(obj).into_iter().filter(|p| inside(obj, p)).collect()
}

/// Integer points shared by every object.
pub fn common_points(objects: &[UnitObject]) -> BTreeSet<Vec<i64>> {
    let Some(first) = objects.first() else { return BTreeSet::new() };
    q_set(first).into_iter().filter(|p| objects.iter().all(|o| inside(o, p))).collect()
}

/// Even coordinate sum.
pub fn in_ball_lattice(p: &[i64]) -> bool {
    p.iter().sum::<i64>().rem_euclid(2) == 0
}

/// Solves `p = Σ a_i u_i` for `u_1 = 2e_1`, `u_i = e_{i-1} + 2e_i`.
pub fn in_cube_lattice(p: &[i64]) -> bool {
    let mut next = 0i64;
    for &x in p.iter().rev() {
        let rem = x - next;
        if rem.rem_euclid(2) != 0 {
            return false;
        }
        next = rem / 2;
    }
    true
}

pub fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn numerators(obj: &UnitObject, denom: i64) -> Vec<i64> {
    obj.center
        .coords()
        .iter()
        .map(|c| {
            let scaled = c * BigRational::from_integer(denom.into());
            assert!(scaled.is_integer(), "center off the grid");
            scaled.to_integer().to_i64().unwrap()
        })
        .collect()
}

/// Opens with `first`, then always takes the least unused axis point
/// `±e_k` inside the presented ball.
pub struct ScriptedBallPlayer {
    dim: usize,
    first: IntPoint,
    hits: Vec<IntPoint>,
}

impl ScriptedBallPlayer {
    pub fn new(first: IntPoint) -> Self {
        Self { dim: first.dim(), first, hits: Vec::new() }
    }
}

impl OnlineHitter for ScriptedBallPlayer {
    fn algorithm(&self) -> Algorithm {
        Algorithm::Bpa
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn step(&mut self, obj: &UnitObject, _rng: &mut dyn RngCore) -> Result<StepOutcome, OnlineError> {
        if self.hits.iter().any(|h| inside(obj, h.coords())) {
            return Ok(StepOutcome { decision: Decision::AlreadyHit, drawn: Vec::new() });
        }
        let point = if self.hits.is_empty() {
            self.first.clone()
        } else {
            (0..self.dim)
                .flat_map(|a| [1, -1].map(|s| IntPoint::unit(self.dim, a, s)))
                .find(|p| inside(obj, p.coords()) && !self.hits.contains(p))
                .or_else(|| q_set(obj).into_iter().next().map(|c| IntPoint::new(c).unwrap()))
                .ok_or(OnlineError::NoIntegerPoint)?
        };
        self.hits.push(point.clone());
        Ok(StepOutcome { decision: Decision::NewPoint { point, source: Source::Plain }, drawn: Vec::new() })
    }

    fn hitting_set(&self) -> &[IntPoint] {
        &self.hits
    }
}

/// Least `k` with a `k`-subset of `candidates` hitting every object.
pub fn exhaustive_opt(objects: &[UnitObject]) -> Option<usize> {
    let candidates: BTreeSet<Vec<i64>> = objects.iter().flat_map(q_set).collect();
    let candidates: Vec<Vec<i64>> = candidates.into_iter().collect();
    let masks: Vec<u32> = candidates
        .iter()
        .map(|c| objects.iter().enumerate().filter(|(_, o)| inside(o, c)).fold(0u32, |m, (i, _)| m | 1 << i))
        .collect();
    let all = if objects.len() == 32 { u32::MAX } else { (1u32 << objects.len()) - 1 };
    let n = candidates.len();
    assert!(n <= 24, "exhaustive search limited to small candidate sets");
    let mut cover = vec![0u32; 1 << n];
    let mut best: Option<usize> = if all == 0 { Some(0) } else { None };
    for s in 1usize..1 << n {
        let low = s.trailing_zeros() as usize;
        cover[s] = cover[s & (s - 1)] | masks[low];
        if cover[s] == all {
            let k = s.count_ones() as usize;
            best = Some(best.map_or(k, |b| b.min(k)));
        }
    }
    best
}
