//! Online hitting algorithms: best-point over a filter lattice, nearest
//! center, and randomized iterative reweighting.
//!
//! Wherever a step may pick "any" point of an eligible set, the choice is
//! the best point under `≺`, which keeps transcripts reproducible.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigUint, RandBigInt};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::filters::{FilterError, FilterLattice};
use crate::geometry::{best_point, GeometryError, IntPoint, Kind, UnitObject};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OnlineError {
    #[error("object has dimension {found}, algorithm runs in dimension {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("{algorithm} expects {expected} objects, got {found}")]
    KindMismatch { algorithm: Algorithm, expected: Kind, found: Kind },
    #[error("object contains no filter lattice point")]
    EmptyFilterSet,
    #[error("object contains no integer point")]
    NoIntegerPoint,
    #[error(transparent)]
    Filter(#[from] FilterError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Bpa,
    Nc,
    Rir,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Bpa, Algorithm::Nc, Algorithm::Rir];

    /// Fresh state for objects of `kind` in dimension `dim`.
    pub fn build(self, kind: Kind, dim: usize) -> Result<Box<dyn OnlineHitter + Send>, OnlineError> {
        Ok(match self {
            Algorithm::Bpa => Box::new(BestPoint::new(FilterLattice::for_kind(kind, dim)?)),
            Algorithm::Nc => Box::new(NearestCenter::new(dim)),
            Algorithm::Rir => {
                if kind != Kind::Hypercube {
                    return Err(OnlineError::KindMismatch {
                        algorithm: self,
                        expected: Kind::Hypercube,
                        found: kind,
                    });
                }
                Box::new(Rir::new(dim))
            }
        })
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Bpa => "bpa",
            Algorithm::Nc => "nc",
            Algorithm::Rir => "rir",
        })
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bpa" => Ok(Algorithm::Bpa),
            "nc" => Ok(Algorithm::Nc),
            "rir" => Ok(Algorithm::Rir),
            other => Err(format!("unknown algorithm `{other}`")),
        }
    }
}

/// Which set a new point joined. Deterministic algorithms report `Plain`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    A1,
    A2,
    Plain,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decision {
    AlreadyHit,
    NewPoint { point: IntPoint, source: Source },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepOutcome {
    pub decision: Decision,
    /// Step-4 reweighting draws, in draw order (duplicates kept).
    pub drawn: Vec<IntPoint>,
}

impl StepOutcome {
    fn hit() -> Self {
        Self { decision: Decision::AlreadyHit, drawn: Vec::new() }
    }

    fn new_point(point: IntPoint, source: Source) -> Self {
        Self { decision: Decision::NewPoint { point, source }, drawn: Vec::new() }
    }

    pub fn new_point_ref(&self) -> Option<&IntPoint> {
        match &self.decision {
            Decision::NewPoint { point, .. } => Some(point),
            Decision::AlreadyHit => None,
        }
    }
}

/// One online algorithm's mutable state. Points are never removed.
pub trait OnlineHitter {
    fn algorithm(&self) -> Algorithm;

    fn dim(&self) -> usize;

    /// Processes the next object.
    fn step(&mut self, obj: &UnitObject, rng: &mut dyn RngCore) -> Result<StepOutcome, OnlineError>;

    /// The hitting set `A`, in insertion order.
    fn hitting_set(&self) -> &[IntPoint];

    /// RIR bookkeeping, when the algorithm keeps any.
    fn reweighting(&self) -> Option<&Rir> {
        None
    }
}

fn check_dim(expected: usize, obj: &UnitObject) -> Result<(), OnlineError> {
    if obj.dim() == expected {
        Ok(())
    } else {
        Err(OnlineError::DimensionMismatch { expected, found: obj.dim() })
    }
}

fn already_hit(hits: &[IntPoint], obj: &UnitObject) -> bool {
    hits.iter().any(|h| obj.hits(h))
}

/// Places the best filter-lattice point of every unhit object.
#[derive(Debug, Clone)]
pub struct BestPoint {
    filter: FilterLattice,
    hits: Vec<IntPoint>,
}

impl BestPoint {
    pub fn new(filter: FilterLattice) -> Self {
        Self { filter, hits: Vec::new() }
    }

    pub fn filter(&self) -> &FilterLattice {
        &self.filter
    }
}

impl OnlineHitter for BestPoint {
    fn algorithm(&self) -> Algorithm {
        Algorithm::Bpa
    }

    fn dim(&self) -> usize {
        self.filter.dim()
    }

    fn step(&mut self, obj: &UnitObject, _rng: &mut dyn RngCore) -> Result<StepOutcome, OnlineError> {
        check_dim(self.dim(), obj)?;
        if already_hit(&self.hits, obj) {
            return Ok(StepOutcome::hit());
        }
        let candidates = self.filter.points_in(obj)?;
        let p = best_point(&candidates).map_err(|_| OnlineError::EmptyFilterSet)?;
        self.hits.push(p.clone());
        Ok(StepOutcome::new_point(p, Source::Plain))
    }

    fn hitting_set(&self) -> &[IntPoint] {
        &self.hits
    }
}

/// Places the integer point nearest (L2) to the center of every unhit
/// object.
#[derive(Debug, Clone)]
pub struct NearestCenter {
    dim: usize,
    hits: Vec<IntPoint>,
}

impl NearestCenter {
    pub fn new(dim: usize) -> Self {
        Self { dim, hits: Vec::new() }
    }
}

/// Best point among the L2-nearest integer points to `center`.
///
/// Squared distance is separable, so each coordinate rounds independently;
/// an exact half ties between floor and ceiling, and picking the ceiling on
/// every tied axis gives the `≺`-maximum of the product of choices.
pub fn nearest_integer_point(center: &crate::geometry::RatPoint) -> Result<IntPoint, GeometryError> {
    let half = BigRational::new(1.into(), 2.into());
    let coords = center
        .coords()
        .iter()
        .map(|c| {
            let floor = c.floor();
            let frac = c - &floor;
            let v = if frac < half { floor } else { floor + BigRational::one() };
            num_traits::ToPrimitive::to_i64(&v.to_integer()).ok_or(GeometryError::Overflow)
        })
        .collect::<Result<Vec<_>, _>>()?;
    IntPoint::new(coords)
}

impl OnlineHitter for NearestCenter {
    fn algorithm(&self) -> Algorithm {
        Algorithm::Nc
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn step(&mut self, obj: &UnitObject, _rng: &mut dyn RngCore) -> Result<StepOutcome, OnlineError> {
        check_dim(self.dim, obj)?;
        if already_hit(&self.hits, obj) {
            return Ok(StepOutcome::hit());
        }
        let p = nearest_integer_point(&obj.center)?;
        // only possible for balls with d >= 5
        if !obj.hits(&p) {
            return Err(OnlineError::NoIntegerPoint);
        }
        self.hits.push(p.clone());
        Ok(StepOutcome::new_point(p, Source::Plain))
    }

    fn hitting_set(&self) -> &[IntPoint] {
        &self.hits
    }
}

/// Randomized iterative reweighting for unit hypercubes.
///
/// Every integer point starts at weight `3^-(d+1)`; the ledger stores how
/// many times a point's weight was tripled, so `w(p) = 3^(count - d - 1)` and
/// all sums are done on the scaled integers `3^count`.
#[derive(Debug, Clone)]
pub struct Rir {
    dim: usize,
    hits: Vec<IntPoint>,
    a1: BTreeSet<IntPoint>,
    a2: BTreeSet<IntPoint>,
    b: HashSet<IntPoint>,
    ledger: HashMap<IntPoint, u32>,
    step4_rounds: usize,
}

impl Rir {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            hits: Vec::new(),
            a1: BTreeSet::new(),
            a2: BTreeSet::new(),
            b: HashSet::new(),
            ledger: HashMap::new(),
            step4_rounds: 0,
        }
    }

    /// Number of independent draws made in a reweighting step, `⌈5d/2⌉`.
    pub fn draws_per_step(dim: usize) -> usize {
        (5 * dim).div_ceil(2)
    }

    /// Deterministic bound on `|B|` per optimum point, `⌈5d/2⌉(d+2)`.
    pub fn bookkeeping_bound(dim: usize) -> usize {
        Self::draws_per_step(dim) * (dim + 2)
    }

    pub fn a1(&self) -> &BTreeSet<IntPoint> {
        &self.a1
    }

    pub fn a2(&self) -> &BTreeSet<IntPoint> {
        &self.a2
    }

    pub fn bookkeeping(&self) -> &HashSet<IntPoint> {
        &self.b
    }

    pub fn reweighting_rounds(&self) -> usize {
        self.step4_rounds
    }

    pub fn tripling_count(&self, p: &IntPoint) -> u32 {
        self.ledger.get(p).copied().unwrap_or(0)
    }

    /// Raw ledger entries; every stored count is at least one.
    pub fn ledger(&self) -> &HashMap<IntPoint, u32> {
        &self.ledger
    }

    /// `w(p)` as an exact rational.
    pub fn weight(&self, p: &IntPoint) -> BigRational {
        let exp = self.tripling_count(p) as i64 - self.dim as i64 - 1;
        let three = BigRational::from_integer(3.into());
        if exp >= 0 {
            num_traits::pow(three, exp as usize)
        } else {
            num_traits::pow(three, (-exp) as usize).recip()
        }
    }

    /// `3^(d+1) · Σ w(p)`.
    pub fn scaled_weight_sum<'a, I: IntoIterator<Item = &'a IntPoint>>(&self, points: I) -> BigUint {
        points.into_iter().fold(BigUint::zero(), |acc, p| acc + self.scaled_weight(p))
    }

    /// Threshold `3^(d+1)` on the scaled sum, i.e. `Σ w = 1`.
    pub fn scaled_unit(&self) -> BigUint {
        BigUint::from(3u32).pow(self.dim as u32 + 1)
    }

    fn scaled_weight(&self, p: &IntPoint) -> BigUint {
        BigUint::from(3u32).pow(self.tripling_count(p))
    }

    fn draw(&self, q: &[IntPoint], total: &BigUint, rng: &mut dyn RngCore) -> IntPoint {
        let mut ticket = rng.gen_biguint_below(total);
        for p in q {
            let w = self.scaled_weight(p);
            if ticket < w {
                return p.clone();
            }
            ticket -= w;
        }
        unreachable!("ticket is below the total weight of q")
    }

    fn insert(&mut self, p: IntPoint, source: Source) -> StepOutcome {
        match source {
            Source::A1 => self.a1.insert(p.clone()),
            Source::A2 => self.a2.insert(p.clone()),
            Source::Plain => unreachable!("rir always records a1 or a2"),
        };
        self.hits.push(p.clone());
        StepOutcome::new_point(p, source)
    }
}

impl OnlineHitter for Rir {
    fn algorithm(&self) -> Algorithm {
        Algorithm::Rir
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn step(&mut self, obj: &UnitObject, rng: &mut dyn RngCore) -> Result<StepOutcome, OnlineError> {
        check_dim(self.dim, obj)?;
        if obj.kind != Kind::Hypercube {
            return Err(OnlineError::KindMismatch {
                algorithm: Algorithm::Rir,
                expected: Kind::Hypercube,
                found: obj.kind,
            });
        }
        // 1
        if already_hit(&self.hits, obj) {
            return Ok(StepOutcome::hit());
        }
        let q = obj.integer_points()?;
        // 2
        let in_b: Vec<&IntPoint> = q.iter().filter(|p| self.b.contains(*p)).collect();
        if !in_b.is_empty() {
            let p = best_point(in_b)?;
            return Ok(self.insert(p, Source::A1));
        }
        // 3
        let total = self.scaled_weight_sum(&q);
        if total >= self.scaled_unit() {
            let p = best_point(&q)?;
            return Ok(self.insert(p, Source::A2));
        }
        // 4
        let drawn: Vec<IntPoint> = (0..Self::draws_per_step(self.dim))
            .map(|_| self.draw(&q, &total, rng))
            .collect();
        self.b.extend(drawn.iter().cloned());
        let p = best_point(drawn.iter())?;
        for r in &q {
            *self.ledger.entry(r.clone()).or_insert(0) += 1;
        }
        self.step4_rounds += 1;
        let mut outcome = self.insert(p, Source::A1);
        outcome.drawn = drawn;
        Ok(outcome)
    }

    fn hitting_set(&self) -> &[IntPoint] {
        &self.hits
    }

    fn reweighting(&self) -> Option<&Rir> {
        Some(self)
    }
}

/// Result of feeding a whole sequence to one algorithm.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transcript {
    pub algorithm: Algorithm,
    pub seed: u64,
    pub steps: Vec<StepOutcome>,
    pub hitting_set: Vec<IntPoint>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("object {index}: {source}")]
pub struct RunError {
    pub index: usize,
    pub source: OnlineError,
}

/// Runs `algorithm` over `objects` with an RNG seeded from `seed`.
pub fn run(algorithm: Algorithm, objects: &[UnitObject], seed: u64) -> Result<Transcript, RunError> {
    let (transcript, _) = run_with_state(algorithm, objects, seed)?;
    Ok(transcript)
}

/// Like [`run`], also returning the final algorithm state.
pub fn run_with_state(
    algorithm: Algorithm,
    objects: &[UnitObject],
    seed: u64,
) -> Result<(Transcript, Option<Box<dyn OnlineHitter + Send>>), RunError> {
    let Some(first) = objects.first() else {
        let empty = Transcript { algorithm, seed, steps: Vec::new(), hitting_set: Vec::new() };
        return Ok((empty, None));
    };
    let (kind, dim) = (first.kind, first.dim());
    let mut hitter = algorithm.build(kind, dim).map_err(|source| RunError { index: 0, source })?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut steps = Vec::with_capacity(objects.len());
    for (index, obj) in objects.iter().enumerate() {
        if obj.kind != kind {
            return Err(RunError {
                index,
                source: OnlineError::KindMismatch { algorithm, expected: kind, found: obj.kind },
            });
        }
        let outcome = hitter.step(obj, &mut rng).map_err(|source| RunError { index, source })?;
        steps.push(outcome);
    }
    let transcript = Transcript { algorithm, seed, steps, hitting_set: hitter.hitting_set().to_vec() };
    Ok((transcript, Some(hitter)))
}

/// One transcript line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub index: usize,
    pub decision: String,
    pub point: Option<IntPoint>,
    pub source: Option<Source>,
    pub drawn: Vec<IntPoint>,
}

impl Transcript {
    pub fn records(&self) -> Vec<StepRecord> {
        self.steps
            .iter()
            .enumerate()
            .map(|(index, s)| {
                let (decision, point, source) = match &s.decision {
                    Decision::AlreadyHit => ("already_hit", None, None),
                    Decision::NewPoint { point, source } => ("new_point", Some(point.clone()), Some(*source)),
                };
                StepRecord { index, decision: decision.to_string(), point, source, drawn: s.drawn.clone() }
            })
            .collect()
    }

    /// JSON lines, one record per step.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for r in self.records() {
            out.push_str(&serde_json::to_string(&r).expect("records serialize"));
            out.push('\n');
        }
        out
    }

    pub fn new_points(&self) -> usize {
        self.hitting_set.len()
    }
}

/// Whether every object contains at least one point of `hits`.
pub fn is_feasible(objects: &[UnitObject], hits: &[IntPoint]) -> bool {
    objects.iter().all(|o| hits.iter().any(|h| o.contains(h).unwrap_or(false)))
}
