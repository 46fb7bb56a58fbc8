//! Adaptive lower-bound games. Each adversary presents an object, receives
//! the opponent's new hitting point, and picks the next object so the point
//! just placed (and every earlier one) misses it, while one integer point
//! keeps hitting everything. After `d + 1` rounds the opponent has paid
//! `d + 1` points against an optimum of one.

use std::fmt;
use std::str::FromStr;

use num_rational::{BigRational, Ratio};
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::geometry::{best_point, IntPoint, Kind, RatPoint, UnitObject};
use crate::online::{Decision, OnlineError, OnlineHitter, StepRecord, Transcript};
use crate::oracle::{opt_hitting_set, Instance, OracleError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error("round {round}: {point} is not a valid hit ({reason})")]
    InvalidMove { round: usize, point: IntPoint, reason: &'static str },
    #[error("round {round}: expected a hitting point")]
    MissingHit { round: usize },
    #[error("round {round}: the opponent placed no new point")]
    NotForced { round: usize },
    #[error("the game is over")]
    Finished,
    #[error("unsupported dimension {0} for this game")]
    UnsupportedDimension(usize),
    #[error("epsilon must lie strictly between 0 and 1/2")]
    EpsilonOutOfRange,
    #[error(transparent)]
    Online(#[from] OnlineError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// Cost certificate issued when a game finishes on script.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub forced: usize,
    /// A single point hitting every issued object.
    pub opt_point: IntPoint,
}

/// The opponent made a valid move the construction does not handle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OffScript {
    pub round: usize,
    pub point: IntPoint,
    pub reason: &'static str,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Move {
    Present(UnitObject),
    Done(Certificate),
    OffScript(OffScript),
}

/// Exact invariant checks made when an object is issued.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RoundCheck {
    /// 1-based index of the issued object.
    pub round: usize,
    /// The object misses every earlier hitting point.
    pub excludes_previous_hits: bool,
    /// Game specific: for the ball game, the object contains every unused
    /// target point; for the hypercube game, `|Q_i| = 3^(d-i+1)`.
    pub structure_holds: bool,
    /// `|Q_i|` for the hypercube game, unused target count for the ball game.
    pub count: usize,
}

impl RoundCheck {
    pub fn holds(&self) -> bool {
        self.excludes_previous_hits && self.structure_holds
    }
}

pub trait Adversary {
    fn name(&self) -> &'static str;

    fn kind(&self) -> Kind;

    fn dim(&self) -> usize;

    /// `None` opens the game; afterwards pass the point placed for the last
    /// presented object.
    fn next(&mut self, last_hit: Option<&IntPoint>) -> Result<Move, GameError>;

    fn issued(&self) -> &[UnitObject];

    fn checks(&self) -> &[RoundCheck];
}

fn half() -> BigRational {
    BigRational::new(1.into(), 2.into())
}

fn excludes_all(obj: &UnitObject, hits: &[IntPoint]) -> bool {
    hits.iter().all(|h| !obj.hits(h))
}

fn expect_hit<'a>(last_hit: Option<&'a IntPoint>, obj: &UnitObject, round: usize) -> Result<&'a IntPoint, GameError> {
    let h = last_hit.ok_or(GameError::MissingHit { round })?;
    if h.dim() != obj.dim() || !obj.hits(h) {
        return Err(GameError::InvalidMove { round, point: h.clone(), reason: "not inside the presented object" });
    }
    Ok(h)
}

/// Two-round game on the line.
#[derive(Debug, Clone)]
pub struct IntervalGame {
    start: i64,
    issued: Vec<UnitObject>,
    hits: Vec<IntPoint>,
    checks: Vec<RoundCheck>,
    target: Option<i64>,
    done: bool,
}

impl IntervalGame {
    /// First interval is `[start, start + 2]`.
    pub fn new(start: i64) -> Self {
        Self { start, issued: Vec::new(), hits: Vec::new(), checks: Vec::new(), target: None, done: false }
    }

    /// Center of the second interval once `h1` is known. The target
    /// `x' = x + ((i + 1) mod 3)` and its neighbour on the side away from
    /// `h1` are the only integers inside.
    pub fn second_center(start: i64, h1: i64) -> (i64, BigRational) {
        let i = h1 - start;
        let target = start + (i + 1).rem_euclid(3);
        let twice = if h1 < target { 2 * target + 1 } else { 2 * target - 1 };
        (target, BigRational::new(twice.into(), 2.into()))
    }
}

impl Adversary for IntervalGame {
    fn name(&self) -> &'static str {
        "interval"
    }

    fn kind(&self) -> Kind {
        Kind::Hypercube
    }

    fn dim(&self) -> usize {
        1
    }

    fn next(&mut self, last_hit: Option<&IntPoint>) -> Result<Move, GameError> {
        if self.done {
            return Err(GameError::Finished);
        }
        match self.issued.len() {
            0 => {
                let first = UnitObject::cube(RatPoint::from_integers(&[self.start + 1]).expect("dim 1"));
                self.checks.push(RoundCheck { round: 1, excludes_previous_hits: true, structure_holds: true, count: 3 });
                self.issued.push(first.clone());
                Ok(Move::Present(first))
            }
            1 => {
                let h = expect_hit(last_hit, &self.issued[0], 1)?.clone();
                let (target, center) = Self::second_center(self.start, h.coords()[0]);
                let second = UnitObject::cube(RatPoint::new(vec![center]).expect("dim 1"));
                let target_pt = IntPoint::new(vec![target]).expect("dim 1");
                self.hits.push(h);
                self.checks.push(RoundCheck {
                    round: 2,
                    excludes_previous_hits: excludes_all(&second, &self.hits),
                    structure_holds: second.hits(&target_pt) && self.issued[0].hits(&target_pt),
                    count: 1,
                });
                self.target = Some(target);
                self.issued.push(second.clone());
                Ok(Move::Present(second))
            }
            _ => {
                let h = expect_hit(last_hit, &self.issued[1], 2)?.clone();
                self.hits.push(h);
                self.done = true;
                let opt_point = IntPoint::new(vec![self.target.expect("set in round 2")]).expect("dim 1");
                Ok(Move::Done(Certificate { forced: 2, opt_point }))
            }
        }
    }

    fn issued(&self) -> &[UnitObject] {
        &self.issued
    }

    fn checks(&self) -> &[RoundCheck] {
        &self.checks
    }
}

/// Default margin of the ball game: `1/2` for disks, `3/20` in 3-space.
pub fn default_ball_epsilon(dim: usize) -> Option<BigRational> {
    match dim {
        2 => Some(half()),
        3 => Some(BigRational::new(3.into(), 20.into())),
        _ => None,
    }
}

/// Squared distance from the round-`(i+1)` ball center to an unused target
/// point: `((3/2)^(i-1)(1/2+ε) − 1)^2 + (d − i)((3/2)^(i-1)(1/2+ε))^2`.
/// The construction needs this to be at most one.
pub fn remaining_target_dist2(dim: usize, eps: &BigRational, i: usize) -> BigRational {
    let scaled = growth(i) * (half() + eps);
    let gap = &scaled - BigRational::one();
    let rest = BigRational::from_integer((dim as i64 - i as i64).into());
    &gap * &gap + rest * &scaled * &scaled
}

/// `(3/2)^(i-1)`.
fn growth(i: usize) -> BigRational {
    num_traits::pow(BigRational::new(3.into(), 2.into()), i.saturating_sub(1))
}

/// `d + 1` round game with unit balls, `d ∈ {2, 3}`.
#[derive(Debug, Clone)]
pub struct BallGame {
    dim: usize,
    eps: BigRational,
    /// `+1` when `h_1 ∈ P_2 ∪ {c_1}`, `-1` for the mirrored branch.
    sign: i64,
    /// Zero-based axes of target points used so far.
    used: Vec<usize>,
    issued: Vec<UnitObject>,
    hits: Vec<IntPoint>,
    checks: Vec<RoundCheck>,
    halted: bool,
}

impl BallGame {
    pub fn new(dim: usize) -> Result<Self, GameError> {
        let eps = default_ball_epsilon(dim).ok_or(GameError::UnsupportedDimension(dim))?;
        Ok(Self::with_epsilon(dim, eps))
    }

    /// No validation: used to probe the construction outside its range.
    pub fn with_epsilon(dim: usize, eps: BigRational) -> Self {
        Self {
            dim,
            eps,
            sign: 1,
            used: Vec::new(),
            issued: Vec::new(),
            hits: Vec::new(),
            checks: Vec::new(),
            halted: false,
        }
    }

    pub fn epsilon(&self) -> &BigRational {
        &self.eps
    }

    /// `sign · e_axis`, the (possibly mirrored) target point of `P_1`.
    fn target(&self, axis: usize) -> IntPoint {
        IntPoint::unit(self.dim, axis, self.sign)
    }

    fn remaining_targets(&self) -> Vec<IntPoint> {
        (0..self.dim).filter(|a| !self.used.contains(a)).map(|a| self.target(a)).collect()
    }

    /// Center of the ball presented after `i` balls (i ≥ 1).
    fn center_after(&self, i: usize) -> RatPoint {
        let base = BigRational::from_integer(self.sign.into()) * (half() + &self.eps);
        let coords = (0..self.dim)
            .map(|j| if self.used.contains(&j) { BigRational::zero() } else { growth(i) * &base })
            .collect();
        RatPoint::new(coords).expect("dim >= 1")
    }

    fn present(&mut self, obj: UnitObject) -> Move {
        let round = self.issued.len() + 1;
        let remaining = self.remaining_targets();
        let mut structure = remaining.iter().all(|p| obj.hits(p));
        if round == 2 {
            // the other half of the axis points and the origin are excluded
            let origin = IntPoint::origin(self.dim);
            structure &= !obj.hits(&origin) && (0..self.dim).all(|a| !obj.hits(&IntPoint::unit(self.dim, a, -self.sign)));
        }
        self.checks.push(RoundCheck {
            round,
            excludes_previous_hits: excludes_all(&obj, &self.hits),
            structure_holds: structure,
            count: remaining.len(),
        });
        self.issued.push(obj.clone());
        Move::Present(obj)
    }
}

impl Adversary for BallGame {
    fn name(&self) -> &'static str {
        "ball"
    }

    fn kind(&self) -> Kind {
        Kind::Ball
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn next(&mut self, last_hit: Option<&IntPoint>) -> Result<Move, GameError> {
        if self.halted {
            return Err(GameError::Finished);
        }
        let i = self.issued.len();
        if i == 0 {
            self.checks.push(RoundCheck {
                round: 1,
                excludes_previous_hits: true,
                structure_holds: true,
                count: self.dim,
            });
            let first = UnitObject::ball(RatPoint::origin(self.dim));
            self.issued.push(first.clone());
            return Ok(Move::Present(first));
        }
        let h = expect_hit(last_hit, &self.issued[i - 1], i)?.clone();
        self.hits.push(h.clone());

        if i == 1 {
            // Q(σ_1) is exactly the origin and the 2d axis points
            let on_positive_axis = (0..self.dim).any(|a| h == IntPoint::unit(self.dim, a, 1));
            self.sign = if on_positive_axis { -1 } else { 1 };
            let obj = UnitObject::ball(self.center_after(1));
            return Ok(self.present(obj));
        }
        if i == self.dim + 1 {
            self.halted = true;
            let remaining = self.remaining_targets();
            debug_assert_eq!(remaining.len(), 1);
            return Ok(Move::Done(Certificate { forced: self.dim + 1, opt_point: remaining[0].clone() }));
        }
        let Some(axis) = (0..self.dim).find(|&a| !self.used.contains(&a) && h == self.target(a)) else {
            self.halted = true;
            return Ok(Move::OffScript(OffScript { round: i, point: h, reason: "hit is not an unused target point" }));
        };
        self.used.push(axis);
        let obj = UnitObject::ball(self.center_after(i));
        Ok(self.present(obj))
    }

    fn issued(&self) -> &[UnitObject] {
        &self.issued
    }

    fn checks(&self) -> &[RoundCheck] {
        &self.checks
    }
}

/// `d + 1` round game with unit hypercubes, any `d`.
#[derive(Debug, Clone)]
pub struct HypercubeGame {
    dim: usize,
    eps: BigRational,
    signs: Vec<i64>,
    issued: Vec<UnitObject>,
    hits: Vec<IntPoint>,
    checks: Vec<RoundCheck>,
    /// Integer points of the common intersection of the issued cubes.
    common: Vec<IntPoint>,
    done: bool,
}

impl HypercubeGame {
    pub fn new(dim: usize) -> Result<Self, GameError> {
        Self::with_epsilon(dim, BigRational::new(1.into(), 4.into()))
    }

    pub fn with_epsilon(dim: usize, eps: BigRational) -> Result<Self, GameError> {
        if dim == 0 {
            return Err(GameError::UnsupportedDimension(0));
        }
        if eps <= BigRational::zero() || eps >= half() {
            return Err(GameError::EpsilonOutOfRange);
        }
        Ok(Self {
            dim,
            eps,
            signs: Vec::new(),
            issued: Vec::new(),
            hits: Vec::new(),
            checks: Vec::new(),
            common: Vec::new(),
            done: false,
        })
    }

    /// `v_i = (s(1)(1+ε), …, s(i-1)(1+ε), 0, …, 0)`.
    fn translation(&self) -> RatPoint {
        let step = BigRational::one() + &self.eps;
        let coords = (0..self.dim)
            .map(|j| match self.signs.get(j) {
                Some(&s) => BigRational::from_integer(s.into()) * &step,
                None => BigRational::zero(),
            })
            .collect();
        RatPoint::new(coords).expect("dim >= 1")
    }

    fn present(&mut self, obj: UnitObject) -> Move {
        let round = self.issued.len() + 1;
        if round == 1 {
            self.common = obj.integer_points().expect("origin cube");
        } else {
            self.common.retain(|p| obj.hits(p));
        }
        let expected = 3usize.pow((self.dim + 1 - round) as u32);
        self.checks.push(RoundCheck {
            round,
            excludes_previous_hits: excludes_all(&obj, &self.hits),
            structure_holds: self.common.len() == expected,
            count: self.common.len(),
        });
        self.issued.push(obj.clone());
        Move::Present(obj)
    }

    pub fn common_points(&self) -> &[IntPoint] {
        &self.common
    }
}

impl Adversary for HypercubeGame {
    fn name(&self) -> &'static str {
        "cube"
    }

    fn kind(&self) -> Kind {
        Kind::Hypercube
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn next(&mut self, last_hit: Option<&IntPoint>) -> Result<Move, GameError> {
        if self.done {
            return Err(GameError::Finished);
        }
        let i = self.issued.len();
        if i == 0 {
            return Ok(self.present(UnitObject::cube(RatPoint::origin(self.dim))));
        }
        let h = expect_hit(last_hit, &self.issued[i - 1], i)?.clone();
        self.hits.push(h.clone());
        if i == self.dim + 1 {
            self.done = true;
            let opt_point = best_point(&self.common).expect("common intersection is nonempty");
            return Ok(Move::Done(Certificate { forced: self.dim + 1, opt_point }));
        }
        // s(i) from the i-th coordinate of h_i
        self.signs.push(if h.coords()[i - 1] <= 0 { 1 } else { -1 });
        let obj = UnitObject::cube(self.translation());
        Ok(self.present(obj))
    }

    fn issued(&self) -> &[UnitObject] {
        &self.issued
    }

    fn checks(&self) -> &[RoundCheck] {
        &self.checks
    }
}

/// Selects and configures a game.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GameKind {
    Interval,
    Ball,
    Cube,
}

impl GameKind {
    /// `start` only affects the interval game.
    pub fn build(self, dim: usize, start: i64) -> Result<Box<dyn Adversary + Send>, GameError> {
        Ok(match self {
            GameKind::Interval => {
                if dim != 1 {
                    return Err(GameError::UnsupportedDimension(dim));
                }
                Box::new(IntervalGame::new(start))
            }
            GameKind::Ball => Box::new(BallGame::new(dim)?),
            GameKind::Cube => Box::new(HypercubeGame::new(dim)?),
        })
    }
}

impl fmt::Display for GameKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GameKind::Interval => "interval",
            GameKind::Ball => "ball",
            GameKind::Cube => "cube",
        })
    }
}

impl FromStr for GameKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "interval" => Ok(GameKind::Interval),
            "ball" => Ok(GameKind::Ball),
            "cube" | "hypercube" => Ok(GameKind::Cube),
            other => Err(format!("unknown game `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GameReport {
    pub game: &'static str,
    pub algorithm: String,
    pub dim: usize,
    pub seed: u64,
    /// New points the opponent placed.
    pub forced: usize,
    /// Oracle optimum over the issued objects.
    pub opt: usize,
    #[serde(serialize_with = "ratio_text")]
    pub ratio: Ratio<usize>,
    pub certificate: Option<Certificate>,
    /// The certificate point hits every issued object.
    pub certificate_verified: bool,
    pub off_script: bool,
    pub off_script_detail: Option<OffScript>,
    #[serde(serialize_with = "centers_text")]
    pub objects: Vec<UnitObject>,
    pub checks: Vec<RoundCheck>,
    pub transcript: Vec<StepRecord>,
}

impl GameReport {
    pub fn checks_hold(&self) -> bool {
        self.checks.iter().all(RoundCheck::holds)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn ratio_text<S: serde::Serializer>(r: &Ratio<usize>, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{}/{}", r.numer(), r.denom()))
}

fn centers_text<S: serde::Serializer>(objs: &[UnitObject], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(objs.iter().map(|o| o.center.to_string()))
}

/// Drives adversary → object → algorithm → point until the game ends, then
/// checks the outcome against the exact optimum of the issued objects.
pub fn play(
    adversary: &mut dyn Adversary,
    hitter: &mut dyn OnlineHitter,
    seed: u64,
) -> Result<GameReport, GameError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut steps = Vec::new();
    let mut last: Option<IntPoint> = None;
    let ending = loop {
        match adversary.next(last.as_ref())? {
            Move::Present(obj) => {
                let round = adversary.issued().len();
                let outcome = hitter.step(&obj, &mut rng)?;
                match &outcome.decision {
                    Decision::NewPoint { point, .. } => last = Some(point.clone()),
                    Decision::AlreadyHit => return Err(GameError::NotForced { round }),
                }
                steps.push(outcome);
            }
            other => break other,
        }
    };
    let objects = adversary.issued().to_vec();
    let opt = opt_hitting_set(&Instance::new(objects.clone())?)?.len();
    let forced = hitter.hitting_set().len();
    let (certificate, off_script_detail) = match ending {
        Move::Done(cert) => (Some(cert), None),
        Move::OffScript(detail) => (None, Some(detail)),
        Move::Present(_) => unreachable!("loop only breaks on a terminal move"),
    };
    let certificate_verified = certificate
        .as_ref()
        .is_some_and(|c| c.forced == forced && objects.iter().all(|o| o.hits(&c.opt_point)));
    let transcript = Transcript {
        algorithm: hitter.algorithm(),
        seed,
        steps,
        hitting_set: hitter.hitting_set().to_vec(),
    };
    Ok(GameReport {
        game: adversary.name(),
        algorithm: hitter.algorithm().to_string(),
        dim: adversary.dim(),
        seed,
        forced,
        opt,
        ratio: Ratio::new(forced, opt.max(1)),
        certificate,
        certificate_verified,
        off_script: off_script_detail.is_some(),
        off_script_detail,
        objects,
        checks: adversary.checks().to_vec(),
        transcript: transcript.records(),
    })
}
