//! Exact predicates over integer points for unit balls (L2) and unit
//! hypercubes (L∞), plus the last-coordinate-first total order used as the
//! tie-breaker everywhere in the crate.
//!
//! Centers are arbitrary-precision rationals. Nothing in here touches a
//! floating point value.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("points are equal; the order is only defined on distinct points")]
    EqualPoints,
    #[error("best point of an empty set")]
    EmptySet,
    #[error("coordinate does not fit in a 64-bit lattice coordinate")]
    Overflow,
    #[error("invalid rational `{0}`")]
    InvalidRational(String),
}

/// A point of Z^d.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IntPoint(Vec<i64>);

impl IntPoint {
    pub fn new(coords: Vec<i64>) -> Result<Self, GeometryError> {
        if coords.is_empty() {
            return Err(GeometryError::ZeroDimension);
        }
        Ok(Self(coords))
    }

    pub fn origin(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be at least 1");
        Self(vec![0; dim])
    }

    /// The unit vector `sign * e_axis` (axis is zero-based).
    pub fn unit(dim: usize, axis: usize, sign: i64) -> Self {
        let mut coords = vec![0; dim];
        coords[axis] = sign;
        Self(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn neg(&self) -> Self {
        Self(self.0.iter().map(|c| -c).collect())
    }

    pub fn to_rational(&self) -> RatPoint {
        RatPoint(self.0.iter().map(|&c| BigRational::from_integer(c.into())).collect())
    }
}

impl fmt::Display for IntPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// A point of Q^d. Coordinates are kept reduced by `BigRational`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RatPoint(Vec<BigRational>);

impl RatPoint {
    pub fn new(coords: Vec<BigRational>) -> Result<Self, GeometryError> {
        if coords.is_empty() {
            return Err(GeometryError::ZeroDimension);
        }
        Ok(Self(coords))
    }

    /// Builds a point from `(numerator, denominator)` pairs.
    pub fn from_fractions(coords: &[(i64, i64)]) -> Result<Self, GeometryError> {
        let coords = coords
            .iter()
            .map(|&(n, d)| {
                if d == 0 {
                    Err(GeometryError::InvalidRational(format!("{n}/0")))
                } else {
                    Ok(BigRational::new(n.into(), d.into()))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(coords)
    }

    pub fn from_integers(coords: &[i64]) -> Result<Self, GeometryError> {
        Self::new(coords.iter().map(|&c| BigRational::from_integer(c.into())).collect())
    }

    pub fn origin(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be at least 1");
        Self(vec![BigRational::zero(); dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[BigRational] {
        &self.0
    }

    pub fn neg(&self) -> Self {
        Self(self.0.iter().map(|c| -c).collect())
    }

    pub fn is_integral(&self) -> bool {
        self.0.iter().all(|c| c.is_integer())
    }
}

impl fmt::Display for RatPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}", format_rational(c))?;
        }
        Ok(())
    }
}

impl FromStr for RatPoint {
    type Err = GeometryError;

    /// Whitespace separated `num/den` or integer tokens.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let coords = s
            .split_whitespace()
            .map(parse_rational)
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(coords)
    }
}

/// `num/den`, or a bare integer when the denominator is one.
pub fn format_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rational(token: &str) -> Result<BigRational, GeometryError> {
    let bad = || GeometryError::InvalidRational(token.to_string());
    let (num, den) = match token.split_once('/') {
        Some((n, d)) => (n, d),
        None => (token, "1"),
    };
    let num: BigInt = num.trim().parse().map_err(|_| bad())?;
    let den: BigInt = den.trim().parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(num, den))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Ball,
    #[serde(rename = "cube")]
    Hypercube,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Ball => "ball",
            Kind::Hypercube => "cube",
        })
    }
}

impl FromStr for Kind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ball" => Ok(Kind::Ball),
            "cube" | "hypercube" => Ok(Kind::Hypercube),
            other => Err(format!("unknown object kind `{other}`")),
        }
    }
}

/// Radius of an enumeration region. Only the unit object and its
/// two-fold dilation are ever needed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Radius {
    Unit,
    Double,
}

impl Radius {
    fn value(self) -> i64 {
        match self {
            Radius::Unit => 1,
            Radius::Double => 2,
        }
    }
}

/// A unit ball `B_d(c, 1)` or unit hypercube `H_d(c, 1)` (side length two).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct UnitObject {
    pub kind: Kind,
    pub center: RatPoint,
}

impl UnitObject {
    pub fn new(kind: Kind, center: RatPoint) -> Self {
        Self { kind, center }
    }

    pub fn ball(center: RatPoint) -> Self {
        Self::new(Kind::Ball, center)
    }

    pub fn cube(center: RatPoint) -> Self {
        Self::new(Kind::Hypercube, center)
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    pub fn contains(&self, p: &IntPoint) -> Result<bool, GeometryError> {
        contains_within(&self.center, Radius::Unit, self.kind, p)
    }

    /// `Q(σ)`: the integer points of the object in row-major order.
    pub fn integer_points(&self) -> Result<Vec<IntPoint>, GeometryError> {
        integer_points_in(&self.center, Radius::Unit, self.kind)
    }

    /// Like [`contains`](Self::contains) for callers that already checked
    /// dimensions.
    pub(crate) fn hits(&self, p: &IntPoint) -> bool {
        debug_assert_eq!(self.dim(), p.dim());
        within(&self.center, Radius::Unit.value(), self.kind, p.coords())
    }
}

fn check_dim(expected: usize, found: usize) -> Result<(), GeometryError> {
    if expected == found {
        Ok(())
    } else {
        Err(GeometryError::DimensionMismatch { expected, found })
    }
}

/// Exact membership of `p` in the ball or hypercube of the given radius.
pub fn contains_within(
    center: &RatPoint,
    radius: Radius,
    kind: Kind,
    p: &IntPoint,
) -> Result<bool, GeometryError> {
    check_dim(center.dim(), p.dim())?;
    Ok(within(center, radius.value(), kind, p.coords()))
}

fn within(center: &RatPoint, radius: i64, kind: Kind, p: &[i64]) -> bool {
    match kind {
        Kind::Ball => {
            let limit = BigRational::from_integer((radius * radius).into());
            let mut sum = BigRational::zero();
            for (c, &x) in center.coords().iter().zip(p) {
                let gap = c - BigRational::from_integer(x.into());
                sum += &gap * &gap;
                if sum > limit {
                    return false;
                }
            }
            true
        }
        Kind::Hypercube => {
            let limit = BigRational::from_integer(radius.into());
            center
                .coords()
                .iter()
                .zip(p)
                .all(|(c, &x)| (c - BigRational::from_integer(x.into())).abs() <= limit)
        }
    }
}

/// Squared L2 distance, exact.
pub fn dist2(center: &RatPoint, p: &IntPoint) -> Result<BigRational, GeometryError> {
    check_dim(center.dim(), p.dim())?;
    Ok(center
        .coords()
        .iter()
        .zip(p.coords())
        .map(|(c, &x)| {
            let gap = c - BigRational::from_integer(x.into());
            &gap * &gap
        })
        .fold(BigRational::zero(), |acc, v| acc + v))
}

fn to_lattice(v: &BigInt) -> Result<i64, GeometryError> {
    v.to_i64().ok_or(GeometryError::Overflow)
}

/// Integer points of `B_d(c, r)` or `H_d(c, r)`, scanning the bounding box
/// `[⌈c_i − r⌉, ⌊c_i + r⌋]` and filtering with the exact predicate. The scan
/// is row-major: the first coordinate varies slowest.
pub fn integer_points_in(
    center: &RatPoint,
    radius: Radius,
    kind: Kind,
) -> Result<Vec<IntPoint>, GeometryError> {
    let r = BigRational::from_integer(radius.value().into());
    let bounds = center
        .coords()
        .iter()
        .map(|c| {
            let lo = to_lattice(&(c - &r).ceil().to_integer())?;
            let hi = to_lattice(&(c + &r).floor().to_integer())?;
            Ok((lo, hi))
        })
        .collect::<Result<Vec<_>, GeometryError>>()?;

    let mut out = Vec::new();
    let mut cursor: Vec<i64> = bounds.iter().map(|&(lo, _)| lo).collect();
    loop {
        if within(center, radius.value(), kind, &cursor) {
            out.push(IntPoint(cursor.clone()));
        }
        // odometer increment, last axis fastest
        let mut axis = cursor.len();
        loop {
            if axis == 0 {
                return Ok(out);
            }
            axis -= 1;
            if cursor[axis] < bounds[axis].1 {
                cursor[axis] += 1;
                break;
            }
            cursor[axis] = bounds[axis].0;
        }
    }
}

/// Compares under `≺`: the highest-indexed differing coordinate decides.
/// Points must share a dimension.
pub fn order(p: &IntPoint, q: &IntPoint) -> Ordering {
    debug_assert_eq!(p.dim(), q.dim());
    p.coords().iter().rev().cmp(q.coords().iter().rev())
}

/// `p ≺ q`.
pub fn precedes(p: &IntPoint, q: &IntPoint) -> Result<bool, GeometryError> {
    check_dim(p.dim(), q.dim())?;
    match order(p, q) {
        Ordering::Less => Ok(true),
        Ordering::Greater => Ok(false),
        Ordering::Equal => Err(GeometryError::EqualPoints),
    }
}

/// The maximum of a set under `≺`.
pub fn best_point<'a, I>(points: I) -> Result<IntPoint, GeometryError>
where
    I: IntoIterator<Item = &'a IntPoint>,
{
    let mut iter = points.into_iter();
    let mut best = iter.next().ok_or(GeometryError::EmptySet)?;
    for p in iter {
        check_dim(best.dim(), p.dim())?;
        if order(best, p) == Ordering::Less {
            best = p;
        }
    }
    Ok(best.clone())
}

/// `floor(a / b)` and whether the division was exact.
pub(crate) fn div_exact(a: i64, b: i64) -> Option<i64> {
    let (q, r) = a.div_rem(&b);
    r.is_zero().then_some(q)
}
