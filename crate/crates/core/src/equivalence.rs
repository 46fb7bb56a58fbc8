//! Equivalence classes of unit hypercubes: two cubes are equivalent when
//! they contain the same integer points. A class is named by its
//! [`CubeSignature`].

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::ToPrimitive;
use thiserror::Error;

use crate::geometry::{GeometryError, IntPoint, Kind, RatPoint, UnitObject};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EquivalenceError {
    #[error("equivalence classes are defined for hypercubes only")]
    NotHypercube,
    #[error("invalid signature entry `{0}`")]
    Parse(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// One coordinate of a class name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SigEntry {
    /// The center coordinate is exactly this integer.
    Integer(i64),
    /// The center coordinate lies strictly between `floor` and `floor + 1`.
    Fractional(i64),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CubeSignature(Vec<SigEntry>);

impl CubeSignature {
    pub fn new(entries: Vec<SigEntry>) -> Self {
        Self(entries)
    }

    pub fn entries(&self) -> &[SigEntry] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Number of fractional coordinates: the class is Type-(k).
    pub fn type_k(&self) -> usize {
        self.0.iter().filter(|e| matches!(e, SigEntry::Fractional(_))).count()
    }

    /// `2^k · 3^(d-k)`.
    pub fn point_count(&self) -> u64 {
        let k = self.type_k() as u32;
        2u64.pow(k) * 3u64.pow(self.dim() as u32 - k)
    }

    /// A center in the class: integers as is, fractional cells at `floor + 1/2`.
    pub fn representative(&self) -> RatPoint {
        let coords = self
            .0
            .iter()
            .map(|e| match *e {
                SigEntry::Integer(v) => BigRational::from_integer(v.into()),
                SigEntry::Fractional(f) => BigRational::new((2 * f + 1).into(), 2.into()),
            })
            .collect();
        RatPoint::new(coords).expect("signature has at least one entry")
    }

    /// The integer points covered by every cube of the class.
    pub fn integer_points(&self) -> Vec<IntPoint> {
        UnitObject::cube(self.representative())
            .integer_points()
            .expect("representative coordinates are small")
    }
}

impl fmt::Display for CubeSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            match e {
                SigEntry::Integer(v) => write!(f, "I:{v}")?,
                SigEntry::Fractional(fl) => write!(f, "F:{fl}")?,
            }
        }
        Ok(())
    }
}

impl FromStr for CubeSignature {
    type Err = EquivalenceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let entries = s
            .split(',')
            .map(|tok| {
                let tok = tok.trim();
                let bad = || EquivalenceError::Parse(tok.to_string());
                let (tag, value) = tok.split_once(':').ok_or_else(bad)?;
                let value: i64 = value.parse().map_err(|_| bad())?;
                match tag {
                    "I" => Ok(SigEntry::Integer(value)),
                    "F" => Ok(SigEntry::Fractional(value)),
                    _ => Err(bad()),
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self(entries))
    }
}

fn lattice(v: &BigRational) -> Result<i64, GeometryError> {
    v.floor().to_integer().to_i64().ok_or(GeometryError::Overflow)
}

/// Class name read off a center.
pub fn signature_of_center(center: &RatPoint) -> Result<CubeSignature, EquivalenceError> {
    let entries = center
        .coords()
        .iter()
        .map(|c| {
            let floor = lattice(c)?;
            Ok(if c.is_integer() { SigEntry::Integer(floor) } else { SigEntry::Fractional(floor) })
        })
        .collect::<Result<Vec<_>, GeometryError>>()?;
    Ok(CubeSignature(entries))
}

pub fn signature(cube: &UnitObject) -> Result<CubeSignature, EquivalenceError> {
    if cube.kind != Kind::Hypercube {
        return Err(EquivalenceError::NotHypercube);
    }
    signature_of_center(&cube.center)
}

pub fn type_of(sig: &CubeSignature) -> usize {
    sig.type_k()
}

/// Shift applied to integer coordinates when splitting a class.
pub fn decompose_shift() -> BigRational {
    BigRational::new(1.into(), 4.into())
}

/// The `2^(d-k)` Type-(d) classes whose integer points together make up
/// `Q(cube)`. Bit `b` of `t` (counting the integer coordinates in order,
/// most significant first) selects `c_i − ε` when set and `c_i + ε`
/// otherwise.
pub fn decompose(cube: &UnitObject) -> Result<Vec<CubeSignature>, EquivalenceError> {
    if cube.kind != Kind::Hypercube {
        return Err(EquivalenceError::NotHypercube);
    }
    let eps = decompose_shift();
    let integral: Vec<usize> = (0..cube.dim()).filter(|&i| cube.center.coords()[i].is_integer()).collect();
    let m = integral.len();
    (0u64..1 << m)
        .map(|t| {
            let mut coords = cube.center.coords().to_vec();
            for (b, &i) in integral.iter().enumerate() {
                let bit = (t >> (m - 1 - b)) & 1;
                if bit == 0 {
                    coords[i] += &eps;
                } else {
                    coords[i] -= &eps;
                }
            }
            signature_of_center(&RatPoint::new(coords).expect("dim >= 1"))
        })
        .collect()
}

/// The `2^d` Type-(d) classes whose cubes contain `p`: every combination of
/// cells `(p_i − 1, p_i)` and `(p_i, p_i + 1)`.
pub fn classes_containing(p: &IntPoint) -> Vec<CubeSignature> {
    let d = p.dim();
    (0u64..1 << d)
        .map(|mask| {
            CubeSignature(
                p.coords()
                    .iter()
                    .enumerate()
                    .map(|(i, &x)| SigEntry::Fractional(if (mask >> (d - 1 - i)) & 1 == 1 { x } else { x - 1 }))
                    .collect(),
            )
        })
        .collect()
}

/// `N_d`: every Type-(d) class in the decomposition of some input cube.
pub fn type_d_cover(cubes: &[UnitObject]) -> Result<BTreeSet<CubeSignature>, EquivalenceError> {
    let mut out = BTreeSet::new();
    for c in cubes {
        out.extend(decompose(c)?);
    }
    Ok(out)
}
