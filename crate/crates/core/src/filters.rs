//! The filter sublattices `χ_d`. Every unit ball (d ≤ 4) and every unit
//! hypercube (any d) contains at least one point of the matching lattice,
//! so the best-point algorithm only ever places points from it.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::geometry::{div_exact, integer_points_in, GeometryError, IntPoint, Kind, RatPoint, Radius, UnitObject};
use crate::par::{map_indexed, trial_rng, Execution};
use crate::sampling::{center_in_box, DEFAULT_DENOMINATOR};

/// Largest dimension for which the ball lattice meets every unit ball.
pub const MAX_BALL_FILTER_DIM: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FilterError {
    #[error("the ball filter only covers unit balls up to dimension 4, got {0}")]
    BallFilterDimension(usize),
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum FilterVariant {
    /// `u_1 = 2e_1`, `u_i = e_{i-1} + e_i`.
    Ball,
    /// `u_1 = 2e_1`, `u_i = e_{i-1} + 2e_i`.
    Cube,
}

impl FilterVariant {
    pub fn for_kind(kind: Kind) -> Self {
        match kind {
            Kind::Ball => FilterVariant::Ball,
            Kind::Hypercube => FilterVariant::Cube,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilterLattice {
    variant: FilterVariant,
    basis: Vec<IntPoint>,
}

impl FilterLattice {
    pub fn new(variant: FilterVariant, dim: usize) -> Result<Self, FilterError> {
        if dim == 0 {
            return Err(FilterError::ZeroDimension);
        }
        if variant == FilterVariant::Ball && dim > MAX_BALL_FILTER_DIM {
            return Err(FilterError::BallFilterDimension(dim));
        }
        let diag = match variant {
            FilterVariant::Ball => 1,
            FilterVariant::Cube => 2,
        };
        let basis = (0..dim)
            .map(|i| {
                let mut u = vec![0i64; dim];
                if i == 0 {
                    u[0] = 2;
                } else {
                    u[i - 1] = 1;
                    u[i] = diag;
                }
                IntPoint::new(u).expect("dim >= 1")
            })
            .collect();
        Ok(Self { variant, basis })
    }

    pub fn for_kind(kind: Kind, dim: usize) -> Result<Self, FilterError> {
        Self::new(FilterVariant::for_kind(kind), dim)
    }

    pub fn variant(&self) -> FilterVariant {
        self.variant
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[IntPoint] {
        &self.basis
    }

    /// Integer coefficients `α` with `p = Σ α_i u_i`, if they exist.
    ///
    /// Row `i` of the basis matrix only involves `α_i` (diagonal) and
    /// `α_{i+1}` (the superdiagonal from `u_{i+1}`), so the system is solved
    /// from the last coordinate down.
    pub fn coefficients(&self, p: &IntPoint) -> Option<Vec<i64>> {
        let d = self.dim();
        if p.dim() != d {
            return None;
        }
        let mut alpha = vec![0i64; d];
        for i in (0..d).rev() {
            let mut rest = p.coords()[i];
            for (j, u) in self.basis.iter().enumerate().skip(i + 1) {
                rest -= alpha[j] * u.coords()[i];
            }
            alpha[i] = div_exact(rest, self.basis[i].coords()[i])?;
        }
        Some(alpha)
    }

    pub fn is_member(&self, p: &IntPoint) -> bool {
        self.coefficients(p).is_some()
    }

    /// `χ(σ)`: lattice points inside the object, in row-major order.
    pub fn points_in(&self, obj: &UnitObject) -> Result<Vec<IntPoint>, FilterError> {
        self.points_within(&obj.center, Radius::Unit, obj.kind)
    }

    /// Lattice points inside the object dilated to `radius`.
    pub fn points_within(&self, center: &RatPoint, radius: Radius, kind: Kind) -> Result<Vec<IntPoint>, FilterError> {
        if center.dim() != self.dim() {
            return Err(GeometryError::DimensionMismatch { expected: self.dim(), found: center.dim() }.into());
        }
        let mut pts = integer_points_in(center, radius, kind)?;
        pts.retain(|p| self.is_member(p));
        Ok(pts)
    }
}

/// How certificate centers are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CenterMode {
    /// Numerators uniform in `[-window·D, window·D]` over denominator `D`.
    Random,
    /// Every coordinate is `k + 1/2`: the tightest case for both lattices.
    HalfOffset,
}

#[derive(Debug, Clone)]
pub struct CertificateConfig {
    pub trials: u64,
    pub seed: u64,
    pub denominator: i64,
    pub window: i64,
    pub mode: CenterMode,
    pub execution: Execution,
}

impl CertificateConfig {
    pub fn new(trials: u64, seed: u64) -> Self {
        Self {
            trials,
            seed,
            denominator: DEFAULT_DENOMINATOR,
            window: 8,
            mode: CenterMode::Random,
            execution: Execution::Parallel,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CoverageReport {
    pub variant: FilterVariant,
    pub kind: Kind,
    pub dim: usize,
    pub trials: u64,
    /// Centers whose object missed the lattice.
    #[serde(serialize_with = "serialize_centers")]
    pub failures: Vec<RatPoint>,
    pub min_count: usize,
    pub max_count: usize,
}

impl CoverageReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn serialize_centers<S: serde::Serializer>(centers: &[RatPoint], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(centers.iter().map(|c| c.to_string()))
}

/// Samples `trials` unit objects and checks each holds at least one lattice
/// point.
pub fn covering_certificate(
    lattice: &FilterLattice,
    kind: Kind,
    config: &CertificateConfig,
) -> Result<CoverageReport, FilterError> {
    let dim = lattice.dim();
    let counts = map_indexed(config.execution, config.trials, |i| {
        let mut rng = trial_rng(config.seed, i);
        let center = match config.mode {
            CenterMode::Random => center_in_box(&mut rng, dim, config.window, config.denominator),
            CenterMode::HalfOffset => half_offset_center(&mut rng, dim, config.window),
        };
        let n = lattice.points_in(&UnitObject::new(kind, center.clone()))?.len();
        Ok((center, n))
    })
    .into_iter()
    .collect::<Result<Vec<_>, FilterError>>()?;

    let mut report = CoverageReport {
        variant: lattice.variant(),
        kind,
        dim,
        trials: config.trials,
        failures: Vec::new(),
        min_count: usize::MAX,
        max_count: 0,
    };
    for (center, n) in counts {
        report.min_count = report.min_count.min(n);
        report.max_count = report.max_count.max(n);
        if n == 0 {
            report.failures.push(center);
        }
    }
    if config.trials == 0 {
        report.min_count = 0;
    }
    Ok(report)
}

fn half_offset_center<R: Rng + ?Sized>(rng: &mut R, dim: usize, window: i64) -> RatPoint {
    let coords = (0..dim)
        .map(|_| BigRational::new(BigInt::from(2 * rng.gen_range(-window..=window) + 1), 2.into()))
        .collect();
    RatPoint::new(coords).expect("dim >= 1")
}
