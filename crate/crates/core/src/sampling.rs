//! Random rational centers with a fixed denominator.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;

use crate::geometry::{IntPoint, Kind, RatPoint};

/// Prime denominator used for random centers unless a caller overrides it.
pub const DEFAULT_DENOMINATOR: i64 = 97;

/// Uniform center in `[-window, window]^d` on the grid `(1/denom) Z^d`.
pub fn center_in_box<R: Rng + ?Sized>(rng: &mut R, dim: usize, window: i64, denom: i64) -> RatPoint {
    let span = window * denom;
    grid_point(
        (0..dim).map(|_| rng.gen_range(-span..=span)).collect(),
        denom,
        None,
    )
}

/// Uniform grid center inside the unit object of `kind` around `anchor`;
/// the resulting object always contains `anchor`.
pub fn center_near<R: Rng + ?Sized>(rng: &mut R, anchor: &IntPoint, kind: Kind, denom: i64) -> RatPoint {
    let dim = anchor.dim();
    loop {
        let offsets: Vec<i64> = (0..dim).map(|_| rng.gen_range(-denom..=denom)).collect();
        let accept = match kind {
            Kind::Hypercube => true,
            Kind::Ball => {
                let norm: i128 = offsets.iter().map(|&o| (o as i128) * (o as i128)).sum();
                norm <= (denom as i128) * (denom as i128)
            }
        };
        if accept {
            return grid_point(offsets, denom, Some(anchor));
        }
    }
}

/// Uniform grid center in `[0, side]^d`.
pub fn center_in_range<R: Rng + ?Sized>(rng: &mut R, dim: usize, side: i64, denom: i64) -> RatPoint {
    let span = side * denom;
    grid_point((0..dim).map(|_| rng.gen_range(0..=span)).collect(), denom, None)
}

fn grid_point(numerators: Vec<i64>, denom: i64, anchor: Option<&IntPoint>) -> RatPoint {
    let coords = numerators
        .into_iter()
        .enumerate()
        .map(|(i, n)| {
            let shift = anchor.map_or(0, |a| a.coords()[i]);
            BigRational::new(BigInt::from(n) + BigInt::from(shift) * denom, denom.into())
        })
        .collect();
    RatPoint::new(coords).expect("dimension is positive")
}
