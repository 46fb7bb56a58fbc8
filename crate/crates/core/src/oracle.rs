//! Exact offline minimum hitting set for small instances.
//!
//! Candidates are restricted to `∪ Q(σ)`: a point outside every object hits
//! nothing and can be dropped from any hitting set without losing
//! feasibility, so some minimum hitting set lives inside the union.

use std::cmp::Reverse;

use num_rational::Ratio;
use thiserror::Error;

use crate::geometry::{order, GeometryError, IntPoint, UnitObject};

/// Default limit on the number of objects `opt_hitting_set` accepts.
pub const DEFAULT_CAP: usize = 30;
/// Hard limit imposed by the 64-bit object masks.
pub const MAX_CAP: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("object {index} differs in kind or dimension from object 0")]
    Heterogeneous { index: usize },
    #[error("object {index} contains no integer point")]
    Infeasible { index: usize },
    #[error("{objects} objects exceed the exact-solver cap of {cap}")]
    CapExceeded { objects: usize, cap: usize },
    #[error("the given point set does not hit every object")]
    NotFeasible,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone)]
pub struct Instance {
    objects: Vec<UnitObject>,
    /// Deduplicated, sorted ascending under `≺`.
    candidates: Vec<IntPoint>,
    /// candidate index -> objects it hits
    covers: Vec<Vec<usize>>,
    /// object index -> candidate indices inside it
    members: Vec<Vec<usize>>,
}

impl Instance {
    pub fn new(objects: Vec<UnitObject>) -> Result<Self, OracleError> {
        if let Some(first) = objects.first() {
            if let Some(index) = objects.iter().position(|o| o.kind != first.kind || o.dim() != first.dim()) {
                return Err(OracleError::Heterogeneous { index });
            }
        }
        let mut per_object = Vec::with_capacity(objects.len());
        for (index, o) in objects.iter().enumerate() {
            let q = o.integer_points()?;
            if q.is_empty() {
                return Err(OracleError::Infeasible { index });
            }
            per_object.push(q);
        }
        let mut candidates: Vec<IntPoint> = per_object.iter().flatten().cloned().collect();
        candidates.sort_by(order);
        candidates.dedup();

        let mut covers = vec![Vec::new(); candidates.len()];
        let members = per_object
            .iter()
            .enumerate()
            .map(|(o, q)| {
                q.iter()
                    .map(|p| {
                        let c = candidates.binary_search_by(|x| order(x, p)).expect("candidate present");
                        covers[c].push(o);
                        c
                    })
                    .collect()
            })
            .collect();
        Ok(Self { objects, candidates, covers, members })
    }

    pub fn objects(&self) -> &[UnitObject] {
        &self.objects
    }

    pub fn candidates(&self) -> &[IntPoint] {
        &self.candidates
    }

    pub fn is_hitting_set(&self, points: &[IntPoint]) -> bool {
        self.objects.iter().all(|o| points.iter().any(|p| o.contains(p).unwrap_or(false)))
    }
}

/// Max-coverage greedy; ties go to the best point.
pub fn greedy_hitting_set(inst: &Instance) -> Vec<IntPoint> {
    greedy_indices(inst).into_iter().map(|c| inst.candidates[c].clone()).collect()
}

fn greedy_indices(inst: &Instance) -> Vec<usize> {
    let mut covered = vec![false; inst.objects.len()];
    let mut remaining = inst.objects.len();
    let mut chosen = Vec::new();
    while remaining > 0 {
        // candidates are sorted ascending under ≺, so `max_by_key` keeps the
        // last (best) one among equal gains
        let (c, gain) = inst
            .covers
            .iter()
            .enumerate()
            .map(|(c, objs)| (c, objs.iter().filter(|&&o| !covered[o]).count()))
            .max_by_key(|&(_, gain)| gain)
            .expect("feasible instance has candidates");
        debug_assert!(gain > 0);
        for &o in &inst.covers[c] {
            if !covered[o] {
                covered[o] = true;
                remaining -= 1;
            }
        }
        chosen.push(c);
    }
    chosen
}

struct Solver<'a> {
    inst: &'a Instance,
    masks: Vec<u64>,
    /// objects sharing at least one candidate with each object (itself included)
    conflicts: Vec<u64>,
    /// objects in ascending |Q| order
    by_size: Vec<usize>,
}

impl<'a> Solver<'a> {
    fn new(inst: &'a Instance) -> Self {
        let masks: Vec<u64> = inst.covers.iter().map(|objs| objs.iter().fold(0u64, |m, &o| m | (1 << o))).collect();
        let conflicts = inst
            .members
            .iter()
            .map(|cands| cands.iter().fold(0u64, |m, &c| m | masks[c]))
            .collect();
        let mut by_size: Vec<usize> = (0..inst.objects.len()).collect();
        by_size.sort_by_key(|&o| (inst.members[o].len(), o));
        Self { inst, masks, conflicts, by_size }
    }

    /// Size of a greedily found set of pairwise candidate-disjoint uncovered
    /// objects; each needs its own hitting point.
    fn packing_bound(&self, uncovered: u64) -> usize {
        let mut avail = uncovered;
        let mut count = 0;
        for &o in &self.by_size {
            if avail & (1 << o) != 0 {
                count += 1;
                avail &= !self.conflicts[o];
            }
        }
        count
    }

    /// Whether `uncovered` can be hit by at most `budget` candidates with
    /// index `>= min`.
    fn feasible(&self, uncovered: u64, budget: usize, min: usize) -> bool {
        if uncovered == 0 {
            return true;
        }
        if budget == 0 || self.packing_bound(uncovered) > budget {
            return false;
        }
        // branch on the uncovered object with the fewest usable candidates
        let mut pick: Option<(usize, usize)> = None;
        for &o in &self.by_size {
            if uncovered & (1 << o) == 0 {
                continue;
            }
            let usable = self.inst.members[o].iter().filter(|&&c| c >= min).count();
            if pick.is_none_or(|(_, n)| usable < n) {
                pick = Some((o, usable));
            }
        }
        let (o, usable) = pick.expect("uncovered is nonzero");
        if usable == 0 {
            return false;
        }
        let mut branch: Vec<usize> = self.inst.members[o].iter().copied().filter(|&c| c >= min).collect();
        branch.sort_by_key(|&c| (Reverse((self.masks[c] & uncovered).count_ones()), Reverse(c)));
        branch
            .into_iter()
            .any(|c| self.feasible(uncovered & !self.masks[c], budget - 1, min))
    }
}

/// Minimum hitting set; among minima, the lexicographically least set when
/// each set is listed in ascending `≺` order.
pub fn opt_hitting_set(inst: &Instance) -> Result<Vec<IntPoint>, OracleError> {
    opt_hitting_set_capped(inst, DEFAULT_CAP)
}

pub fn opt_hitting_set_capped(inst: &Instance, cap: usize) -> Result<Vec<IntPoint>, OracleError> {
    let n = inst.objects.len();
    let cap = cap.min(MAX_CAP);
    if n > cap {
        return Err(OracleError::CapExceeded { objects: n, cap });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let solver = Solver::new(inst);
    let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let upper = greedy_indices(inst).len();
    let lower = solver.packing_bound(all);
    let size = (lower..=upper)
        .find(|&k| solver.feasible(all, k, 0))
        .expect("greedy size is feasible");

    // lexicographic reconstruction: smallest first element that still
    // admits a completion, and so on
    let mut chosen = Vec::with_capacity(size);
    let mut uncovered = all;
    let mut min = 0;
    for slot in 0..size {
        let left = size - slot - 1;
        let c = (min..inst.candidates.len())
            .find(|&c| solver.feasible(uncovered & !solver.masks[c], left, c + 1))
            .expect("a completion exists");
        chosen.push(c);
        uncovered &= !solver.masks[c];
        min = c + 1;
    }
    debug_assert_eq!(uncovered, 0);
    let result: Vec<IntPoint> = chosen.into_iter().map(|c| inst.candidates[c].clone()).collect();
    assert!(inst.is_hitting_set(&result), "oracle produced an infeasible set");
    Ok(result)
}

/// `|A| / |OPT|`.
pub fn competitive_ratio(hits: &[IntPoint], inst: &Instance) -> Result<Ratio<usize>, OracleError> {
    if !inst.is_hitting_set(hits) {
        return Err(OracleError::NotFeasible);
    }
    let opt = opt_hitting_set(inst)?;
    if opt.is_empty() {
        return Ok(Ratio::from_integer(1));
    }
    Ok(Ratio::new(hits.len(), opt.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::RatPoint;

    fn cube(c: &[i64]) -> UnitObject {
        UnitObject::cube(RatPoint::from_integers(c).unwrap())
    }

    fn disk(c: &[i64]) -> UnitObject {
        UnitObject::ball(RatPoint::from_integers(c).unwrap())
    }

    #[test]
    fn greedy_examples() {
        let one = Instance::new(vec![cube(&[0, 0])]).unwrap();
        assert_eq!(greedy_hitting_set(&one).len(), 1);
        let disjoint = Instance::new(vec![cube(&[0, 0]), cube(&[5, 0]), cube(&[0, 5])]).unwrap();
        assert_eq!(greedy_hitting_set(&disjoint).len(), 3);
        let common = Instance::new(vec![
            UnitObject::cube(RatPoint::from_fractions(&[(1, 2), (1, 3)]).unwrap()),
            UnitObject::cube(RatPoint::from_fractions(&[(-1, 2), (-3, 4)]).unwrap()),
            cube(&[1, 1]),
        ])
        .unwrap();
        assert_eq!(greedy_hitting_set(&common), vec![IntPoint::new(vec![0, 0]).unwrap()]);
    }

    #[test]
    fn opt_examples() {
        let two = Instance::new(vec![disk(&[0, 0]), disk(&[3, 0])]).unwrap();
        assert_eq!(opt_hitting_set(&two).unwrap().len(), 2);
        assert!(opt_hitting_set(&Instance::new(vec![]).unwrap()).unwrap().is_empty());
    }

    #[test]
    fn opt_is_canonical() {
        // {0,1,2} ∩ {1,2,3}: both 1 and 2 are optimal, 1 ≺ 2
        let inst = Instance::new(vec![cube(&[1]), cube(&[2])]).unwrap();
        assert_eq!(opt_hitting_set(&inst).unwrap(), vec![IntPoint::new(vec![1]).unwrap()]);
    }

    #[test]
    fn greedy_upper_bounds_opt() {
        let objs: Vec<_> = [0, 2, 4, 6].iter().map(|&x| cube(&[x])).collect();
        let inst = Instance::new(objs).unwrap();
        let opt = opt_hitting_set(&inst).unwrap();
        assert_eq!(opt.len(), 2);
        assert!(opt.len() <= greedy_hitting_set(&inst).len());
    }

    #[test]
    fn cap_and_errors() {
        let objs: Vec<_> = (0..31).map(|x| cube(&[3 * x])).collect();
        let inst = Instance::new(objs).unwrap();
        assert_eq!(opt_hitting_set(&inst), Err(OracleError::CapExceeded { objects: 31, cap: 30 }));
        assert_eq!(opt_hitting_set_capped(&inst, 64).unwrap().len(), 31);
        assert_eq!(
            Instance::new(vec![cube(&[0]), cube(&[0, 0])]).unwrap_err(),
            OracleError::Heterogeneous { index: 1 }
        );
        let hole = UnitObject::ball(RatPoint::from_fractions(&[(1, 2); 5]).unwrap());
        assert_eq!(Instance::new(vec![hole]).unwrap_err(), OracleError::Infeasible { index: 0 });
    }

    #[test]
    fn ratio_examples() {
        let inst = Instance::new(vec![cube(&[1]), cube(&[2])]).unwrap();
        let pts = |v: &[i64]| v.iter().map(|&x| IntPoint::new(vec![x]).unwrap()).collect::<Vec<_>>();
        assert_eq!(competitive_ratio(&pts(&[0, 3]), &inst).unwrap(), Ratio::new(2, 1));
        assert_eq!(competitive_ratio(&pts(&[2]), &inst).unwrap(), Ratio::from_integer(1));
        assert_eq!(competitive_ratio(&pts(&[0]), &inst), Err(OracleError::NotFeasible));
    }
}
