//! Experiment plumbing shared by the command-line tool, the benches and the
//! acceptance tests: instance generation, batched runs, ratio reports and
//! the verification suites.

pub mod instance;
pub mod suites;

use std::collections::BTreeSet;
use std::time::Instant;

use num_rational::{BigRational, Ratio};
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::adversary::{play, Adversary, BallGame, GameError, HypercubeGame};
use crate::geometry::{format_rational, integer_points_in, GeometryError, IntPoint, Kind, Radius, RatPoint, UnitObject};
use crate::online::{is_feasible, run, run_with_state, Algorithm, OnlineError, RunError};
use crate::oracle::{opt_hitting_set, Instance, OracleError};
use crate::par::{map_indexed, trial_rng, Execution};
use crate::sampling::{center_in_range, center_near, DEFAULT_DENOMINATOR};

pub use instance::{InstanceError, InstanceFile};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HarnessError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Online(#[from] OnlineError),
    #[error("object {}: {}", .0.index, .0.source)]
    Run(RunError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("unknown suite `{0}`")]
    UnknownSuite(String),
}

impl From<RunError> for HarnessError {
    fn from(e: RunError) -> Self {
        HarnessError::Run(e)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GenerateMode {
    /// `count` objects around `anchor`, each containing it.
    Cluster { anchor: IntPoint, count: usize },
    /// `count` centers uniform in `[0, side]^d`.
    Random { side: i64, count: usize },
    /// The objects an adaptive adversary issues against `algorithm`.
    Adversarial { algorithm: Algorithm },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenerateParams {
    pub kind: Kind,
    pub dim: usize,
    pub mode: GenerateMode,
    pub seed: u64,
    pub denominator: i64,
}

impl GenerateParams {
    pub fn new(kind: Kind, dim: usize, mode: GenerateMode, seed: u64) -> Self {
        Self { kind, dim, mode, seed, denominator: DEFAULT_DENOMINATOR }
    }
}

/// `count` objects of `kind` whose centers lie on the `1/denom` grid inside
/// the unit object around `anchor`.
pub fn cluster_objects<R: Rng + ?Sized>(
    rng: &mut R,
    kind: Kind,
    anchor: &IntPoint,
    count: usize,
    denom: i64,
) -> Vec<UnitObject> {
    (0..count).map(|_| UnitObject::new(kind, center_near(rng, anchor, kind, denom))).collect()
}

pub fn generate(params: &GenerateParams) -> Result<InstanceFile, HarnessError> {
    let GenerateParams { kind, dim, seed, denominator, .. } = *params;
    if dim == 0 {
        return Err(HarnessError::InvalidParams("dimension must be positive".into()));
    }
    if denominator < 1 {
        return Err(HarnessError::InvalidParams("denominator must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let objects = match &params.mode {
        GenerateMode::Cluster { anchor, count } => {
            if anchor.dim() != dim {
                return Err(HarnessError::InvalidParams(format!(
                    "anchor has {} coordinates, expected {dim}",
                    anchor.dim()
                )));
            }
            cluster_objects(&mut rng, kind, anchor, *count, denominator)
        }
        GenerateMode::Random { side, count } => {
            if *side < 1 {
                return Err(HarnessError::InvalidParams("box side must be positive".into()));
            }
            (0..*count)
                .map(|_| UnitObject::new(kind, center_in_range(&mut rng, dim, *side, denominator)))
                .collect()
        }
        GenerateMode::Adversarial { algorithm } => {
            let mut adversary: Box<dyn Adversary> = match kind {
                Kind::Ball => Box::new(BallGame::new(dim)?),
                Kind::Hypercube => Box::new(HypercubeGame::new(dim)?),
            };
            let mut hitter = algorithm.build(kind, dim)?;
            play(adversary.as_mut(), hitter.as_mut(), seed)?.objects
        }
    };
    Ok(InstanceFile::new(kind, dim, objects)?)
}

/// `1 + 4d + Σ_{i=2..4} 2^i·C(d, i)`: integer points within distance two of
/// the origin.
pub fn nc_bound(d: usize) -> u64 {
    let d = d as u64;
    let choose = |n: u64, k: u64| -> u64 {
        if k > n {
            return 0;
        }
        (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
    };
    1 + 4 * d + (2..=4).map(|i| (1u64 << i) * choose(d, i)).sum::<u64>()
}

/// The same count by enumerating `B_d(0, 2) ∩ Z^d`.
pub fn nc_brute_force(d: usize) -> Result<u64, GeometryError> {
    if d == 0 {
        return Err(GeometryError::ZeroDimension);
    }
    Ok(integer_points_in(&RatPoint::origin(d), Radius::Double, Kind::Ball)?.len() as u64)
}

/// A batch of independent cluster instances.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterSpec {
    pub kind: Kind,
    pub dim: usize,
    pub clusters: u64,
    pub per_cluster: usize,
    pub denominator: i64,
    /// Anchors are drawn from `[-anchor_window, anchor_window]^d`.
    pub anchor_window: i64,
    pub seed: u64,
    pub execution: Execution,
}

impl ClusterSpec {
    pub fn new(kind: Kind, dim: usize, clusters: u64, per_cluster: usize, seed: u64) -> Self {
        Self {
            kind,
            dim,
            clusters,
            per_cluster,
            denominator: DEFAULT_DENOMINATOR,
            anchor_window: 8,
            seed,
            execution: Execution::Parallel,
        }
    }

    /// Anchor and objects of cluster `index`.
    pub fn instance(&self, index: u64) -> (IntPoint, Vec<UnitObject>) {
        let mut rng = trial_rng(self.seed, index);
        let anchor = IntPoint::new(
            (0..self.dim).map(|_| rng.gen_range(-self.anchor_window..=self.anchor_window)).collect(),
        )
        .expect("dim >= 1");
        let objects = cluster_objects(&mut rng, self.kind, &anchor, self.per_cluster, self.denominator);
        (anchor, objects)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClusterOutcome {
    pub index: u64,
    pub anchor: IntPoint,
    pub new_points: usize,
    pub feasible: bool,
}

/// Runs `algorithm` over every cluster of `spec`.
pub fn cluster_outcomes(spec: &ClusterSpec, algorithm: Algorithm) -> Result<Vec<ClusterOutcome>, HarnessError> {
    if spec.dim == 0 {
        return Err(HarnessError::InvalidParams("dimension must be positive".into()));
    }
    map_indexed(spec.execution, spec.clusters, |index| {
        let (anchor, objects) = spec.instance(index);
        let transcript = run(algorithm, &objects, spec.seed ^ index)?;
        Ok(ClusterOutcome {
            index,
            anchor,
            new_points: transcript.new_points(),
            feasible: is_feasible(&objects, &transcript.hitting_set),
        })
    })
    .into_iter()
    .collect()
}

/// One `(instance, algorithm, seed)` run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReportRow {
    pub instance: usize,
    pub algorithm: Algorithm,
    pub seed: u64,
    pub hits: usize,
    pub opt: usize,
    #[serde(serialize_with = "ratio_text")]
    pub ratio: Ratio<usize>,
    /// Wall-clock microseconds, recorded only on request so reports stay
    /// reproducible by default.
    pub runtime_us: Option<u128>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Aggregate {
    #[serde(serialize_with = "ratio_text")]
    pub max_ratio: Ratio<usize>,
    #[serde(serialize_with = "big_ratio_text")]
    pub mean_ratio: BigRational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExperimentReport {
    pub rows: Vec<ReportRow>,
    pub aggregate: Option<Aggregate>,
}

fn ratio_text<S: serde::Serializer>(r: &Ratio<usize>, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{}/{}", r.numer(), r.denom()))
}

fn big_ratio_text<S: serde::Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(r))
}

pub const CSV_HEADER: &str = "instance,algorithm,seed,hits,opt,ratio,runtime_us";

impl ExperimentReport {
    /// Sorts rows by instance, algorithm and seed and fills the aggregate.
    pub fn from_rows(mut rows: Vec<ReportRow>) -> Self {
        rows.sort_by(|a, b| {
            (a.instance, a.algorithm.to_string(), a.seed).cmp(&(b.instance, b.algorithm.to_string(), b.seed))
        });
        let aggregate = rows.iter().map(|r| r.ratio).max().map(|max_ratio| {
            let sum = rows.iter().fold(BigRational::zero(), |acc, r| {
                acc + BigRational::new((*r.ratio.numer()).into(), (*r.ratio.denom()).into())
            });
            Aggregate { max_ratio, mean_ratio: sum / BigRational::from_integer(rows.len().into()) }
        });
        Self { rows, aggregate }
    }

    /// Fixed columns; the runtime cell is empty unless timing was requested.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let runtime = r.runtime_us.map(|t| t.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{}/{},{}\n",
                r.instance,
                r.algorithm,
                r.seed,
                r.hits,
                r.opt,
                r.ratio.numer(),
                r.ratio.denom(),
                runtime
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub algorithms: Vec<Algorithm>,
    pub seeds: Vec<u64>,
    /// Optimum to fall back on, per instance, when the exact solver refuses
    /// an instance as too large.
    pub known_opt: Vec<Option<usize>>,
    pub timing: bool,
    pub execution: Execution,
}

impl ExperimentConfig {
    pub fn new(algorithms: Vec<Algorithm>, seeds: Vec<u64>) -> Self {
        Self { algorithms, seeds, known_opt: Vec::new(), timing: false, execution: Execution::Parallel }
    }
}

fn optimum(objects: &[UnitObject], known: Option<usize>) -> Result<usize, HarnessError> {
    match Instance::new(objects.to_vec()).and_then(|inst| opt_hitting_set(&inst)) {
        Ok(opt) => Ok(opt.len()),
        Err(OracleError::CapExceeded { .. }) if known.is_some() => Ok(known.unwrap_or_default()),
        Err(e) => Err(e.into()),
    }
}

/// Every algorithm on every instance for every seed, against the exact
/// optimum.
pub fn ratio_experiment(instances: &[InstanceFile], config: &ExperimentConfig) -> Result<ExperimentReport, HarnessError> {
    let opts = map_indexed(config.execution, instances.len() as u64, |i| {
        let i = i as usize;
        optimum(&instances[i].objects, config.known_opt.get(i).copied().flatten())
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;

    let per_instance = config.algorithms.len() * config.seeds.len();
    let jobs = (instances.len() * per_instance) as u64;
    let rows = map_indexed(config.execution, jobs, |job| {
        let job = job as usize;
        let instance = job / per_instance;
        let algorithm = config.algorithms[(job % per_instance) / config.seeds.len()];
        let seed = config.seeds[job % config.seeds.len()];
        let objects = &instances[instance].objects;
        let start = Instant::now();
        let transcript = run(algorithm, objects, seed)?;
        let elapsed = start.elapsed().as_micros();
        if !is_feasible(objects, &transcript.hitting_set) {
            return Err(HarnessError::Oracle(OracleError::NotFeasible));
        }
        let (hits, opt) = (transcript.new_points(), opts[instance]);
        let ratio = if opt == 0 { Ratio::from_integer(1) } else { Ratio::new(hits, opt) };
        Ok(ReportRow {
            instance,
            algorithm,
            seed,
            hits,
            opt,
            ratio,
            runtime_us: config.timing.then_some(elapsed),
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;
    Ok(ExperimentReport::from_rows(rows))
}

/// One RIR run on a cluster instance with a single optimal point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RirRun {
    pub index: u64,
    pub hits: usize,
    pub bookkeeping: usize,
    pub a1: usize,
    pub a2: usize,
    pub reweighting_rounds: usize,
    pub feasible: bool,
    /// `A = A1 ∪ A2` disjointly and `A1 ⊆ B`.
    pub partition_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RirEstimate {
    pub dim: usize,
    pub runs: usize,
    /// `⌈5d/2⌉(d + 2)` for an optimum of one.
    pub bound: usize,
    pub mean_hits: Option<f64>,
    pub mean_bookkeeping: Option<f64>,
    pub max_bookkeeping: usize,
    /// Runs breaking the bound, the partition or feasibility.
    pub violations: Vec<u64>,
    pub details: Vec<RirRun>,
}

impl RirEstimate {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Monte Carlo over the cluster instances of `spec` (hypercubes only).
pub fn rir_estimate(spec: &ClusterSpec) -> Result<RirEstimate, HarnessError> {
    if spec.kind != Kind::Hypercube {
        return Err(HarnessError::InvalidParams("the reweighting algorithm takes hypercubes".into()));
    }
    let bound = crate::online::Rir::bookkeeping_bound(spec.dim);
    let details = map_indexed(spec.execution, spec.clusters, |index| {
        let (_, objects) = spec.instance(index);
        let (transcript, state) = run_with_state(Algorithm::Rir, &objects, spec.seed ^ index)?;
        let hits: BTreeSet<IntPoint> = transcript.hitting_set.iter().cloned().collect();
        let (a1, a2, bookkeeping, rounds, partition_holds) = match state.as_ref().and_then(|s| s.reweighting()) {
            Some(rir) => {
                let union: BTreeSet<IntPoint> = rir.a1().union(rir.a2()).cloned().collect();
                let holds = rir.a1().is_disjoint(rir.a2())
                    && union == hits
                    && rir.a1().iter().all(|p| rir.bookkeeping().contains(p));
                (rir.a1().len(), rir.a2().len(), rir.bookkeeping().len(), rir.reweighting_rounds(), holds)
            }
            None => (0, 0, 0, 0, hits.is_empty()),
        };
        Ok(RirRun {
            index,
            hits: hits.len(),
            bookkeeping,
            a1,
            a2,
            reweighting_rounds: rounds,
            feasible: is_feasible(&objects, &transcript.hitting_set),
            partition_holds,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>, HarnessError>>()?;

    let runs = details.len();
    let mean = |f: fn(&RirRun) -> usize| {
        (runs > 0).then(|| details.iter().map(f).sum::<usize>() as f64 / runs as f64)
    };
    Ok(RirEstimate {
        dim: spec.dim,
        runs,
        bound,
        mean_hits: mean(|r| r.hits),
        mean_bookkeeping: mean(|r| r.bookkeeping),
        max_bookkeeping: details.iter().map(|r| r.bookkeeping).max().unwrap_or(0),
        violations: details
            .iter()
            .filter(|r| r.bookkeeping > bound || !r.partition_holds || !r.feasible)
            .map(|r| r.index)
            .collect(),
        details,
    })
}
