//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

mod common;

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use lattice_hitting::adversary::{play, remaining_target_dist2, BallGame, HypercubeGame, IntervalGame};
use lattice_hitting::equivalence::{classes_containing, decompose, SigEntry};
use lattice_hitting::filters::FilterLattice;
use lattice_hitting::geometry::{IntPoint, Kind, RatPoint, UnitObject};
use lattice_hitting::harness::ClusterSpec;
use lattice_hitting::online::{run, run_with_state, Algorithm};
use lattice_hitting::oracle::{opt_hitting_set, Instance};
use lattice_hitting::par::{map_indexed, trial_rng, Execution};
use num_rational::BigRational;
use num_traits::One;
use rand::Rng;

const DENOM: i64 = 97;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn within(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() < limit_s
}

fn interval_game() -> Outcome {
    let start = Instant::now();
    let mut rng = trial_rng(11, 0);
    let mut bad = 0;
    for i in 0..100 {
        let x: i64 = rng.gen_range(-50..=50);
        let mut game = IntervalGame::new(x);
        let mut bpa = Algorithm::Bpa.build(Kind::Hypercube, 1).unwrap();
        let r = play(&mut game, bpa.as_mut(), i).unwrap();
        let ok = r.forced == 2
            && bpa.hitting_set().len() == 2
            && r.opt == 1
            && !common_points(&r.objects).is_empty()
            && r.ratio == num_rational::Ratio::from_integer(2);
        bad += usize::from(!ok);
    }
    let t = start.elapsed();
    outcome(bad == 0 && within(t, 1.0), format!("{bad} of 100 offsets missed ratio 2, {:.3}s", t.as_secs_f64()))
}

fn brute_nc_count(d: usize) -> usize {
    let mut count = 0;
    let mut z = vec![-2i64; d];
    loop {
        if z.iter().map(|v| v * v).sum::<i64>() <= 4 {
            count += 1;
        }
        let Some(i) = z.iter().position(|&v| v < 2) else { break };
        z[i] += 1;
        for v in &mut z[..i] {
            *v = -2;
        }
    }
    count
}

fn cluster_bounds() -> Outcome {
    let start = Instant::now();
    let configs = [
        (Algorithm::Bpa, Kind::Ball, 2, 4),
        (Algorithm::Bpa, Kind::Ball, 3, 14),
        (Algorithm::Bpa, Kind::Hypercube, 2, 4),
        (Algorithm::Bpa, Kind::Hypercube, 3, 8),
        (Algorithm::Nc, Kind::Ball, 2, brute_nc_count(2)),
        (Algorithm::Nc, Kind::Ball, 3, brute_nc_count(3)),
    ];
    let mut notes = Vec::new();
    let mut violations = 0;
    let counts_ok = brute_nc_count(2) == 13 && brute_nc_count(3) == 33;
    for (seed, &(alg, kind, d, bound)) in configs.iter().enumerate() {
        let spec = ClusterSpec::new(kind, d, 500, 200, 100 + seed as u64);
        let results = map_indexed(Execution::Parallel, spec.clusters, |i| {
            let (anchor, objects) = spec.instance(i);
            let generated_ok = objects.iter().all(|o| {
                numerators(o, DENOM);
                inside(o, anchor.coords())
            });
            let t = run(alg, &objects, i).unwrap();
            let feasible = objects.iter().all(|o| t.hitting_set.iter().any(|h| inside(o, h.coords())));
            (t.new_points(), generated_ok && feasible)
        });
        let worst = results.iter().map(|r| r.0).max().unwrap_or(0);
        let bad = results.iter().filter(|r| r.0 > bound || !r.1).count();
        violations += bad;
        notes.push(format!("{alg} {kind} d={d} max {worst}/{bound}"));
    }
    let t = start.elapsed();
    outcome(
        violations == 0 && counts_ok && within(t, 30.0),
        format!("{} ; {violations} violations, {:.2}s", notes.join(", "), t.as_secs_f64()),
    )
}

/// Lattice points of the object with center `n / 97`, by integer arithmetic.
fn lattice_count(kind: Kind, n: &[i64], member: fn(&[i64]) -> bool) -> usize {
    let ranges: Vec<(i64, i64)> = n
        .iter()
        .map(|&x| ((x - DENOM).div_euclid(DENOM) + i64::from((x - DENOM).rem_euclid(DENOM) != 0), (x + DENOM).div_euclid(DENOM)))
        .collect();
    let mut p: Vec<i64> = ranges.iter().map(|r| r.0).collect();
    let mut count = 0;
    loop {
        let offs = n.iter().zip(&p).map(|(&x, &v)| x - DENOM * v);
        let contained = match kind {
            Kind::Ball => offs.map(|o| o * o).sum::<i64>() <= DENOM * DENOM,
            Kind::Hypercube => offs.into_iter().all(|o| o.abs() <= DENOM),
        };
        if contained && member(&p) {
            count += 1;
        }
        let Some(i) = (0..p.len()).find(|&i| p[i] < ranges[i].1) else { break };
        p[i] += 1;
        for j in 0..i {
            p[j] = ranges[j].0;
        }
    }
    count
}

fn covering_certificates() -> Outcome {
    let start = Instant::now();
    let mut failures = 0;
    let mut disagreements = 0;
    let cases: Vec<(Kind, usize)> = (1..=4)
        .map(|d| (Kind::Ball, d))
        .chain((1..=6).map(|d| (Kind::Hypercube, d)))
        .collect();
    for (c, &(kind, d)) in cases.iter().enumerate() {
        let lattice = FilterLattice::for_kind(kind, d).unwrap();
        let member: fn(&[i64]) -> bool = match kind {
            Kind::Ball => in_ball_lattice,
            Kind::Hypercube => in_cube_lattice,
        };
        let results = map_indexed(Execution::Parallel, 10_000, |i| {
            let mut rng = trial_rng(500 + c as u64, i);
            let n: Vec<i64> = (0..d).map(|_| rng.gen_range(-8 * DENOM..=8 * DENOM)).collect();
            let center = RatPoint::from_fractions(&n.iter().map(|&x| (x, DENOM)).collect::<Vec<_>>()).unwrap();
            let ours = lattice_count(kind, &n, member);
            let theirs = lattice.points_in(&UnitObject::new(kind, center)).unwrap().len();
            (ours, theirs)
        });
        failures += results.iter().filter(|r| r.0 == 0).count();
        disagreements += results.iter().filter(|r| r.0 != r.1).count();
    }
    let t = start.elapsed();
    outcome(
        failures == 0 && disagreements == 0,
        format!("{failures} uncovered objects, {disagreements} count mismatches over 100000 objects, {:.2}s", t.as_secs_f64()),
    )
}

/// Invariant (I) recomputed: every issued object misses all earlier hits.
fn excludes_earlier_hits(objects: &[UnitObject], hits: &[IntPoint]) -> bool {
    objects.iter().enumerate().all(|(i, o)| hits[..i.min(hits.len())].iter().all(|h| !inside(o, h.coords())))
}

fn hits_of(report: &lattice_hitting::adversary::GameReport) -> Vec<IntPoint> {
    report.transcript.iter().filter_map(|r| r.point.clone()).collect()
}

/// Invariant (II) recomputed: each object from round two on contains every
/// target point not yet used.
fn contains_unused_targets(d: usize, objects: &[UnitObject], hits: &[IntPoint]) -> bool {
    let sign = if (0..d).any(|a| hits[0] == IntPoint::unit(d, a, 1)) { -1 } else { 1 };
    (1..objects.len()).all(|i| {
        (0..d)
            .map(|a| IntPoint::unit(d, a, sign))
            .filter(|t| !hits[1..i].contains(t))
            .all(|t| inside(&objects[i], t.coords()))
    })
}

fn ball_game() -> Outcome {
    let mut bad = Vec::new();
    let (mut on_script, mut off_script) = (0, 0);
    for d in [2usize, 3] {
        for alg in [Algorithm::Bpa, Algorithm::Nc] {
            for seed in 0..10 {
                let mut game = BallGame::new(d).unwrap();
                let mut hitter = alg.build(Kind::Ball, d).unwrap();
                let r = play(&mut game, hitter.as_mut(), seed).unwrap();
                let hits = hits_of(&r);
                let invariants = r.checks_hold() && excludes_earlier_hits(&r.objects, &hits);
                let ok = if r.off_script {
                    off_script += 1;
                    invariants && contains_unused_targets(d, &r.objects, &hits)
                } else {
                    on_script += 1;
                    invariants && r.forced == d + 1 && r.opt == 1 && !common_points(&r.objects).is_empty()
                };
                if !ok {
                    bad.push(format!("{alg} d={d} seed={seed}"));
                }
            }
        }
        // scripted opponent opening with every point of the first ball
        let openings = std::iter::once(IntPoint::origin(d))
            .chain((0..d).flat_map(|a| [1, -1].map(|s| IntPoint::unit(d, a, s))));
        for first in openings {
            let mut game = BallGame::new(d).unwrap();
            let mut player = ScriptedBallPlayer::new(first.clone());
            let r = play(&mut game, &mut player, 0).unwrap();
            let hits = hits_of(&r);
            let ok = !r.off_script
                && r.checks_hold()
                && excludes_earlier_hits(&r.objects, &hits)
                && contains_unused_targets(d, &r.objects, &hits)
                && r.forced == d + 1
                && r.opt == 1
                && exhaustive_opt(&r.objects) == Some(1)
                && r.certificate_verified;
            on_script += usize::from(ok);
            if !ok {
                bad.push(format!("scripted d={d} opening {first}"));
            }
        }
    }
    // four dimensions: the round-three ball cannot keep every unused target
    let mut remark = Vec::new();
    for (n, m) in [(1, 10), (3, 20), (1, 2)] {
        let eps = rational(n, m);
        let a = rational(1, 2) + &eps;
        let scaled = rational(3, 2) * &a;
        let ours = (&scaled - BigRational::one()) * (&scaled - BigRational::one()) + rational(2, 1) * &scaled * &scaled;
        // round-three ball once e_1 is used: center (0, 3a/2, 3a/2, 3a/2)
        let mut center = vec![scaled.clone(); 4];
        center[0] = BigRational::from_integer(0.into());
        let ball = UnitObject::ball(RatPoint::new(center).unwrap());
        let broken = !inside(&ball, &[0, 1, 0, 0]);
        let fails = ours > BigRational::one() && ours == remaining_target_dist2(4, &eps, 2) && broken;
        remark.push(fails);
    }
    let remark_ok = remark.iter().all(|&f| f);
    outcome(
        bad.is_empty() && remark_ok,
        format!(
            "{on_script} on script, {off_script} off script, failures {bad:?}; round-three inequality fails for all three epsilons: {remark_ok}"
        ),
    )
}

fn hypercube_game() -> Outcome {
    let start = Instant::now();
    let mut bad = Vec::new();
    let mut games = 0;
    for d in 1..=6usize {
        for alg in Algorithm::ALL {
            for seed in 0..10 {
                games += 1;
                let mut game = HypercubeGame::new(d).unwrap();
                let mut hitter = alg.build(Kind::Hypercube, d).unwrap();
                let r = play(&mut game, hitter.as_mut(), seed).unwrap();
                let counts_ok = (1..=r.objects.len())
                    .all(|i| common_points(&r.objects[..i]).len() == 3usize.pow((d + 1 - i) as u32));
                let ok = !r.off_script
                    && r.forced == d + 1
                    && hitter.hitting_set().len() == d + 1
                    && r.objects.len() == d + 1
                    && counts_ok
                    && r.checks_hold()
                    && excludes_earlier_hits(&r.objects, &hits_of(&r))
                    && r.opt == 1
                    && !common_points(&r.objects).is_empty()
                    && r.certificate_verified;
                if !ok {
                    bad.push(format!("{alg} d={d} seed={seed}"));
                }
            }
        }
    }
    let t = start.elapsed();
    outcome(
        bad.is_empty() && within(t, 10.0),
        format!("{} of {games} games off target {bad:?}, {:.2}s", bad.len(), t.as_secs_f64()),
    )
}

fn floors(sig: &lattice_hitting::equivalence::CubeSignature) -> Option<Vec<i64>> {
    sig.entries()
        .iter()
        .map(|e| match *e {
            SigEntry::Fractional(f) => Some(f),
            SigEntry::Integer(_) => None,
        })
        .collect()
}

/// Full-type cells met by quarter-grid centers around `p`.
fn grid_scan(p: &[i64]) -> BTreeSet<Vec<i64>> {
    let d = p.len();
    let mut out = BTreeSet::new();
    let mut o = vec![-4i64; d];
    loop {
        if o.iter().all(|v| v % 4 != 0) {
            let center: Vec<(i64, i64)> = o.iter().zip(p).map(|(&v, &x)| (4 * x + v, 4)).collect();
            let cube = UnitObject::cube(RatPoint::from_fractions(&center).unwrap());
            if inside(&cube, p) {
                out.insert(center.iter().map(|&(num, den)| num.div_euclid(den)).collect());
            }
        }
        let Some(i) = o.iter().position(|&v| v < 4) else { break };
        o[i] += 1;
        for v in &mut o[..i] {
            *v = -4;
        }
    }
    out
}

fn equivalence_counts() -> Outcome {
    let mut bad_points = 0;
    for d in 1..=3usize {
        for i in 0..50 {
            let mut rng = trial_rng(700 + d as u64, i);
            let p: Vec<i64> = (0..d).map(|_| rng.gen_range(-30..=30)).collect();
            let classes = classes_containing(&IntPoint::new(p.clone()).unwrap());
            let found: Option<BTreeSet<Vec<i64>>> = classes.iter().map(floors).collect();
            let ok = classes.len() == 1 << d && found.is_some_and(|f| f.len() == 1 << d && f == grid_scan(&p));
            bad_points += usize::from(!ok);
        }
    }
    let mut bad_cubes = 0;
    for d in 1..=5usize {
        for i in 0..1000 {
            let mut rng = trial_rng(800 + d as u64, i);
            let center: Vec<(i64, i64)> = (0..d)
                .map(|_| {
                    let base: i64 = rng.gen_range(-6..=6);
                    if rng.gen_bool(0.5) {
                        (base, 1)
                    } else {
                        (8 * base + rng.gen_range(1..8), 8)
                    }
                })
                .collect();
            let k = center.iter().filter(|c| c.1 != 1).count();
            let cube = UnitObject::cube(RatPoint::from_fractions(&center).unwrap());
            let parts = decompose(&cube).unwrap();
            let distinct: BTreeSet<_> = parts.iter().cloned().collect();
            let union: BTreeSet<Vec<i64>> = parts
                .iter()
                .flat_map(|s| {
                    let f = floors(s).expect("full type");
                    let rep: Vec<(i64, i64)> = f.iter().map(|&x| (2 * x + 1, 2)).collect();
                    q_set(&UnitObject::cube(RatPoint::from_fractions(&rep).unwrap()))
                })
                .collect();
            let ok = parts.len() == 1 << (d - k) && distinct.len() == parts.len() && union == q_set(&cube);
            bad_cubes += usize::from(!ok);
        }
    }
    outcome(
        bad_points == 0 && bad_cubes == 0,
        format!("{bad_points} of 150 points and {bad_cubes} of 5000 cubes disagree with the oracles"),
    )
}

fn rir_bound() -> Outcome {
    let mut notes = Vec::new();
    let mut violations = 0;
    for d in [3usize, 4, 5] {
        let bound = (5 * d).div_ceil(2) * (d + 2);
        let spec = ClusterSpec::new(Kind::Hypercube, d, 200, 100, 900 + d as u64);
        let runs = map_indexed(Execution::Parallel, spec.clusters, |i| {
            let (anchor, objects) = spec.instance(i);
            let opt_one = objects.iter().all(|o| inside(o, anchor.coords()));
            let (t, state) = run_with_state(Algorithm::Rir, &objects, i).unwrap();
            let state = state.unwrap();
            let rir = state.reweighting().unwrap();
            let a: BTreeSet<IntPoint> = t.hitting_set.iter().cloned().collect();
            let union: BTreeSet<IntPoint> = rir.a1().union(rir.a2()).cloned().collect();
            let ok = opt_one
                && rir.bookkeeping().len() <= bound
                && rir.a1().is_disjoint(rir.a2())
                && union == a
                && a.len() == t.hitting_set.len()
                && rir.a1().iter().all(|p| rir.bookkeeping().contains(p))
                && objects.iter().all(|o| t.hitting_set.iter().any(|h| inside(o, h.coords())));
            (ok, t.hitting_set.len(), rir.bookkeeping().len())
        });
        violations += runs.iter().filter(|r| !r.0).count();
        let mean = runs.iter().map(|r| r.1).sum::<usize>() as f64 / runs.len() as f64;
        let max_b = runs.iter().map(|r| r.2).max().unwrap_or(0);
        notes.push(format!("d={d} max |B| {max_b}/{bound} mean ratio {mean:.3}"));
    }
    outcome(violations == 0, format!("{} ; {violations} violations", notes.join(", ")))
}

fn random_small_instance(i: u64) -> Vec<UnitObject> {
    let mut rng = trial_rng(1000, i);
    loop {
        let d = rng.gen_range(1..=3usize);
        let kind = if rng.gen_bool(0.5) { Kind::Ball } else { Kind::Hypercube };
        let n = rng.gen_range(1..=8usize);
        let side = [6, 3, 2][d - 1];
        let objects: Vec<UnitObject> = (0..n)
            .map(|_| {
                let c: Vec<(i64, i64)> = (0..d).map(|_| (rng.gen_range(0..=4 * side), 4)).collect();
                UnitObject::new(kind, RatPoint::from_fractions(&c).unwrap())
            })
            .collect();
        let candidates: BTreeSet<Vec<i64>> = objects.iter().flat_map(q_set).collect();
        if candidates.len() <= 20 {
            return objects;
        }
    }
}

fn oracle_correctness() -> Outcome {
    let start = Instant::now();
    let results = map_indexed(Execution::Parallel, 300, |i| {
        let objects = random_small_instance(i);
        let expected = exhaustive_opt(&objects);
        let inst = Instance::new(objects.clone()).unwrap();
        let opt = opt_hitting_set(&inst).unwrap();
        let valid = objects.iter().all(|o| opt.iter().any(|p| inside(o, p.coords())));
        valid && expected == Some(opt.len())
    });
    let t = start.elapsed();
    let bad = results.iter().filter(|ok| !**ok).count();
    outcome(
        bad == 0 && within(t, 20.0),
        format!("{bad} of 300 instances differ from exhaustive search, {:.2}s", t.as_secs_f64()),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("interval game ratio 2", interval_game),
        ("cluster placement bounds", cluster_bounds),
        ("lattice covering certificates", covering_certificates),
        ("ball adversary game", ball_game),
        ("hypercube adversary game", hypercube_game),
        ("equivalence class counts", equivalence_counts),
        ("reweighting bookkeeping bound", rir_bound),
        ("exact optimum vs exhaustive search", oracle_correctness),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        failed += usize::from(!o.passed);
        println!("acceptance {} {} {name}: {}", i + 1, if o.passed { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} of 8 criteria passed", 8 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
