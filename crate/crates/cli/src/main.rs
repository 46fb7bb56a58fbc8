use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use lattice_hitting::adversary::{play, GameKind};
use lattice_hitting::geometry::{IntPoint, Kind};
use lattice_hitting::harness::suites::{verify, SuiteParams, SUITES};
use lattice_hitting::harness::{
    generate, nc_bound, nc_brute_force, ratio_experiment, ExperimentConfig, GenerateMode, GenerateParams,
    InstanceFile,
};
use lattice_hitting::online::{is_feasible, run, Algorithm};
use lattice_hitting::par::Execution;
use lattice_hitting::sampling::DEFAULT_DENOMINATOR;

#[derive(Parser)]
#[command(name = "lhit", version, about = "Online hitting sets for unit balls and hypercubes with integer points")]
struct Cli {
    /// Run batches on the calling thread only.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Out {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Cluster,
    Random,
    Adversarial,
}

#[derive(Subcommand)]
enum Command {
    /// Write an instance file.
    Generate {
        #[arg(long)]
        kind: Kind,
        #[arg(long)]
        dim: usize,
        #[arg(long, value_enum, default_value = "cluster")]
        mode: ModeArg,
        /// Cluster anchor, space separated integers (default: origin).
        #[arg(long, allow_hyphen_values = true)]
        anchor: Option<String>,
        #[arg(long, default_value_t = 50)]
        count: usize,
        /// Box side for random mode.
        #[arg(long, default_value_t = 10)]
        side: i64,
        /// Opponent for adversarial mode.
        #[arg(long, default_value = "bpa")]
        algo: Algorithm,
        #[arg(long, default_value_t = DEFAULT_DENOMINATOR)]
        denominator: i64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file (default: stdout).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run one algorithm over an instance file and print its transcript.
    Run {
        instance: PathBuf,
        #[arg(long)]
        algo: Algorithm,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "json")]
        out: Out,
    },
    /// Play an adversary game and print the report.
    Game {
        /// interval, ball or cube.
        #[arg(long)]
        kind: GameKind,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long)]
        algo: Algorithm,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Left end of the first interval.
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        start: i64,
    },
    /// Run a verification suite; `--list` shows the suites.
    Verify {
        #[arg(required_unless_present = "list")]
        suite: Option<String>,
        #[arg(long)]
        list: bool,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Plain PASS/FAIL lines when omitted.
        #[arg(long, value_enum)]
        out: Option<Out>,
    },
    /// Competitive ratios against the exact optimum.
    Ratio {
        #[arg(required = true)]
        instances: Vec<PathBuf>,
        /// Repeatable; defaults to every algorithm that accepts the kind.
        #[arg(long)]
        algo: Vec<Algorithm>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Seeds `seed, seed+1, ...` per algorithm.
        #[arg(long, default_value_t = 1)]
        trials: u64,
        #[arg(long, value_enum, default_value = "csv")]
        out: Out,
        /// Record wall-clock time per run.
        #[arg(long)]
        timing: bool,
        /// Optimum to use when an instance is too large for the exact solver.
        #[arg(long)]
        known_opt: Option<usize>,
    },
    /// Nearest-center candidate count: closed form against enumeration.
    Count {
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long, value_enum, default_value = "csv")]
        out: Out,
    },
}

enum Failure {
    Usage(String),
    Property(String),
}

fn usage<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Usage(e.to_string())
}

fn read_instance(path: &PathBuf) -> Result<InstanceFile, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    text.parse().map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes());
    if !text.ends_with('\n') {
        let _ = out.write_all(b"\n");
    }
}

fn warn_nc(algo: Algorithm, kind: Kind) {
    if algo == Algorithm::Nc && kind == Kind::Hypercube {
        eprintln!("warning: nearest-center has no competitive guarantee for hypercubes");
    }
}

fn execute(cli: Cli) -> Result<(), Failure> {
    let execution = if cli.sequential { Execution::Sequential } else { Execution::Parallel };
    match cli.command {
        Command::Generate { kind, dim, mode, anchor, count, side, algo, denominator, seed, output } => {
            let mode = match mode {
                ModeArg::Cluster => {
                    let anchor = match anchor {
                        Some(text) => {
                            let coords = text
                                .split_whitespace()
                                .map(|t| t.parse::<i64>().map_err(|_| Failure::Usage(format!("bad anchor `{text}`"))))
                                .collect::<Result<Vec<_>, _>>()?;
                            IntPoint::new(coords).map_err(usage)?
                        }
                        None => IntPoint::origin(dim.max(1)),
                    };
                    GenerateMode::Cluster { anchor, count }
                }
                ModeArg::Random => GenerateMode::Random { side, count },
                ModeArg::Adversarial => GenerateMode::Adversarial { algorithm: algo },
            };
            let mut params = GenerateParams::new(kind, dim, mode, seed);
            params.denominator = denominator;
            let text = generate(&params).map_err(usage)?.to_string();
            match output {
                Some(path) => fs::write(&path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?,
                None => emit(&text),
            }
            Ok(())
        }
        Command::Run { instance, algo, seed, out } => {
            let inst = read_instance(&instance)?;
            warn_nc(algo, inst.kind);
            let transcript = run(algo, &inst.objects, seed).map_err(|e| usage(format!("object {}: {}", e.index, e.source)))?;
            match out {
                Out::Json => emit(&transcript.to_json_lines()),
                Out::Csv => {
                    let mut text = String::from("index,decision,point,source,drawn\n");
                    for r in transcript.records() {
                        let point = r.point.map(|p| p.to_string()).unwrap_or_default();
                        let source = r.source.map(|s| format!("{s:?}").to_lowercase()).unwrap_or_default();
                        text.push_str(&format!("{},{},\"{point}\",{source},{}\n", r.index, r.decision, r.drawn.len()));
                    }
                    emit(&text);
                }
            }
            if is_feasible(&inst.objects, &transcript.hitting_set) {
                Ok(())
            } else {
                Err(Failure::Property("the hitting set misses an object".into()))
            }
        }
        Command::Game { kind, dim, algo, seed, start } => {
            let object_kind = if kind == GameKind::Ball { Kind::Ball } else { Kind::Hypercube };
            warn_nc(algo, object_kind);
            let mut game = kind.build(dim, start).map_err(usage)?;
            let mut hitter = algo.build(object_kind, dim).map_err(usage)?;
            let report = play(game.as_mut(), hitter.as_mut(), seed).map_err(usage)?;
            emit(&report.to_json());
            let forced_ok = report.off_script
                || (report.forced == report.certificate.as_ref().map_or(0, |c| c.forced)
                    && report.opt == 1
                    && report.certificate_verified);
            if report.checks_hold() && forced_ok {
                Ok(())
            } else {
                Err(Failure::Property("the game outcome breaks the lower-bound invariants".into()))
            }
        }
        Command::Verify { suite, list, dim, trials, seed, out } => {
            if list {
                for (name, about) in SUITES {
                    emit(&format!("{name:<10} {about}"));
                }
                return Ok(());
            }
            let suite = suite.unwrap_or_default();
            let params = SuiteParams { dim, trials, seed, execution };
            let report = verify(&suite, &params).map_err(usage)?;
            match out {
                None => emit(&report.to_text()),
                Some(Out::Json) => emit(&serde_json::to_string_pretty(&report).expect("report serializes")),
                Some(Out::Csv) => {
                    let mut text = String::from("check,passed,detail\n");
                    for c in &report.checks {
                        text.push_str(&format!("{},{},\"{}\"\n", c.name, c.passed, c.detail));
                    }
                    emit(&text);
                }
            }
            if report.passed() {
                Ok(())
            } else {
                Err(Failure::Property(format!("suite {suite} failed")))
            }
        }
        Command::Ratio { instances, algo, seed, trials, out, timing, known_opt } => {
            let files = instances.iter().map(read_instance).collect::<Result<Vec<_>, _>>()?;
            let algorithms = if algo.is_empty() {
                let all_cubes = files.iter().all(|f| f.kind == Kind::Hypercube);
                Algorithm::ALL.into_iter().filter(|a| all_cubes || *a != Algorithm::Rir).collect()
            } else {
                algo
            };
            for a in &algorithms {
                for f in &files {
                    warn_nc(*a, f.kind);
                }
            }
            let mut config = ExperimentConfig::new(algorithms, (0..trials).map(|i| seed.wrapping_add(i)).collect());
            config.timing = timing;
            config.known_opt = vec![known_opt; files.len()];
            config.execution = execution;
            let report = ratio_experiment(&files, &config).map_err(usage)?;
            match out {
                Out::Csv => {
                    emit(&report.to_csv());
                    if let Some(agg) = &report.aggregate {
                        eprintln!(
                            "max ratio {}/{}, mean ratio {}",
                            agg.max_ratio.numer(),
                            agg.max_ratio.denom(),
                            lattice_hitting::geometry::format_rational(&agg.mean_ratio)
                        );
                    }
                }
                Out::Json => emit(&report.to_json()),
            }
            Ok(())
        }
        Command::Count { dim, out } => {
            let dims: Vec<usize> = match dim {
                Some(0) => return Err(Failure::Usage("dimension must be positive".into())),
                Some(d) => vec![d],
                None => (1..=6).collect(),
            };
            let rows = dims
                .iter()
                .map(|&d| Ok((d, nc_bound(d), nc_brute_force(d).map_err(usage)?)))
                .collect::<Result<Vec<_>, Failure>>()?;
            match out {
                Out::Csv => {
                    let mut text = String::from("dim,formula,enumeration\n");
                    for (d, f, b) in &rows {
                        text.push_str(&format!("{d},{f},{b}\n"));
                    }
                    emit(&text);
                }
                Out::Json => {
                    let json: Vec<_> = rows
                        .iter()
                        .map(|(d, f, b)| serde_json::json!({ "dim": d, "formula": f, "enumeration": b }))
                        .collect();
                    emit(&serde_json::to_string_pretty(&json).expect("rows serialize"));
                }
            }
            if rows.iter().all(|(_, f, b)| f == b) {
                Ok(())
            } else {
                Err(Failure::Property("closed form and enumeration disagree".into()))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Property(msg)) => {
            eprintln!("fail: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
