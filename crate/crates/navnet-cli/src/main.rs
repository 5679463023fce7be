//! Command-line front end for the navnet library.
//!
//! Three subcommands:
//!
//! - `gen`: emit a seeded point set in the point-file format.
//! - `run`: replay an op trace against a fresh net, one JSON record per
//!   op on stdout.
//! - `bench`: time inserts and furthest-neighbor queries, CSV on stdout.
//!
//! Exit codes: 0 on success; 1 when a replay finishes but at least one
//! `VERIFY` op or oracle/coverage cross-check failed; 2 for unusable
//! input (bad flags, unreadable files, malformed traces or configs, ops
//! that cannot run).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use navnet::harness::bench::{run_bench, BenchSpec};
use navnet::harness::config::{parse_config, BackendKind, Config};
use navnet::harness::gen::{generate, Distribution, GenParams};
use navnet::harness::points::{parse_matrix, parse_points, write_points};
use navnet::harness::trace::{parse_trace, run_trace};
use navnet::QuerySet;

#[derive(Parser)]
#[command(name = "navnet", version, about = "Dynamic metric clustering workbench")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a seeded point set.
    Gen {
        /// uniform-cube | gaussian-clusters | line | grid
        #[arg(long)]
        dist: String,
        /// Number of points.
        #[arg(long)]
        n: usize,
        /// Dimension of each point.
        #[arg(long, default_value_t = 2)]
        dim: usize,
        /// RNG seed; the same seed always yields the same set.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Blob count (gaussian-clusters only).
        #[arg(long, default_value_t = 2)]
        clusters: usize,
        /// Blob standard deviation (gaussian-clusters only).
        #[arg(long, default_value_t = 0.1)]
        spread: f64,
        /// Distance between blob centers (gaussian-clusters only).
        #[arg(long, default_value_t = 10.0)]
        separation: f64,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay an op trace and print one JSON record per op.
    Run {
        /// Trace file (INSERT/DELETE/AFN/GREEDY/MEB/KCENTER/VERIFY).
        trace: PathBuf,
        /// key=value configuration file; defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Time inserts and queries over a point file, CSV per op.
    Bench {
        /// Point file to build the net from.
        #[arg(long)]
        points: PathBuf,
        /// Navigation-list expansion constant.
        #[arg(long, default_value_t = 4.0)]
        gamma: f64,
        /// Epsilon for the timed furthest-neighbor queries.
        #[arg(long, default_value_t = 0.5)]
        eps: f64,
        /// Number of random single-point queries to time.
        #[arg(long, default_value_t = 0)]
        queries: usize,
        /// Seed for the query locations.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also emit one row per insert while building.
        #[arg(long)]
        measure_inserts: bool,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, String> {
    match cli.cmd {
        Cmd::Gen {
            dist,
            n,
            dim,
            seed,
            clusters,
            spread,
            separation,
            out,
        } => {
            let d = Distribution::parse(&dist).ok_or_else(|| {
                format!(
                    "unknown distribution `{dist}`; expected uniform-cube, gaussian-clusters, line, or grid"
                )
            })?;
            let params = GenParams {
                clusters,
                spread,
                separation,
            };
            let pts = generate(d, n, dim, seed, &params).map_err(|e| e.to_string())?;
            let text = write_points(dim, &pts).map_err(|e| e.to_string())?;
            emit(out.as_deref(), &text)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Run { trace, config } => {
            let cfg = match config {
                Some(path) => parse_config(&read(&path)?)
                    .map_err(|e| format!("{}: {e}", path.display()))?,
                None => Config::default(),
            };
            let matrix = match (&cfg.backend, &cfg.matrix_path) {
                (BackendKind::Matrix, Some(path)) => {
                    let text = read(Path::new(path))?;
                    Some(parse_matrix(&text).map_err(|e| format!("{path}: {e}"))?)
                }
                _ => None,
            };
            let ops = parse_trace(&read(&trace)?)
                .map_err(|e| format!("{}: {e}", trace.display()))?;
            let report = run_trace(&ops, &cfg, matrix.as_deref())
                .map_err(|e| format!("{}: {e}", trace.display()))?;
            print!("{}", report.output());
            Ok(if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Cmd::Bench {
            points,
            gamma,
            eps,
            queries,
            seed,
            measure_inserts,
            out,
        } => {
            let (dim, pts) = parse_points(&read(&points)?)
                .map_err(|e| format!("{}: {e}", points.display()))?;
            if queries > 0 && pts.is_empty() {
                return Err("cannot run queries against an empty point file".into());
            }
            // Query locations are sampled uniformly from the instance's
            // bounding box so they exercise realistic descents.
            let mut lo = vec![0.0; dim];
            let mut hi = vec![1.0; dim];
            if let Some(first) = pts.first() {
                let c = first.coords().expect("point files hold coordinates");
                lo.copy_from_slice(c);
                hi.copy_from_slice(c);
                for p in &pts {
                    for (a, &x) in p.coords().unwrap().iter().enumerate() {
                        lo[a] = lo[a].min(x);
                        hi[a] = hi[a].max(x);
                    }
                }
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let query_sets: Vec<(f64, QuerySet)> = (0..queries)
                .map(|_| {
                    let c: Vec<f64> = (0..dim).map(|a| rng.gen_range(lo[a]..=hi[a])).collect();
                    let qs = QuerySet::from_coords(vec![c]).map_err(|e| e.to_string())?;
                    Ok((eps, qs))
                })
                .collect::<Result<_, String>>()?;
            let spec = BenchSpec {
                gamma,
                points: pts,
                queries: query_sets,
                measure_inserts,
            };
            let csv = run_bench(&spec).map_err(|e| e.to_string())?;
            emit(out.as_deref(), &csv)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn read(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), String> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| format!("{}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
