use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use pwa_lyap::engine::{self, analyze_with, strategy_ordering, AnalysisStatus, StrategySummary};
use pwa_lyap::io::{self, CertificateFile};
use pwa_lyap::lyapunov::{build_lp, build_vertex_lp, Formulation, SearchConfig};
use pwa_lyap::model::{ensure_origin_vertex, partition_to_continuous, origin_affine_warnings, validate_partition, ViolationKind};
use pwa_lyap::{benchmarks, lp, Strategy};

#[derive(Parser)]
#[command(name = "pwa-lyap", version, about = "Search for piecewise-affine Lyapunov functions of PWA systems")]
struct Cli {
    /// Log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a partition file; exit 0 iff it is well formed.
    Validate { input: PathBuf },
    /// Make the origin a vertex of every cell containing it.
    EnsureOrigin {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Turn discrete-time laws x+ = A x + a into continuous-time ones.
    ConvertDiscrete {
        input: PathBuf,
        /// Sampling time in seconds.
        #[arg(long = "ts")]
        sampling_time: f64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Search for a Lyapunov function. Exit 0 when valid, 2 on timeout.
    Analyze {
        input: PathBuf,
        #[arg(long, default_value = "vector-field")]
        strategy: Strategy,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Run all three strategies and print a comparison table.
    Compare {
        input: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Export level-set segments (and optionally a vector-field sample) of a 2-D certificate as CSV.
    Levelsets {
        partition: PathBuf,
        certificate: PathBuf,
        /// Comma-separated level values.
        #[arg(long, value_delimiter = ',', required = true)]
        levels: Vec<f64>,
        #[arg(short, long)]
        output: PathBuf,
        /// Write vector-field samples to this CSV as well.
        #[arg(long)]
        vector_field: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        samples_per_cell: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Write the LP of the initial partition in CPLEX LP format.
    ExportLp {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value_t = 1e-4)]
        eps1: f64,
        #[arg(long, default_value_t = 1e-4)]
        eps2: f64,
        #[arg(long, default_value = "full")]
        formulation: Formulation,
    },
    /// Write the built-in benchmark partitions as JSON files.
    Benchmarks {
        #[arg(long, default_value = ".")]
        output_dir: PathBuf,
    },
}

#[derive(Args, Clone)]
struct SearchArgs {
    #[arg(long, default_value_t = 1e-4)]
    eps1: f64,
    #[arg(long, default_value_t = 1e-4)]
    eps2: f64,
    /// Slack values at or below this count as zero.
    #[arg(long, default_value_t = 1e-8)]
    tolerance: f64,
    /// Wall-clock budget in seconds.
    #[arg(long, default_value_t = 3600.0)]
    timeout: f64,
    /// Seed of the sampling audit.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// LP form solved each round: vertex-values or full.
    #[arg(long, default_value = "vertex-values")]
    formulation: Formulation,
    #[arg(long, default_value = ".")]
    output_dir: PathBuf,
}

impl SearchArgs {
    fn config(&self) -> SearchConfig {
        SearchConfig { eps1: self.eps1, eps2: self.eps2, zero_tolerance: self.tolerance, timeout_seconds: self.timeout, seed: self.seed, formulation: self.formulation }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(format!("{level},highs=error"))).init();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| "partition".into(), |s| s.to_string_lossy().into_owned())
}

fn run(cmd: Command) -> Result<u8> {
    match cmd {
        Command::Validate { input } => {
            let p = io::load_partition(&input)?;
            let violations = validate_partition(&p);
            for w in origin_affine_warnings(&p) {
                println!("warning: {}", w.message);
            }
            for v in &violations {
                println!("{:?}: {} (cells {:?}, vertices {:?}, residual {:e})", v.kind, v.message, v.cells, v.vertices, v.residual);
                if v.kind == ViolationKind::OriginNotVertex {
                    println!("  hint: run `pwa-lyap ensure-origin` to make the origin a vertex");
                }
            }
            if violations.is_empty() {
                println!("{}: ok ({} cells, {} vertices)", input.display(), p.num_cells(), p.vertices().len());
                Ok(0)
            } else {
                println!("{}: {} violation(s)", input.display(), violations.len());
                Ok(1)
            }
        }
        Command::EnsureOrigin { input, output } => {
            let p = io::load_partition(&input)?;
            let q = ensure_origin_vertex(&p)?;
            io::save_partition(&q, &output)?;
            println!("{} cells -> {} cells", p.num_cells(), q.num_cells());
            Ok(0)
        }
        Command::ConvertDiscrete { input, sampling_time, output } => {
            let p = io::load_partition(&input)?;
            let q = partition_to_continuous(&p, sampling_time)?;
            io::save_partition(&q, &output)?;
            Ok(0)
        }
        Command::Analyze { input, strategy, search } => {
            let p = io::load_partition(&input)?;
            let config = search.config();
            std::fs::create_dir_all(&search.output_dir).with_context(|| format!("creating {}", search.output_dir.display()))?;
            let name = stem(&input);
            let mut log_lines = String::new();
            let result = analyze_with(&p, strategy, &config, &mut |r| {
                let line = serde_json::to_string(r).expect("record serializes");
                eprintln!("{line}");
                log_lines.push_str(&line);
                log_lines.push('\n');
            })?;
            let dir = &search.output_dir;
            io::write_atomic(&dir.join(format!("{name}.iterations.jsonl")), log_lines.as_bytes())?;
            io::save_partition(&result.partition, &dir.join(format!("{name}.final.json")))?;
            let cert = CertificateFile::from_result(&result, &config);
            io::save_certificate(&cert, &dir.join(format!("{name}.certificate.json")))?;
            let mut csv = String::from("iteration,t_opt,n_r\n");
            for m in &cert.metrics {
                writeln!(csv, "{},{},{}", m.iteration, m.t_opt, m.n_r).unwrap();
            }
            io::write_atomic(&dir.join(format!("{name}.metrics.csv")), csv.as_bytes())?;
            for w in &result.warnings {
                eprintln!("warning: {w}");
            }
            println!(
                "{}: {:?} with {} after {} iteration(s), {} cells, {:.3} s",
                input.display(),
                result.status,
                strategy,
                result.iterations(),
                result.final_cells(),
                result.elapsed
            );
            Ok(if result.status == AnalysisStatus::Valid { 0 } else { 2 })
        }
        Command::Compare { input, search } => {
            let p = io::load_partition(&input)?;
            let config = search.config();
            std::fs::create_dir_all(&search.output_dir).with_context(|| format!("creating {}", search.output_dir.display()))?;
            let mut rows = Vec::new();
            for (strategy, res) in engine::compare(&p, &config) {
                let r = res.with_context(|| format!("strategy {strategy}"))?;
                rows.push(StrategySummary {
                    strategy,
                    status: r.status,
                    iterations: r.iterations(),
                    cells: r.final_cells(),
                    seconds: r.elapsed,
                });
            }
            println!("{:<14} {:>9} {:>10} {:>8} {:>10}", "strategy", "status", "iterations", "cells", "seconds");
            for r in &rows {
                let status = if r.status == AnalysisStatus::Valid { "valid" } else { "timed-out" };
                println!("{:<14} {:>9} {:>10} {:>8} {:>10.3}", r.strategy.as_str(), status, r.iterations, r.cells, r.seconds);
            }
            let ordering = strategy_ordering(&rows);
            println!("{}", ordering.message);
            let summary = serde_json::json!({ "rows": rows, "ordering": ordering });
            io::write_atomic(
                &search.output_dir.join(format!("{}.compare.json", stem(&input))),
                serde_json::to_string_pretty(&summary)?.as_bytes(),
            )?;
            Ok(if rows.iter().all(|r| r.status == AnalysisStatus::Valid) { 0 } else { 2 })
        }
        Command::Levelsets { partition, certificate, levels, output, vector_field, samples_per_cell, seed } => {
            let p = io::load_partition(&partition)?;
            let cert = io::load_certificate(&certificate)?;
            cert.check_against(&p, &certificate.display().to_string())?;
            let segs = io::level_segments(&p, &cert.candidate(), &levels)?;
            io::write_atomic(&output, io::levels_csv(&segs).as_bytes())?;
            if let Some(vf) = vector_field {
                io::write_atomic(&vf, io::vector_field_csv(&p, samples_per_cell, seed)?.as_bytes())?;
            }
            println!("{} segment(s)", segs.len());
            Ok(0)
        }
        Command::ExportLp { input, output, eps1, eps2, formulation } => {
            let p = io::load_partition(&input)?;
            let config = SearchConfig { eps1, eps2, ..SearchConfig::default() };
            let text = match formulation {
                Formulation::Full => {
                    let (prog, layout) = build_lp(&p, &config)?;
                    lp::write_cplex_lp(&prog, &|v| layout.var_name(v))
                }
                Formulation::VertexValues => {
                    let (prog, layout) = build_vertex_lp(&p, &config)?;
                    lp::write_cplex_lp(&prog, &|v| layout.var_name(v))
                }
            };
            io::write_atomic(&output, text.as_bytes())?;
            Ok(0)
        }
        Command::Benchmarks { output_dir } => {
            std::fs::create_dir_all(&output_dir).with_context(|| format!("creating {}", output_dir.display()))?;
            for (name, p) in benchmarks::shipped_benchmarks() {
                let path = output_dir.join(format!("{name}.json"));
                io::save_partition(&p, &path)?;
                println!("{}", path.display());
            }
            Ok(0)
        }
    }
}
