//! Command-line frontend: compute / sweep / verify / report.
//!
//! Exit statuses: 0 success, 1 check failure, 2 usage or configuration
//! error, 3 numerical failure. Errors are printed as machine-readable
//! `error code=<CODE> msg=<...>` lines on stderr. Output files for a fixed
//! (config, seed) are byte-identical across runs and worker counts; wall
//! times go to a separate `.timing.txt` sidecar.

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use fracperim_cli::formats::{build_family, build_shape, FamilySpec, ParsedFamily, ShapeSpec};
use fracperim_cli::suites::{run_suite, SuiteConfig};
use fracperim_cli::sweep_io::{config_hash, run_sweep_to_file, write_manifest, Manifest};
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "fracperim", version, about = "Fractional perimeters, deficits and asymmetries of convex bodies")]
struct Cli {
    /// Worker threads (default: FRACPERIM_THREADS or all cores). Results do
    /// not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct CommonOpts {
    /// Sample budget per estimate.
    #[arg(long, default_value_t = 1_000_000)]
    budget: u64,
    /// Master seed; all streams derive from it deterministically.
    #[arg(long, default_value_t = 24601)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Asymmetry/deficit report for a single shape description file.
    Compute {
        /// Shape description (JSON).
        #[arg(long)]
        shape: PathBuf,
        /// Fractional order s in (0,1).
        #[arg(long)]
        s: f64,
        #[command(flatten)]
        common: CommonOpts,
        /// Save the report as JSON (with a manifest alongside).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep a shape family over a list of s values into a results file.
    Sweep {
        /// Family specification (JSON).
        #[arg(long)]
        family: PathBuf,
        /// Comma-separated s values.
        #[arg(long, value_delimiter = ',', default_values_t = [0.25, 0.5, 0.75])]
        s: Vec<f64>,
        #[command(flatten)]
        common: CommonOpts,
        /// Results file (CSV); manifest and timing sidecar are written
        /// alongside.
        #[arg(long)]
        out: PathBuf,
        /// Keep completed rows of an interrupted sweep and continue.
        #[arg(long)]
        resume: bool,
    },
    /// Run a named check suite; exit 1 iff a non-expected-failure check
    /// fails.
    Verify {
        /// convex | fuglede | counterexample | limits | all
        #[arg(long)]
        suite: String,
        #[arg(long, value_delimiter = ',', default_values_t = [0.25, 0.5, 0.75])]
        s: Vec<f64>,
        #[command(flatten)]
        common: CommonOpts,
        /// Admissibility threshold for nearly spherical sets.
        #[arg(long, default_value_t = 0.1)]
        eps0: f64,
        /// Cap for the stability-ratio spread across the convex family.
        #[arg(long, default_value_t = 3.0)]
        spread_cap: f64,
        /// Number of randomized nearly spherical sets in the fuglede suite.
        #[arg(long, default_value_t = 50)]
        fuglede_count: usize,
        /// Save the verdict report as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Summarize an existing results file (empirical constant, exponents).
    Report {
        #[arg(long)]
        results: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn classify_error(e: &anyhow::Error) -> (u8, String) {
    if let Some(fe) = e.downcast_ref::<fracperim::Error>() {
        let code = fe.code();
        let status = match fe {
            fracperim::Error::InvalidParameter(_)
            | fracperim::Error::UnsupportedDimension(_)
            | fracperim::Error::SeparationTooSmall { .. }
            | fracperim::Error::InsufficientData(_) => 2,
            _ => 3,
        };
        return (status, code.into());
    }
    // IO/parse/config problems
    (2, "CONFIG".into())
}

fn write_json<T: Serialize>(path: &PathBuf, value: &T) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").with_context(|| format!("writing {path:?}"))
}

fn run() -> anyhow::Result<u8> {
    let cli = Cli::parse();
    let threads = cli
        .threads
        .or_else(|| {
            std::env::var("FRACPERIM_THREADS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or(0);
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .ok();
    }

    match cli.command {
        Command::Compute { shape, s, common, out } => {
            let text = std::fs::read_to_string(&shape)
                .with_context(|| format!("reading {shape:?}"))?;
            let spec: ShapeSpec = serde_json::from_str(&text).context("parsing shape spec")?;
            let parsed = build_shape(&spec)?;
            let report = fracperim_cli::compute_report(&parsed, s, common.budget, common.seed)?;
            println!(
                "lambda0 = {:.6}  fraenkel = {:.6}  d(E) = {:.6}",
                report.lambda0, report.fraenkel, report.hausdorff_d
            );
            println!(
                "P_s = {:.6} +- {:.2e} ({})  P_s(ball) = {:.6}",
                report.ps_value, report.ps_std_error, report.method, report.ball_reference
            );
            println!(
                "delta_s = {:.6e} +- {:.2e}",
                report.deficit, report.deficit_std_error
            );
            if let Some(path) = out {
                write_json(&path, &report)?;
                let manifest = Manifest {
                    command: "compute",
                    config_hash: config_hash(&(&spec, s, common.budget, common.seed))?,
                    seed: common.seed,
                    library_version: VERSION,
                    config: serde_json::json!({
                        "shape": spec, "s": s,
                        "budget": common.budget, "seed": common.seed,
                    }),
                };
                write_manifest(&path.with_extension("manifest.json"), &manifest)?;
            }
            Ok(0)
        }
        Command::Sweep { family, s, common, out, resume } => {
            let text = std::fs::read_to_string(&family)
                .with_context(|| format!("reading {family:?}"))?;
            let spec: FamilySpec = serde_json::from_str(&text).context("parsing family spec")?;
            let instances = match build_family(&spec)? {
                ParsedFamily::Family(f) => f.generate()?,
                ParsedFamily::Standard(dim) => {
                    fracperim::experiments::standard_convex_family(dim)?
                }
            };
            let manifest = Manifest {
                command: "sweep",
                config_hash: config_hash(&(&spec, &s, common.budget, common.seed))?,
                seed: common.seed,
                library_version: VERSION,
                config: serde_json::json!({
                    "family": spec, "s": s,
                    "budget": common.budget, "seed": common.seed,
                }),
            };
            write_manifest(&out.with_extension("manifest.json"), &manifest)?;
            let outcome = run_sweep_to_file(
                &instances,
                &s,
                common.budget,
                common.seed,
                &out,
                resume,
            )?;
            println!(
                "rows written: {}  skipped (resume): {}  failures: {}",
                outcome.rows_written, outcome.rows_skipped, outcome.failures
            );
            Ok(if outcome.failures > 0 { 3 } else { 0 })
        }
        Command::Verify { suite, s, common, eps0, spread_cap, fuglede_count, out } => {
            let cfg = SuiteConfig {
                budget: common.budget,
                seed: common.seed,
                eps0,
                spread_cap,
                fuglede_count,
            };
            let entries = run_suite(&suite, &s, &cfg)?;
            let mut all_ok = true;
            for e in &entries {
                let tag = if e.ok { "PASS" } else { "FAIL" };
                let note = if e.expected_failure { " (expected failure)" } else { "" };
                println!("{tag} {:<52} margin={:+.3}{note}  {}", e.name, e.margin, e.details);
                all_ok &= e.ok;
            }
            if let Some(path) = out {
                write_json(&path, &entries)?;
                let manifest = Manifest {
                    command: "verify",
                    config_hash: config_hash(&(&suite, &s, common.budget, common.seed, eps0, spread_cap))?,
                    seed: common.seed,
                    library_version: VERSION,
                    config: serde_json::json!({
                        "suite": suite, "s": s, "budget": common.budget,
                        "seed": common.seed, "eps0": eps0,
                        "spread_cap": spread_cap, "fuglede_count": fuglede_count,
                    }),
                };
                write_manifest(&path.with_extension("manifest.json"), &manifest)?;
            }
            Ok(if all_ok { 0 } else { 1 })
        }
        Command::Report { results, out } => {
            let summary = fracperim_cli::summarize_results(&results)?;
            println!("rows: {} (failed: {})", summary.rows, summary.failed_rows);
            if let Some(c) = summary.c_emp {
                println!(
                    "C_emp = {:.4}  slope = {:.4} +- {:.4} ({} convex rows)",
                    c,
                    summary.slope.unwrap_or(f64::NAN),
                    summary.slope_std_error.unwrap_or(f64::NAN),
                    summary.convex_rows_used
                );
            }
            if let Some(e) = summary.counterexample_exponent {
                println!("two-ball deficit exponent = {e:.4}");
            }
            if let Some(path) = out {
                write_json(&path, &summary)?;
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            let (status, code) = classify_error(&e);
            eprintln!("error code={code} msg={e:#}");
            ExitCode::from(status)
        }
    }
}
