//! `peal` command line.
//!
//! Exit codes: 0 on success, 1 when `--enforce` is set and a compliance
//! verdict fails, 2 on invalid input or a failed run.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use peal::deal_service::pipeline::{prepare, tranching};
use peal::deal_service::server::{serve, AppState};
use peal::deal_service::{parse_deal, run_pipeline, ParsedDeal, RunOverrides, RunStore};
use peal::scenario_engine::{generate_scenarios, GeneratorConfig};
use peal::{PealError, Result};

#[derive(Parser)]
#[command(name = "peal", version, about = "Securitization structuring engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Deal file (JSON).
    #[arg(long)]
    deal: PathBuf,
    /// Master seed; defaults to the deal file's generator seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of scenarios; defaults to the deal file's generator count.
    #[arg(long)]
    scenarios: Option<usize>,
    /// Quantile level of the tranching; defaults to the deal file's alpha.
    #[arg(long)]
    alpha: Option<f64>,
    /// Exit with status 1 when any compliance verdict fails.
    #[arg(long)]
    enforce: bool,
    #[arg(long, env = "PEAL_OUT_DIR", default_value = "peal-out")]
    out_dir: PathBuf,
    /// Also write scenarios.csv and blocks.csv.
    #[arg(long)]
    dump: bool,
}

impl RunArgs {
    fn overrides(&self) -> RunOverrides {
        RunOverrides { scenarios: self.scenarios, seed: self.seed, alpha: self.alpha }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a deal file.
    Validate {
        #[arg(long)]
        deal: PathBuf,
        #[arg(long)]
        enforce: bool,
    },
    /// Run the full pipeline and write every report.
    Simulate(RunArgs),
    /// Print the tranching table as CSV.
    Tranche(RunArgs),
    /// Run the full pipeline and print the feature report.
    Features(RunArgs),
    /// Run the pipeline with the deal's optimisation block and print the trace.
    Optimize(RunArgs),
    /// Serve the HTTP API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
        #[arg(long, env = "PEAL_OUT_DIR", default_value = "peal-out")]
        out_dir: PathBuf,
    },
    /// Print a stored run's record or one of its artifacts.
    Report {
        #[arg(long)]
        run: String,
        /// Artifact file name, e.g. `features.json`.
        #[arg(long)]
        artifact: Option<String>,
        #[arg(long, env = "PEAL_OUT_DIR", default_value = "peal-out")]
        out_dir: PathBuf,
    },
}

enum Outcome {
    Ok,
    NonCompliant,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::NonCompliant) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            if let Some(v) = e.violations() {
                for x in v {
                    eprintln!("  {x}");
                }
            }
            ExitCode::from(2)
        }
    }
}

fn print(bytes: &[u8]) -> Result<()> {
    let mut out = std::io::stdout().lock();
    out.write_all(bytes)?;
    out.flush()?;
    Ok(())
}

fn full_run(args: &RunArgs, parsed: &ParsedDeal) -> Result<(peal::deal_service::RunRecord, Outcome)> {
    let cfg = args.overrides().resolve(parsed);
    let store = RunStore::new(&args.out_dir);
    let (record, out) = run_pipeline(parsed, &cfg, &store, args.dump, None)?;
    eprintln!("run {} -> {}", record.run_id, store.run_dir(&record.run_id).display());
    for v in out.compliance.frequency_rules.iter().chain(&out.compliance.g_check).chain(&out.compliance.cva) {
        eprintln!("compliance: {v}");
    }
    let outcome = if args.enforce && !out.compliance.pass { Outcome::NonCompliant } else { Outcome::Ok };
    Ok((record, outcome))
}

fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Validate { deal, enforce } => {
            let parsed = parse_deal(&deal)?;
            println!("valid: {} ({} exposures, TP = {}, V = {})", deal.display(), parsed.deal.exposure_count(), parsed.deal.tp(), parsed.design.v_count());
            for v in &parsed.compliance {
                println!("compliance: {v}");
            }
            Ok(if enforce && !parsed.compliance.is_empty() { Outcome::NonCompliant } else { Outcome::Ok })
        }
        Command::Simulate(args) => {
            let parsed = parse_deal(&args.deal)?;
            let (record, outcome) = full_run(&args, &parsed)?;
            println!("{}", record.run_id);
            Ok(outcome)
        }
        Command::Tranche(args) => {
            let parsed = parse_deal(&args.deal)?;
            let cfg = args.overrides().resolve(&parsed);
            let generator = GeneratorConfig { scenarios: cfg.scenarios, seed: cfg.seed, ..parsed.file.generator.clone() };
            let set = generate_scenarios(&parsed.deal, &generator, parsed.file.exposure_type)?;
            let tr = tranching(&prepare(&parsed.deal, &set, None)?, &parsed.file.endowment, cfg.alpha)?;
            let mut buf = Vec::new();
            tr.write_csv(&mut buf)?;
            print(&buf)?;
            Ok(Outcome::Ok)
        }
        Command::Features(args) => {
            let parsed = parse_deal(&args.deal)?;
            let (record, outcome) = full_run(&args, &parsed)?;
            let bytes = RunStore::new(&args.out_dir).read_artifact(&record.run_id, "features.json")?.unwrap_or_default();
            print(&bytes)?;
            Ok(outcome)
        }
        Command::Optimize(args) => {
            let parsed = parse_deal(&args.deal)?;
            if parsed.file.optimization.is_none() {
                return Err(PealError::InvalidDeal("the deal file has no `optimization` block".into()));
            }
            let (record, outcome) = full_run(&args, &parsed)?;
            let bytes = RunStore::new(&args.out_dir).read_artifact(&record.run_id, "optimization.csv")?.unwrap_or_default();
            print(&bytes)?;
            Ok(outcome)
        }
        Command::Serve { port, host, out_dir } => {
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(serve((host, port).into(), AppState::new(RunStore::new(out_dir))))?;
            Ok(Outcome::Ok)
        }
        Command::Report { run, artifact, out_dir } => {
            let store = RunStore::new(out_dir);
            let name = artifact.unwrap_or_else(|| "run.json".into());
            match store.read_artifact(&run, &name)? {
                Some(bytes) => print(&bytes)?,
                None => return Err(PealError::NotFound(format!("run {run} has no artifact `{name}`"))),
            }
            Ok(Outcome::Ok)
        }
    }
}
