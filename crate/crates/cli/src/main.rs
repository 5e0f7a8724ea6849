use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use qida_cli::{report, CliError, Experiment, ExperimentConfig};
use qida_core::metrics::{summaries_csv, summaries_table};

#[derive(Parser)]
#[command(name = "qida", version, about = "Mutual-information layered ansatz experiments on Heisenberg lattices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment config (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Base seed; run k uses seed + k.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Runs per ansatz.
    #[arg(long, global = true)]
    runs: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Reference backend: auto, exact or dmrg.
    #[arg(long, global = true)]
    backend: Option<String>,
    /// Worker threads for batched runs (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Compare results with the config's [expected] table; exit 3 on violations.
    #[arg(long, global = true)]
    self_check: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Hamiltonian summary: terms, edges, Neel and exact energies.
    Ham,
    /// Reference state and QMI matrices.
    Qmi,
    /// QMI-driven layer plan.
    Layers,
    /// Full pipeline with VQE batches and summary.
    Run,
    /// Rebuild summaries from run directories.
    Report {
        /// Directories containing meta.json and runs.jsonl (default: --out).
        dirs: Vec<PathBuf>,
    },
}

fn load(cli: &Cli) -> Result<Experiment, CliError> {
    let path = cli.config.as_ref().ok_or_else(|| CliError::Config("--config is required".into()))?;
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(s) = cli.seed {
        cfg.run.seed = s;
    }
    if let Some(r) = cli.runs {
        cfg.run.runs = r;
    }
    if let Some(b) = &cli.backend {
        cfg.reference.backend = b.clone();
    }
    cfg.validate()?;
    let out = cli.out.clone().or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("results").join(cfg.name()));
    Ok(Experiment::new(cfg, out))
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    if let Command::Report { dirs } = &cli.command {
        let dirs = if dirs.is_empty() { cli.out.iter().cloned().collect() } else { dirs.clone() };
        let rows = report(&dirs)?;
        print!("{}", summaries_csv(&rows));
        return Ok(());
    }
    let exp = load(cli)?;
    let violations = match cli.command {
        Command::Ham => {
            let h = exp.ham()?;
            print!("{h}");
            exp.self_check(Some(&h), None)?
        }
        Command::Qmi => {
            let r = exp.reference()?;
            let q = exp.qmi(&r)?;
            println!("reference {} E={:.8} manifold={}", r.backend, r.energy, r.manifold_dim);
            let mut pairs = q.pairs();
            pairs.sort_by(|a, b| b.2.total_cmp(&a.2));
            for (i, j, v) in pairs.into_iter().take(8) {
                println!("  {i:>2}-{j:<2} {v:.6}");
            }
            vec![]
        }
        Command::Layers => {
            let r = exp.reference()?;
            let plan = exp.layers(&exp.qmi(&r)?)?;
            print!("{plan}");
            vec![]
        }
        Command::Run => {
            let out = exp.run()?;
            print!("{}", summaries_table(&out.summaries));
            eprintln!("wrote {}", exp.out.display());
            exp.self_check(None, Some(&out))?
        }
        Command::Report { .. } => unreachable!(),
    };
    if cli.self_check && !violations.is_empty() {
        return Err(CliError::SelfCheck(violations));
    }
    if cli.self_check {
        eprintln!("self-check passed");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("thread pool");
        if let Err(e) = pool {
            eprintln!("{e:#}");
            return ExitCode::from(1);
        }
    }
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
