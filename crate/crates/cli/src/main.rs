mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::Output;
use config::{usage, CommandName, ExperimentConfig, Format, Source, UsageError};

#[derive(Parser, Debug)]
#[command(name = "ontochain", version, about = "Deterministic spin chain experiments and verification reports")]
struct Cli {
    /// Experiment configuration file (TOML)
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory for CSV/JSON reports
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Override the verification tolerance
    #[arg(long, global = true, value_name = "FLOAT")]
    tol: Option<f64>,
    /// Worker threads
    #[arg(long, global = true, value_name = "INT")]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check exp(-iHT) against the cogwheel shift for a range of N
    CogwheelVerify(CogwheelArgs),
    /// Orbit census, zero modes and a trajectory of the chain update
    ChainReport(ChainArgs),
    /// Per-orbit check of the chain Hamiltonian exponential
    BchVerify(BchArgs),
    /// Apply U - U^dagger to a down pair and print the two branches
    BellDemo(BellArgs),
    /// Run a hybrid quantum/classical chain experiment from --config
    Hybrid,
}

#[derive(Args, Debug, Default)]
struct CogwheelArgs {
    #[arg(long)]
    n_min: Option<usize>,
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long)]
    timestep: Option<f64>,
    /// Add this amount to one generator entry (negative-path testing)
    #[arg(long, hide = true)]
    inject_corruption: Option<f64>,
}

#[derive(Args, Debug, Default)]
struct ChainArgs {
    #[arg(long)]
    spins: Option<usize>,
    #[arg(long)]
    steps: Option<usize>,
    /// Initial bitstring for the trajectory ('u'/'d', site 1 first)
    #[arg(long)]
    start: Option<String>,
}

#[derive(Args, Debug, Default)]
struct BchArgs {
    #[arg(long)]
    spins: Option<usize>,
    #[arg(long)]
    timestep: Option<f64>,
}

#[derive(Args, Debug, Default)]
struct BellArgs {
    #[arg(long)]
    spins: Option<usize>,
    /// Even site holding the first down spin of the pair
    #[arg(long)]
    pair_site: Option<usize>,
    #[arg(long)]
    timestep: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<bool, UsageError> {
    let (cfg, source) = match &cli.config {
        Some(path) => {
            let (c, s) = config::load(path)?;
            (c, Some(s))
        }
        None => (ExperimentConfig::default(), None),
    };

    if let Some(t) = cli.tol.or(cfg.tolerance.as_ref().map(|t| *t.get_ref())) {
        if !(t.is_finite() && t > 0.0) {
            return Err(usage(format!("tolerance must be positive, got {t}")));
        }
    }
    match cli.threads.or(cfg.threads) {
        Some(0) => return Err(usage("--threads must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| usage(format!("thread pool: {e}")))?,
        None => {}
    }

    let command = match cli.command {
        Some(c) => c,
        None => match cfg.command {
            Some(CommandName::CogwheelVerify) => Command::CogwheelVerify(Default::default()),
            Some(CommandName::ChainReport) => Command::ChainReport(Default::default()),
            Some(CommandName::BchVerify) => Command::BchVerify(Default::default()),
            Some(CommandName::BellDemo) => Command::BellDemo(Default::default()),
            Some(CommandName::Hybrid) => Command::Hybrid,
            None => return Err(usage("no subcommand given and the config has no `command` field (see --help)")),
        },
    };

    let tol = cli.tol.or(cfg.tolerance.as_ref().map(|t| *t.get_ref()));
    let spins = |flag: Option<usize>| flag.or(cfg.spins.as_ref().map(|s| *s.get_ref()));
    let timestep = |flag: Option<f64>| flag.or(cfg.timestep.as_ref().map(|t| *t.get_ref())).unwrap_or(1.0);

    let output: Output = match command {
        Command::CogwheelVerify(a) => {
            let range = cfg.n_range.as_ref().map(|r| *r.get_ref());
            commands::cogwheel_verify(
                a.n_min.or(range.map(|r| r[0])).unwrap_or(2),
                a.n_max.or(range.map(|r| r[1])).unwrap_or(12),
                timestep(a.timestep),
                tol,
                a.inject_corruption.unwrap_or(0.0),
            )?
        }
        Command::ChainReport(a) => {
            let n = spins(a.spins).ok_or_else(|| usage("chain-report needs --spins"))?;
            let start = a.start.or(cfg.start.as_ref().map(|s| s.get_ref().clone()));
            commands::chain_report(n, a.steps.or(cfg.steps).unwrap_or(0), start.as_deref())?
        }
        Command::BchVerify(a) => {
            let n = spins(a.spins).ok_or_else(|| usage("bch-verify needs --spins"))?;
            commands::bch_verify(n, timestep(a.timestep), tol)?
        }
        Command::BellDemo(a) => commands::bell_demo(
            spins(a.spins).unwrap_or(12),
            a.pair_site.or(cfg.pair_site.as_ref().map(|s| *s.get_ref())),
            timestep(a.timestep),
        )?,
        Command::Hybrid => {
            let source: &Source = source
                .as_ref()
                .ok_or_else(|| usage("hybrid needs --config with the experiment definition"))?;
            let inputs = cfg.hybrid_inputs(source, timestep(None))?;
            commands::hybrid(&inputs, tol)?
        }
    };

    print!("{}", output.text);
    let dir = report::resolve_out_dir(cli.out.as_deref(), cfg.output_dir.as_deref());
    let format = cli.format.or(cfg.format).unwrap_or_default();
    let written = report::write(&output.report, &dir, format)
        .map_err(|e| usage(format!("cannot write reports to {}: {e}", dir.display())))?;
    for path in written {
        eprintln!("wrote {}", path.display());
    }
    if !output.report.pass {
        eprintln!("{}: verification failed", output.report.command);
    }
    Ok(output.report.pass)
}
