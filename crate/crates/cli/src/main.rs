mod commands;
mod config;
mod error;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Config, Source};
use error::{CliError, Status};
use run::Run;

/// Exit-time tails, decorrelation bounds and dynamical percolation.
///
/// Every run writes its artifacts and a manifest.json into --out. Exit codes:
/// 0 pass, 1 property failure, 2 inconclusive, 3 usage or parse error.
#[derive(Parser, Debug)]
#[command(name = "exit-tail", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Config file of `key = value` lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override a config key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
    /// Master seed of stochastic runs.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    replicas: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Curve evaluation: exact-at-integers or envelope.
    #[arg(long, global = true)]
    mode: Option<String>,
    /// Comparison or fit tolerance of the command.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Worker threads (0 for one per core).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Matrix chain file.
    #[arg(long, global = true)]
    chain: Option<String>,
    /// Edge-list conductance file.
    #[arg(long, global = true)]
    edges: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Spectrum, decorrelation curve and exit tail of a chain.
    Chain {
        #[command(subcommand)]
        command: ChainCommand,
    },
    /// Evaluate and check a bound.
    Bound {
        #[command(subcommand)]
        command: BoundCommand,
    },
    /// Property suites.
    Verify {
        #[command(subcommand)]
        command: VerifyCommand,
    },
    /// Worked examples.
    Example {
        #[command(subcommand)]
        command: ExampleCommand,
    },
    /// Dynamical critical percolation.
    Dynperc {
        #[command(subcommand)]
        command: DynpercCommand,
    },
    /// Searches over random chains.
    Scan {
        #[command(subcommand)]
        command: ScanCommand,
    },
}

#[derive(Subcommand, Debug)]
enum ChainCommand {
    Analyze,
}

#[derive(Subcommand, Debug)]
enum BoundCommand {
    /// Exit tail against the decorrelation bound.
    Tmain,
    /// Separated events against the spectral product bound.
    Aksz,
}

#[derive(Subcommand, Debug)]
enum VerifyCommand {
    /// Every exact property over the randomized ensemble.
    Suite,
}

#[derive(Subcommand, Debug)]
enum ExampleCommand {
    /// Heavy-tailed conductance walk on the integers without 0.
    Conductance,
    /// The same walk with self-loops retuned on the even sites.
    EvenSites,
}

#[derive(Subcommand, Debug)]
enum DynpercCommand {
    Survival,
    Decorr,
    Fet,
    Fkg,
    Piv,
}

#[derive(Subcommand, Debug)]
enum ScanCommand {
    /// Compare exit and decorrelation rates on random chains.
    Question33,
}

impl Command {
    fn name(&self) -> String {
        let (group, cmd) = match self {
            Command::Chain { command } => ("chain", format!("{command:?}")),
            Command::Bound { command } => ("bound", format!("{command:?}")),
            Command::Verify { command } => ("verify", format!("{command:?}")),
            Command::Example { command } => ("example", format!("{command:?}")),
            Command::Dynperc { command } => ("dynperc", format!("{command:?}")),
            Command::Scan { command } => ("scan", format!("{command:?}")),
        };
        format!("{group} {}", cmd.to_lowercase())
    }
}

fn configure(global: &Global) -> Result<Config, CliError> {
    let mut config = Config::default();
    if let Some(path) = &global.config {
        config.load_file(path)?;
    }
    config.load_env(std::env::vars());
    for pair in &global.set {
        config.apply_override(pair)?;
    }
    let flags = [
        ("seed", global.seed.map(|v| v.to_string())),
        ("replicas", global.replicas.map(|v| v.to_string())),
        ("mode", global.mode.clone()),
        ("tol", global.tol.map(|v| v.to_string())),
        ("chain", global.chain.clone()),
        ("edges", global.edges.clone()),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            config.set(key, &v, Source::Flag);
        }
    }
    Ok(config)
}

fn execute(cli: &Cli) -> Result<Status, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.global.threads)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    let config = configure(&cli.global)?;
    let mut run = Run::new(&cli.command.name(), &cli.global.out, rayon::current_num_threads())?;
    match &cli.command {
        Command::Chain { command: ChainCommand::Analyze } => commands::chain_analyze(&config, &mut run),
        Command::Bound { command: BoundCommand::Tmain } => commands::bound_tmain(&config, &mut run),
        Command::Bound { command: BoundCommand::Aksz } => commands::bound_aksz(&config, &mut run),
        Command::Verify { command: VerifyCommand::Suite } => commands::verify_suite(&config, &mut run),
        Command::Example { command: ExampleCommand::Conductance } => commands::example_conductance(&config, &mut run),
        Command::Example { command: ExampleCommand::EvenSites } => commands::example_even_sites(&config, &mut run),
        Command::Dynperc { command } => match command {
            DynpercCommand::Survival => commands::dynperc_survival(&config, &mut run),
            DynpercCommand::Decorr => commands::dynperc_decorr(&config, &mut run),
            DynpercCommand::Fet => commands::dynperc_fet(&config, &mut run),
            DynpercCommand::Fkg => commands::dynperc_fkg(&config, &mut run),
            DynpercCommand::Piv => commands::dynperc_piv(&config, &mut run),
        },
        Command::Scan { command: ScanCommand::Question33 } => commands::scan_question33(&config, &mut run),
    }?;
    for c in run.checks() {
        println!("{:<13} {}  {}", format!("{:?}", c.status).to_lowercase(), c.name, c.detail);
    }
    run.finish(&config)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { Status::Error.code() } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match execute(&cli) {
        Ok(status) => ExitCode::from(status.code() as u8),
        Err(e) => {
            let record = e.record();
            if std::fs::create_dir_all(&cli.global.out).is_ok() {
                let _ = std::fs::write(cli.global.out.join("error.json"), serde_json::to_string_pretty(&record).unwrap_or_default() + "\n");
            }
            eprintln!("{}", serde_json::to_string(&record).unwrap_or_default());
            ExitCode::from(Status::Error.code() as u8)
        }
    }
}
