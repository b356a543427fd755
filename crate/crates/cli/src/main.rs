use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qwalk_cli::commands;
use qwalk_cli::config::{CoinSpec, WalkerKind};
use qwalk_cli::output::to_json;
use qwalk_cli::{CliError, CliResult, ExperimentConfig};
use qwalk_core::disorder::DEFAULT_TAIL_BOUND;
use qwalk_core::{CoinKind, DisorderMode, Distribution};

#[derive(Parser)]
#[command(name = "qwalk", version, about = "Disordered discrete-time quantum walks")]
struct Cli {
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve one realization and write position snapshots
    Simulate(RunArgs),
    /// Disorder-averaged spreading and its fitted exponent
    Ensemble(RunArgs),
    /// Classical random-walk baseline
    Classical(RunArgs),
    /// Fit a series file
    Fit {
        series: PathBuf,
        #[arg(long, default_value_t = 18)]
        tmin: usize,
        #[arg(long, default_value_t = 50)]
        tmax: usize,
        /// Write the summary here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// pmf table, moments and truncation radius of a jump distribution
    Distribution {
        /// e.g. `poisson:lambda=1`
        spec: Distribution,
        #[arg(long, default_value_t = DEFAULT_TAIL_BOUND)]
        tail: f64,
        #[arg(long, default_value = "qwalk-out")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    walker: Option<WalkerKind>,
    #[arg(long)]
    coin: Option<CoinKind>,
    #[arg(long)]
    steps: Option<usize>,
    /// Jump distribution, `KIND:key=value,...`; dynamic unless --static
    #[arg(long)]
    disorder: Option<Distribution>,
    /// One jump per vertex instead of one per step
    #[arg(long = "static")]
    static_disorder: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    tmin: Option<usize>,
    #[arg(long)]
    tmax: Option<usize>,
    /// Comma-separated snapshot times for `simulate`
    #[arg(long, value_delimiter = ',')]
    snapshots: Option<Vec<usize>>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    max_realizations: Option<usize>,
    /// Run exactly --max-realizations
    #[arg(long)]
    no_convergence: bool,
}

impl RunArgs {
    fn resolve(self) -> CliResult<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(w) = self.walker {
            cfg.walker = w;
            if w == WalkerKind::Quantum1d && self.coin.is_none() && cfg.coin == CoinSpec::Preset(CoinKind::Grover) {
                cfg.coin = CoinSpec::Preset(CoinKind::Hadamard2);
            }
        }
        if let Some(c) = self.coin {
            cfg.coin = CoinSpec::Preset(c);
            cfg.initial_coin = None;
            if c == CoinKind::Hadamard2 && self.walker.is_none() {
                cfg.walker = WalkerKind::Quantum1d;
            }
        }
        if let Some(d) = self.disorder {
            cfg.disorder.distribution = Some(d);
            if cfg.disorder.mode == DisorderMode::None {
                cfg.disorder.mode = DisorderMode::Dynamic;
            }
        }
        if self.static_disorder {
            cfg.disorder.mode = DisorderMode::Static;
        }
        if let Some(v) = self.steps {
            cfg.steps = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.out {
            cfg.out = v;
        }
        if let Some(v) = self.tmin {
            cfg.fit.t_min = v;
        }
        if let Some(v) = self.tmax {
            cfg.fit.t_max = v;
        }
        if let Some(v) = self.snapshots {
            cfg.snapshots = v;
        }
        if let Some(v) = self.batch {
            cfg.ensemble.batch_size = v;
        }
        if let Some(v) = self.max_realizations {
            cfg.ensemble.max_realizations = v;
        }
        if self.no_convergence {
            cfg.ensemble.convergence = false;
        }
        Ok(cfg)
    }
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }
    match cli.command {
        Command::Simulate(args) => commands::simulate(&args.resolve()?),
        Command::Ensemble(args) => commands::ensemble(&args.resolve()?).map(|s| print!("{}", to_json(&s))),
        Command::Classical(args) => commands::classical(&args.resolve()?).map(|s| print!("{}", to_json(&s))),
        Command::Fit { series, tmin, tmax, out } => commands::fit(&series, tmin, tmax, out.as_deref()).map(drop),
        Command::Distribution { spec, tail, out } => commands::distribution(spec, tail, &out).map(|r| print!("{}", to_json(&r))),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qwalk: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
