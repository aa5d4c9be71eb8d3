//! `opentransport`: parameter sweeps over open tight-binding chains, written as CSV.
//!
//! Exit codes: 0 success, 2 configuration or parameter error, 3 solver
//! failure, 4 extremum on the grid boundary under `--strict`.

mod config;
mod experiments;
mod output;

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use opentransport::GridScale;

use config::{ConfigLayer, Experiment, ExperimentConfig, GridLayer, Rate};
use experiments::RunError;

#[derive(Parser, Debug)]
#[command(name = "opentransport", version, about = "Transport sweeps for open tight-binding chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML file with top-level keys and per-experiment tables.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Exit with code 4 when an extremum lies on the grid boundary.
    #[arg(long, global = true)]
    strict: bool,

    /// Print the resolved configuration as TOML and exit.
    #[arg(long, global = true)]
    print_config: bool,

    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Maximal current over a sink-rate by dephasing grid.
    NessScan,
    /// Width spectrum of the non-Hermitian Hamiltonian against the sink rate.
    WidthsScan,
    /// Transfer time and efficiency against the sink rate.
    TransferTime,
    /// Stationary current against the pump rate.
    CurrentVsPump,
    /// Maximal current against the dephasing rate.
    MaxCurrentVsDephasing,
    /// Landauer conductance against the lead coupling.
    ConductanceScan,
    /// Local spectral functions of every site.
    SpectralScan,
    /// Single- against many-excitation stationary currents.
    SeMeCompare,
    /// Disorder-averaged maximal current against the dephasing rate.
    DisorderScan,
    /// Stationary current and efficiency against the loss rate.
    LossScan,
    /// Closed-form design bounds.
    Table1,
    /// Superradiant transition and closed-form optimum.
    SuperradiantGamma,
}

impl Command {
    fn experiment(self) -> Experiment {
        match self {
            Command::NessScan => Experiment::NessScan,
            Command::WidthsScan => Experiment::WidthsScan,
            Command::TransferTime => Experiment::TransferTime,
            Command::CurrentVsPump => Experiment::CurrentVsPump,
            Command::MaxCurrentVsDephasing => Experiment::MaxCurrentVsDephasing,
            Command::ConductanceScan => Experiment::ConductanceScan,
            Command::SpectralScan => Experiment::SpectralScan,
            Command::SeMeCompare => Experiment::SeMeCompare,
            Command::DisorderScan => Experiment::DisorderScan,
            Command::LossScan => Experiment::LossScan,
            Command::Table1 => Experiment::Table1,
            Command::SuperradiantGamma => Experiment::SuperradiantGamma,
        }
    }
}

fn parse_scale(s: &str) -> Result<GridScale, String> {
    match s {
        "linear" | "lin" => Ok(GridScale::Linear),
        "log" => Ok(GridScale::Log),
        _ => Err(format!("expected `linear` or `log`, got `{s}`")),
    }
}

#[derive(Args, Debug, Default)]
struct Overrides {
    #[arg(long, global = true)]
    sites: Option<usize>,
    /// Energy unit for reported columns.
    #[arg(long, global = true)]
    hopping: Option<f64>,
    /// Pump rate, a number or `auto`.
    #[arg(long, global = true)]
    gamma_in: Option<Rate>,
    /// Sink rate, a number or `auto`.
    #[arg(long, global = true)]
    gamma_out: Option<Rate>,
    #[arg(long, global = true)]
    gamma_phi: Option<f64>,
    #[arg(long, global = true)]
    gamma_loss: Option<f64>,
    /// Full width of the uniform on-site disorder.
    #[arg(long, global = true)]
    disorder: Option<f64>,
    /// Static broadening for transmission experiments.
    #[arg(long, global = true)]
    broadening: Option<f64>,
    #[arg(long, global = true)]
    grid_start: Option<f64>,
    #[arg(long, global = true)]
    grid_stop: Option<f64>,
    #[arg(long, global = true)]
    grid_count: Option<usize>,
    #[arg(long, global = true, value_parser = parse_scale)]
    grid_scale: Option<GridScale>,
    #[arg(long, global = true)]
    grid2_start: Option<f64>,
    #[arg(long, global = true)]
    grid2_stop: Option<f64>,
    #[arg(long, global = true)]
    grid2_count: Option<usize>,
    #[arg(long, global = true, value_parser = parse_scale)]
    grid2_scale: Option<GridScale>,
    /// Master seed for disorder realizations.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    realizations: Option<usize>,
    /// Largest qubit chain solved in the many-excitation model.
    #[arg(long, global = true)]
    max_qubits: Option<usize>,
    /// CSV destination (default `<experiment>.csv`).
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
}

impl Overrides {
    fn layer(&self) -> ConfigLayer {
        let grid = |start, stop, count, scale| {
            let g = GridLayer { start, stop, count, scale };
            (g != GridLayer::default()).then_some(g)
        };
        ConfigLayer {
            sites: self.sites,
            hopping: self.hopping,
            gamma_in: self.gamma_in,
            gamma_out: self.gamma_out,
            gamma_phi: self.gamma_phi,
            gamma_loss: self.gamma_loss,
            disorder: self.disorder,
            broadening: self.broadening,
            grid: grid(self.grid_start, self.grid_stop, self.grid_count, self.grid_scale),
            grid2: grid(self.grid2_start, self.grid2_stop, self.grid2_count, self.grid2_scale),
            seed: self.seed,
            realizations: self.realizations,
            max_qubits: self.max_qubits,
            output: self.output.clone(),
        }
    }
}

struct Failure {
    kind: &'static str,
    message: String,
    at: Option<String>,
    code: u8,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Self { kind: "config", message: message.into(), at: None, code: 2 }
    }

    fn report(&self, experiment: Experiment) -> ExitCode {
        let line = serde_json::json!({
            "kind": self.kind,
            "message": self.message,
            "experiment": experiment.name(),
            "at": self.at,
            "exit_code": self.code,
        });
        eprintln!("{line}");
        ExitCode::from(self.code)
    }
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        match e {
            RunError::Config(message) => Failure::config(message),
            RunError::Solver { error, at } => Self { kind: "solver", message: error.to_string(), at: Some(at), code: 3 },
        }
    }
}

fn resolve(cli: &Cli, experiment: Experiment) -> Result<ExperimentConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::config(format!("config: cannot read {}: {e}", path.display())))?;
            ExperimentConfig::from_toml(&text, experiment).map_err(|e| Failure::config(e.to_string()))?
        }
        None => ExperimentConfig::defaults(experiment),
    };
    cfg.apply(&cli.overrides.layer());
    cfg.validate().map_err(|e| Failure::config(e.to_string()))?;
    Ok(cfg)
}

fn execute(cli: &Cli, experiment: Experiment) -> Result<ExitCode, Failure> {
    let cfg = resolve(cli, experiment)?;
    let toml = cfg.to_toml().map_err(|e| Failure::config(e.to_string()))?;
    if cli.print_config {
        print!("{toml}");
        return Ok(ExitCode::SUCCESS);
    }
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::config(format!("threads: {e}")))?;
    }

    let report = experiments::run(&cfg)?;

    let path = cfg.output.clone().unwrap_or_else(|| PathBuf::from(format!("{}.csv", experiment.name())));
    let header = format!("opentransport {}\n{toml}", env!("CARGO_PKG_VERSION"));
    let io = |e: std::io::Error| Failure {
        kind: "io",
        message: format!("{}: {e}", path.display()),
        at: None,
        code: 3,
    };
    let file = File::create(&path).map_err(io)?;
    report.table.write_csv(BufWriter::new(file), &header, cfg.hopping).map_err(io)?;

    for line in &report.record {
        println!("{line}");
    }
    println!("{}: {} rows -> {}; {}", experiment, report.table.rows.len(), path.display(), report.summary);
    if let Some(warning) = &report.boundary {
        if cli.strict {
            return Err(Failure { kind: "grid_too_coarse", message: warning.clone(), at: None, code: 4 });
        }
        log::warn!("{warning}");
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let experiment = cli.command.experiment();
    match execute(&cli, experiment) {
        Ok(code) => code,
        Err(failure) => failure.report(experiment),
    }
}
