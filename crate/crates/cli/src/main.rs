//! Command-line driver for fracture network sweeps.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{error, info, warn};
use udfm::pipeline::{
    report_tables, run_pipeline, write_tables, IsolatedMode, Manifest, PipelineError, RunConfig, Stage,
};

const EXIT_CONFIG: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_REPORT: u8 = 15;
const THREADS_ENV: &str = "UDFM_THREADS";

#[derive(Parser)]
#[command(name = "udfm", version, about = "Fracture network generation, upscaling, flow and transport sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate networks only.
    Generate(RunArgs),
    /// Generate and mesh.
    Mesh(RunArgs),
    /// Run through property upscaling.
    Upscale(RunArgs),
    /// Run through the steady pressure solve.
    Flow(RunArgs),
    /// Run through tracer transport.
    Transport(RunArgs),
    /// Run every stage and write the report tables.
    All(RunArgs),
    /// Build tables from an existing output directory.
    Report {
        #[arg(long, default_value = "udfm-out")]
        out: PathBuf,
    },
    /// Print a preset configuration as JSON.
    Config {
        #[arg(long, value_enum, default_value_t = Preset::Desk)]
        preset: Preset,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Desk,
    Full,
}

impl Preset {
    fn config(self) -> RunConfig {
        match self {
            Self::Desk => RunConfig::desk(),
            Self::Full => RunConfig::full_scale(),
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// JSON configuration file; flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Preset used when no configuration file is given.
    #[arg(long, value_enum, default_value_t = Preset::Desk)]
    preset: Preset,
    #[arg(long, value_delimiter = ',')]
    seed: Vec<u64>,
    #[arg(long, value_delimiter = ',')]
    orl: Vec<u8>,
    /// Matrix permeabilities, m².
    #[arg(long, value_delimiter = ',')]
    km: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    p_prime: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    isolated: Vec<IsolatedMode>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    no_vtk: bool,
}

impl RunArgs {
    fn resolve(&self, stop_after: Stage) -> Result<RunConfig, PipelineError> {
        let mut c = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => self.preset.config(),
        };
        if !self.seed.is_empty() {
            c.seeds = self.seed.clone();
        }
        if !self.orl.is_empty() {
            c.orls = self.orl.clone();
        }
        if !self.km.is_empty() {
            c.k_m = self.km.clone();
        }
        if !self.p_prime.is_empty() {
            c.p_primes = self.p_prime.clone();
        }
        if !self.isolated.is_empty() {
            c.isolated_modes = self.isolated.clone();
        }
        if let Some(out) = &self.out {
            c.output_dir = out.clone();
        }
        if self.no_vtk {
            c.write_vtk = false;
        }
        c.stop_after = stop_after;
        c.validate()?;
        Ok(c)
    }
}

fn error_code(e: &PipelineError) -> u8 {
    match e {
        PipelineError::Config(_) => EXIT_CONFIG,
        _ => EXIT_IO,
    }
}

fn init_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().map_err(|_| format!("{THREADS_ENV}={raw} is not a thread count"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn report(out: &std::path::Path) -> Result<(), PipelineError> {
    let manifest = Manifest::load(out)?;
    let bad = manifest.verify(out)?;
    for path in &bad {
        warn!("artifact {path} does not match its manifest checksum");
    }
    let written = write_tables(out, &report_tables(&manifest))?;
    info!("wrote {} report files to {}", written.len(), out.display());
    Ok(())
}

fn run(args: &RunArgs, stop_after: Stage, tables: bool) -> ExitCode {
    let config = match args.resolve(stop_after) {
        Ok(c) => c,
        Err(e) => {
            error!("{e}");
            return ExitCode::from(error_code(&e));
        }
    };
    let manifest = match run_pipeline(&config) {
        Ok(m) => m,
        Err(e) => {
            error!("{e}");
            return ExitCode::from(error_code(&e));
        }
    };
    info!("{} artifacts written to {}", manifest.artifacts.len(), config.output_dir.display());
    if tables {
        if let Err(e) = report(&config.output_dir) {
            error!("{e}");
            return ExitCode::from(EXIT_REPORT);
        }
    }
    let failures = &manifest.summary.failures;
    for f in failures {
        error!("seed {} p' {} {} failed: {}", f.seed, f.p_prime, f.stage.name(), f.message);
    }
    match failures.iter().map(|f| f.stage).min() {
        Some(stage) => ExitCode::from(stage.exit_code() as u8),
        None => ExitCode::SUCCESS,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    if let Err(e) = init_threads() {
        error!("{e}");
        return ExitCode::from(EXIT_CONFIG);
    }
    match Cli::parse().command {
        Command::Generate(a) => run(&a, Stage::Generate, false),
        Command::Mesh(a) => run(&a, Stage::Mesh, false),
        Command::Upscale(a) => run(&a, Stage::Upscale, false),
        Command::Flow(a) => run(&a, Stage::Flow, false),
        Command::Transport(a) => run(&a, Stage::Transport, false),
        Command::All(a) => run(&a, Stage::Transport, true),
        Command::Report { out } => match report(&out) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                error!("{e}");
                ExitCode::from(EXIT_REPORT)
            }
        },
        Command::Config { preset } => {
            println!("{}", preset.config().to_json());
            ExitCode::SUCCESS
        }
    }
}
