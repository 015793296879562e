use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use vortexlab::io::{parse_config, unix_now, Mode, RunConfig, RunManifest};
use vortexlab::Error;

mod commands;

/// Concentrated planar vortex dynamics: particle method, point vortices and
/// Wasserstein diagnostics.
#[derive(Parser, Debug)]
#[command(name = "vortexlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate the point-vortex system alone.
    Pointvortex(Common),
    /// Run the particle method against the point vortices and record diagnostics.
    Simulate(Common),
    /// Repeat `simulate` over a decreasing list of epsilons and fit rates.
    Sweep(Common),
    /// Recompute transport metrics from exported cloud/measure CSV files.
    Metrics {
        #[command(flatten)]
        common: Common,
        /// Cloud (`k,x,y,gamma,tag`) or measure (`x,y,mass`) CSV files.
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output_dir` from the configuration).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for the sampling jitter (overrides `seed`).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for velocity evaluation and sweeps.
    #[arg(long)]
    threads: Option<usize>,
    /// Use order-independent summation throughout.
    #[arg(long)]
    deterministic: bool,
}

pub(crate) struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if e.is_input_error() { 1 } else { 2 },
            message: e.to_string(),
        }
    }
}

pub(crate) type CmdResult = Result<(), Failure>;

fn load(common: &Common, mode: Mode) -> Result<RunConfig, Failure> {
    let Some(path) = &common.config else {
        return Err(Failure {
            code: 1,
            message: format!("`{mode}` requires --config <path>\n\n{}", usage()),
        });
    };
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e)).map_err(|e| Failure {
        code: 1,
        message: e.to_string(),
    })?;
    let mut cfg = parse_config(&text).map_err(|e| Failure {
        code: 1,
        message: format!("{}: {e}", path.display()),
    })?;
    if cfg.mode != mode {
        return Err(Failure {
            code: 1,
            message: format!("configuration is for mode `{}`, not `{mode}`", cfg.mode),
        });
    }
    apply_overrides(&mut cfg, common);
    Ok(cfg)
}

fn apply_overrides(cfg: &mut RunConfig, common: &Common) {
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if common.deterministic {
        cfg.deterministic = true;
    }
    if let Some(o) = &common.out {
        cfg.output_dir = Some(o.clone());
    }
}

fn usage() -> String {
    use clap::CommandFactory;
    Cli::command().render_usage().to_string()
}

pub(crate) fn out_dir(cfg: &RunConfig) -> Result<PathBuf, Failure> {
    let dir = cfg.output_dir.clone().unwrap_or_else(|| PathBuf::from("vortexlab-out"));
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    Ok(dir)
}

pub(crate) fn finish(dir: &Path, cfg: &RunConfig, started: f64) -> CmdResult {
    let echo = serde_json::to_value(cfg).expect("configs serialize");
    RunManifest::write(dir, echo, started)?;
    Ok(())
}

fn run(cli: Cli) -> CmdResult {
    let common = match &cli.command {
        Command::Pointvortex(c) | Command::Simulate(c) | Command::Sweep(c) => c.clone(),
        Command::Metrics { common, .. } => common.clone(),
    };
    if let Some(n) = common.threads {
        if n == 0 {
            return Err(Failure { code: 1, message: "--threads must be positive".into() });
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Failure {
            code: 2,
            message: e.to_string(),
        })?;
    }
    let started = unix_now();
    match cli.command {
        Command::Pointvortex(c) => commands::pointvortex(&load(&c, Mode::Pointvortex)?, started),
        Command::Simulate(c) => commands::simulate(&load(&c, Mode::Simulate)?, started),
        Command::Sweep(c) => commands::sweep(&load(&c, Mode::Sweep)?, started),
        Command::Metrics { common, files } => {
            let cfg = match &common.config {
                Some(_) => Some(load(&common, Mode::Metrics)?),
                None => None,
            };
            commands::metrics(cfg.as_ref(), common.out.as_deref(), &files, started)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
