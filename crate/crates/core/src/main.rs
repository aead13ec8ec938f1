use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, Ordering};

use clap::{Parser, Subcommand};

use bec2::cli::{self, Context, RunSummary, TableFormat};
use bec2::Result;

static CANCEL: AtomicBool = AtomicBool::new(false);

/// Two-component gases in off-resonant standing light: optics, diffraction
/// spectra and split-step simulation.
#[derive(Parser)]
#[command(version)]
struct Args {
    /// Output directory [default: `output.dir` from the config, else bec2-out].
    #[arg(long, global = true, env = "BEC2_OUT")]
    out: Option<PathBuf>,
    /// Table format; defaults to `output.format` from the config.
    #[arg(long, global = true, value_enum)]
    format: Option<TableFormat>,
    /// Worker threads for `sweep`.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Accepted for compatibility; every pipeline is deterministic.
    #[arg(long, global = true)]
    seedless: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Refractive index over the sweep grid.
    Index(ConfigArg),
    /// Susceptibility over the sweep grid.
    Chi(ConfigArg),
    /// Closed-form diffraction spectrum.
    Diffract(ConfigArg),
    /// Split-step evolution across the laser envelope.
    Simulate(ConfigArg),
    /// Parallel diffraction sweep.
    Sweep(ConfigArg),
    /// Run the acceptance criteria.
    Validate,
}

#[derive(clap::Args)]
struct ConfigArg {
    #[arg(long)]
    config: PathBuf,
}

fn load(arg: &ConfigArg) -> Result<cli::RunConfig> {
    let mut cfg = cli::load_config(&arg.config)?;
    // snapshot paths are relative to the config file
    if let (Some(file), Some(dir)) = (cfg.grid.file.as_mut(), arg.config.parent()) {
        if file.is_relative() {
            *file = dir.join(&*file);
        }
    }
    Ok(cfg)
}

const DEFAULT_OUT: &str = "bec2-out";

fn run(args: &Args) -> Result<i32> {
    let cfg = match &args.command {
        Command::Index(c) | Command::Chi(c) | Command::Diffract(c) | Command::Simulate(c) | Command::Sweep(c) => {
            Some(load(c)?)
        }
        Command::Validate => None,
    };
    let out = args
        .out
        .clone()
        .or_else(|| cfg.as_ref().and_then(|c| c.output.dir.clone()))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let ctx = Context {
        out: out.clone(),
        format: args.format,
        jobs: args.jobs,
        cancel: &CANCEL,
    };
    let finish = |s: RunSummary| {
        for w in &s.warnings {
            eprintln!("warning: {w}");
        }
        eprintln!("wrote {} files to {}", s.files.len() + 1, out.display());
        if s.complete {
            cli::EXIT_OK
        } else {
            cli::EXIT_INTERRUPTED
        }
    };
    let summary = match (&args.command, &cfg) {
        (Command::Index(_), Some(cfg)) => cli::cmd_index(cfg, &ctx)?,
        (Command::Chi(_), Some(cfg)) => cli::cmd_chi(cfg, &ctx)?,
        (Command::Diffract(_), Some(cfg)) => cli::cmd_diffract(cfg, &ctx)?,
        (Command::Simulate(_), Some(cfg)) => cli::cmd_simulate(cfg, &ctx)?,
        (Command::Sweep(_), Some(cfg)) => cli::cmd_sweep(cfg, &ctx)?,
        _ => {
            let (report, summary) = cli::cmd_validate(&ctx)?;
            for c in &report.criteria {
                println!("{}", c.line());
            }
            finish(summary);
            return Ok(if report.passed { cli::EXIT_OK } else { cli::EXIT_VALIDATION_FAILED });
        }
    };
    Ok(finish(summary))
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Err(e) = ctrlc::set_handler(|| CANCEL.store(true, Ordering::SeqCst)) {
        eprintln!("warning: no interrupt handler: {e}");
    }
    let code = match run(&args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            cli::exit_code(&e)
        }
    };
    ExitCode::from(code as u8)
}
