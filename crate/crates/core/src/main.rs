use anyhow::Context;
use clap::{Parser, Subcommand};
use rarelab::cli::{self, RunConfig};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "rarelab", version, about = "Compressible Navier-Stokes around rarefaction waves")]
struct Cli {
    /// TOML run configuration; the stability benchmark when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// `key.path=value`, applied after the config file. Repeatable.
    #[arg(long = "override", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Run even when eps and t_final fail the compatibility condition.
    #[arg(long, global = true)]
    allow_eps_violation: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write wave profiles, decay rates and wave constants.
    Wave,
    /// Run one simulation with diagnostics.
    Run,
    /// Weak-form residuals, particle paths and blow-up indicator for
    /// finished runs, coarsest first.
    Diag {
        #[arg(required = true)]
        runs: Vec<PathBuf>,
    },
    /// Run every combination of the `[sweep]` lists.
    Sweep,
}

fn exit_code(e: &anyhow::Error) -> u8 {
    e.chain()
        .find_map(|c| c.downcast_ref::<rarelab::Error>())
        .map(|e| e.exit_code() as u8)
        .unwrap_or(3)
}

fn load(cli: &Cli) -> anyhow::Result<RunConfig> {
    let mut cfg = RunConfig::load(cli.config.as_deref())?.with_overrides(&cli.overrides)?;
    if let Some(out) = &cli.out {
        cfg.output.dir = out.clone();
    }
    Ok(cfg)
}

fn dispatch(cli: Cli) -> anyhow::Result<ExitCode> {
    match &cli.cmd {
        Cmd::Wave => {
            let cfg = load(&cli)?;
            cli::cmd_wave(&cfg, &cfg.output.dir).context("wave")?;
            println!("wave written to {}", cfg.output.dir.display());
        }
        Cmd::Run => {
            let cfg = load(&cli)?;
            let s = cli::cmd_run(&cfg, &cfg.output.dir, cli.allow_eps_violation)
                .with_context(|| format!("run into {}", cfg.output.dir.display()))?;
            println!(
                "run finished: t = {}, sup gap {:.3e} -> {:.3e}, T0 = {:?}, T1 = {:?}",
                s.t_final, s.sup_gap_initial, s.sup_gap_final, s.vacuum.t0, s.vacuum.t1
            );
        }
        Cmd::Diag { runs } => {
            let post = match &cli.config {
                Some(p) => Some(RunConfig::load(Some(p))?),
                None => None,
            };
            let out = cli.out.clone().unwrap_or_else(|| runs[0].clone());
            cli::cmd_diag(runs, &out, post.as_ref(), &cli.overrides).context("diag")?;
            println!("diagnostics written to {}", out.display());
        }
        Cmd::Sweep => {
            let cfg = load(&cli)?;
            let o = cli::cmd_sweep(&cfg, &cfg.output.dir, cli.allow_eps_violation).context("sweep")?;
            println!("{} runs, {} failed", o.rows.len(), o.failures());
            if let Some(code) = o.first_failure {
                for r in o.rows.iter().filter(|r| r.status != "ok") {
                    eprintln!("{}: {}", r.run, r.message);
                }
                return Ok(ExitCode::from(code as u8));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
