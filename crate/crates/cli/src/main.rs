use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gge_thermo_cli::config::{parse_config, Experiment};
use gge_thermo_cli::experiments;

#[derive(Parser)]
#[command(name = "gge-thermo", version, about = "Quench protocols for free-fermion chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Relaxation of the first-site occupation after a single quench.
    Fig1(Flags),
    /// Optimal work extraction from random mode populations.
    Fig2(Flags),
    /// Local quenches of a site coupled to a thermal bath.
    Fig3(Flags),
    /// Local quenches against a population-inverted bath.
    Fig4(Flags),
    /// Minimum-work scan over quench counts.
    Scan(Flags),
    /// Gaussian back end against the dense back end on a small chain.
    OracleCheck(Flags),
}

#[derive(Args, Default)]
struct Flags {
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    g: Option<String>,
    #[arg(long)]
    beta0: Option<String>,
    #[arg(long)]
    delta: Option<String>,
    #[arg(long = "eps1-peak")]
    eps1_peak: Option<String>,
    #[arg(long = "K")]
    k: Option<String>,
    /// Comma-separated quench counts.
    #[arg(long)]
    quenches: Option<String>,
    /// Comma-separated subset of exact, ta-gge, gibbs.
    #[arg(long)]
    models: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long = "hold-min")]
    hold_min: Option<String>,
    #[arg(long = "hold-max")]
    hold_max: Option<String>,
    /// Any other configuration key.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Key-value file applied before the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Flags {
    fn pairs(&self) -> Result<Vec<(String, String)>, String> {
        let named = [
            ("n", &self.n),
            ("g", &self.g),
            ("beta0", &self.beta0),
            ("delta", &self.delta),
            ("eps1_peak", &self.eps1_peak),
            ("K", &self.k),
            ("quenches", &self.quenches),
            ("models", &self.models),
            ("seed", &self.seed),
            ("hold_min", &self.hold_min),
            ("hold_max", &self.hold_max),
        ];
        let mut out: Vec<(String, String)> = named
            .into_iter()
            .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone())))
            .collect();
        for s in &self.set {
            let (k, v) = s.split_once('=').ok_or_else(|| format!("--set expects KEY=VALUE, got {s:?}"))?;
            out.push((k.trim().to_string(), v.trim().to_string()));
        }
        if let Some(p) = &self.out {
            out.push(("out".into(), p.display().to_string()));
        }
        Ok(out)
    }
}

fn configure_threads() -> Result<(), String> {
    if let Ok(v) = std::env::var("GGE_THERMO_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| format!("GGE_THERMO_THREADS must be a positive integer, got {v:?}"))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, flags) = match &cli.command {
        Command::Fig1(f) => (Experiment::Fig1, f),
        Command::Fig2(f) => (Experiment::Fig2, f),
        Command::Fig3(f) => (Experiment::Fig3, f),
        Command::Fig4(f) => (Experiment::Fig4, f),
        Command::Scan(f) => (Experiment::Scan, f),
        Command::OracleCheck(f) => (Experiment::OracleCheck, f),
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let cfg = match flags
        .pairs()
        .and_then(|p| parse_config(experiment, &p, flags.config.as_deref()).map_err(|e| e.to_string()))
    {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let report = match experiments::preflight(&cfg).and_then(|_| experiments::run(&cfg)) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::FAILURE;
        }
    };
    for line in &report.notes {
        eprintln!("{line}");
    }
    let written = match &cfg.out {
        Some(p) => report.table.write_atomic(p),
        None => std::io::stdout().lock().write_all(report.table.render().as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: writing output: {e}");
        return ExitCode::FAILURE;
    }
    ExitCode::SUCCESS
}
