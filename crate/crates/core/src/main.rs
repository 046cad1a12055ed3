use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use ris_anm::harness::{parse_list, parse_mu, preset, run, write_csv, ExperimentConfig, Scenario};

/// Monte-Carlo runner for RIS channel estimation with location priors.
#[derive(Parser, Debug)]
#[command(name = "ris-anm", version)]
struct Cli {
    /// Preset: fig3, fig4, fig5, fig6 or custom.
    #[arg(long)]
    scenario: Option<Scenario>,
    /// Flat key=value config file; flags given on the command line take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated SNR grid in dB, e.g. -10,0
    #[arg(long, allow_hyphen_values = true)]
    snr_list: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Regularisation: auto, auto:<scale> or a fixed value.
    #[arg(long)]
    mu: Option<String>,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Add a wall-time metadata line; the CSV is then no longer byte-reproducible.
    #[arg(long)]
    record_wall_time: bool,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

fn build_config(cli: &Cli) -> Result<ExperimentConfig, Failure> {
    let usage = |e: ris_anm::Error| Failure::Usage(e.to_string());
    let mut cfg = match (&cli.config, cli.scenario) {
        (None, None) => return Err(Failure::Usage("one of --scenario or --config is required".into())),
        (Some(path), scenario) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
            let mut cfg = ExperimentConfig::from_key_values(&text).map_err(usage)?;
            if let Some(s) = scenario {
                if s != cfg.scenario {
                    return Err(Failure::Usage(format!(
                        "--scenario {s} conflicts with scenario={} in config file",
                        cfg.scenario
                    )));
                }
            }
            cfg.scenario = scenario.unwrap_or(cfg.scenario);
            cfg
        }
        (None, Some(s)) => preset(s),
    };
    if let Some(v) = &cli.snr_list {
        cfg.snr_db_grid = parse_list(v).map_err(usage)?;
    }
    if let Some(t) = cli.trials {
        cfg.trials = t;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(m) = &cli.mu {
        cfg.anm.mu = parse_mu(m).map_err(usage)?;
    }
    if let Some(o) = &cli.out {
        cfg.output_path = Some(o.clone());
    }
    cfg.validate().map_err(usage)?;
    if cfg.output_path.is_none() {
        return Err(Failure::Usage("an output path is required (--out or output_path)".into()));
    }
    Ok(cfg)
}

fn execute(cli: &Cli) -> Result<(), Failure> {
    let cfg = build_config(cli)?;
    let report = run(&cfg).map_err(|e| Failure::Runtime(e.to_string()))?;
    for line in report.summary_lines() {
        println!("{line}");
    }
    let out = cfg.output_path.as_ref().expect("checked in build_config");
    write_csv(&report, out, cli.record_wall_time).map_err(|e| Failure::Runtime(e.to_string()))?;
    if report.failures > 0 {
        eprintln!("solver failures: {} of {}", report.failures, report.attempts);
    }
    report.check().map_err(|e| Failure::Runtime(e.to_string()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
