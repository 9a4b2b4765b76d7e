use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use nhssh_cli::config::{from_table, parse_table};
use nhssh_cli::{parse_sweep, run, run_sweep, CliError};

/// Experiments on non-Hermitian SSH rings and interferometers.
#[derive(Debug, Parser)]
#[command(name = "nhssh", version)]
struct Args {
    /// TOML run configuration; its `command` key selects the experiment.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for CSVs and the manifest.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the time step.
    #[arg(long)]
    dt: Option<f64>,
    /// Overrides the k-grid size.
    #[arg(long)]
    nk: Option<usize>,
    /// Repeats the run over `key=start:stop:count`.
    #[arg(long)]
    sweep: Option<String>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match real_main(&args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("nhssh: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn real_main(args: &Args) -> Result<i32, CliError> {
    let text = fs::read_to_string(&args.config)?;
    let mut table = parse_table(&text)?;
    if let Some(dt) = args.dt {
        table.insert("dt".into(), toml::Value::Float(dt));
    }
    if let Some(nk) = args.nk {
        table.insert("n_k".into(), toml::Value::Integer(nk as i64));
    }
    if let Some(s) = &args.sweep {
        let (key, values) = parse_sweep(s)?;
        let codes = run_sweep(&table, &key, &values, &args.out)?;
        println!("sweep over {key}: {} points, {} failed", codes.len(), codes.iter().filter(|&&c| c != 0).count());
        return Ok(codes.into_iter().max().unwrap_or(0));
    }
    let cfg = from_table(table)?;
    let o = run(&cfg, &args.out)?;
    println!("{}: {} = {}", cfg.command.name(), o.headline, o.headline_value());
    if let (Some(t), Some(c)) = (o.manifest.get("transmission"), o.manifest.get("confinement")) {
        let pt = o.manifest.get("derived.predicted_transmit_fraction").unwrap_or("n/a");
        let pc = o.manifest.get("derived.predicted_confine_fraction").unwrap_or("n/a");
        println!("transmission = {t}, confinement = {c}, predicted = ({pt}, {pc})");
    }
    Ok(0)
}
