use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use vrsim::scenarios::{load_config, run_scenario, Scenario};
use vrsim::Error;

/// Run a reproduction scenario and write its CSV tables and summary.json.
#[derive(Debug, Parser)]
#[command(name = "vrsim", version)]
struct Cli {
    /// levels_two_photon, splitting_vs_coupling, dynamics_two_photon,
    /// driven_dynamics, levels_one_photon, dynamics_one_photon or converge
    scenario: String,

    /// JSON document merged over the scenario defaults.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Output root (defaults to $VRSIM_OUT, then ./out).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Dotted-path override, e.g. --set model.kappa=0.04. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Print the resolved config and exit.
    #[arg(long)]
    print_config: bool,
}

fn run(cli: Cli) -> Result<bool, Error> {
    let scenario: Scenario = cli.scenario.parse()?;
    let file = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
                path: path.clone(),
                source: e,
            })?;
            Some(serde_json::from_str(&text)?)
        }
        None => None,
    };
    let mut overrides = Vec::new();
    let root = cli
        .out
        .or_else(|| std::env::var_os("VRSIM_OUT").map(PathBuf::from));
    if let Some(root) = root {
        overrides.push(format!(
            "output_dir={}",
            serde_json::Value::String(root.to_string_lossy().into_owned())
        ));
    }
    overrides.extend(cli.set);
    let config = load_config(scenario, file, &overrides)?;
    if cli.print_config {
        println!("{}", serde_json::to_string_pretty(&config)?);
        return Ok(true);
    }
    let output = run_scenario(&config)?;
    for c in &output.summary.checks {
        println!(
            "{} {}: {} (expected {})",
            if c.passed { "ok  " } else { "FAIL" },
            c.name,
            c.value,
            c.expected
        );
    }
    println!("wrote {}", output.dir.display());
    Ok(output.passed())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("vrsim: {e}");
            ExitCode::from(1)
        }
    }
}
