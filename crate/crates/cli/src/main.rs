use clap::{Args, Parser, Subcommand};
use std::process::ExitCode;

use mbqc_cli::{emit, execute, parse, CommandName, ExperimentConfig};
use mbqc_core::Error;

/// Graph-state experiments: pulse compilation, measurement patterns, error
/// correction, Bell tests and tomography.
#[derive(Parser)]
#[command(name = "mbqc", version)]
struct Cli {
    /// Print the equivalent TOML config instead of running.
    #[arg(long, global = true)]
    dump_config: bool,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct FamilyArg {
    /// LC4, RC4, EC<n>, GHZ<n>, or a family name followed by SIZE.
    family: String,
    size: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compile, simulate and correct; report fidelity with the graph state.
    Verify {
        #[command(flatten)]
        family: FamilyArg,
        /// Use this pulse program instead of the compiled one.
        #[arg(long)]
        pulses: Option<String>,
        #[arg(long)]
        out: Option<String>,
    },
    /// Print the pulse program of a family.
    Compile {
        #[command(flatten)]
        family: FamilyArg,
        #[arg(long)]
        out: Option<String>,
    },
    /// Run a measurement pattern; one CSV row per angle setting.
    Gates {
        /// single or two.
        pattern: String,
        /// Comma-separated radians (e.g. pi/2,0,-pi/4); repeat for more rows.
        #[arg(long, required = true, allow_hyphen_values = true)]
        angles: Vec<String>,
        #[arg(long, default_value = "branch")]
        mode: String,
        #[arg(long)]
        shots: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<String>,
    },
    /// Average teleportation fidelity of the error-correction protocol.
    Qec {
        /// Code lengths, comma separated.
        #[arg(long, default_value = "1,3,5")]
        n: String,
        /// all, or codeword indices such as C1,C2.
        #[arg(long, default_value = "all")]
        targets: String,
        /// start:stop:points for the flip probability.
        #[arg(long, default_value = "0:1:21")]
        p_grid: String,
        /// Input set size: 4 or 6.
        #[arg(long, default_value_t = 4)]
        inputs: usize,
        #[arg(long)]
        out: Option<String>,
    },
    /// Bell-operator expectation and its local-hidden-variable bound.
    Bell {
        #[command(flatten)]
        family: FamilyArg,
        /// kind:strength on every qubit (depolarize, dephase, phaseflip).
        #[arg(long)]
        noise: Option<String>,
        /// Add a finite-shot estimate with this many shots per setting.
        #[arg(long)]
        shots: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        out: Option<String>,
    },
    /// Simulated tomography with maximum-likelihood reconstruction.
    Tomo {
        #[command(flatten)]
        family: FamilyArg,
        #[arg(long, default_value_t = 1000)]
        shots: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Monte Carlo trials for error bars.
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long)]
        noise: Option<String>,
        /// Only the settings needed for the Bell operator.
        #[arg(long)]
        bell_only: bool,
        /// Exact probabilities instead of sampled counts.
        #[arg(long)]
        exact: bool,
        /// Output prefix: writes <prefix>.json, <prefix>_rho.csv, <prefix>_counts.csv.
        #[arg(long)]
        out: Option<String>,
    },
    /// Run an experiment described by a TOML config file.
    Run {
        #[arg(long)]
        config: String,
    },
}

fn base(command: CommandName, f: Option<FamilyArg>) -> ExperimentConfig {
    ExperimentConfig {
        command: Some(command),
        family: f.as_ref().map(|f| f.family.clone()),
        size: f.and_then(|f| f.size),
        ..Default::default()
    }
}

fn to_config(cmd: Cmd) -> Result<ExperimentConfig, Error> {
    Ok(match cmd {
        Cmd::Verify { family, pulses, out } => ExperimentConfig { pulses, out, ..base(CommandName::Verify, Some(family)) },
        Cmd::Compile { family, out } => ExperimentConfig { out, ..base(CommandName::Compile, Some(family)) },
        Cmd::Gates { pattern, angles, mode, shots, seed, out } => ExperimentConfig {
            pattern: Some(pattern),
            angles,
            mode: Some(mode),
            shots,
            seed: Some(seed),
            out,
            ..base(CommandName::Gates, None)
        },
        Cmd::Qec { n, targets, p_grid, inputs, out } => ExperimentConfig {
            n: parse::n_list(&n)?,
            targets: Some(targets),
            p_grid: Some(p_grid),
            inputs: Some(inputs),
            out,
            ..base(CommandName::Qec, None)
        },
        Cmd::Bell { family, noise, shots, seed, trials, out } => ExperimentConfig {
            noise,
            shots,
            seed: Some(seed),
            trials,
            out,
            ..base(CommandName::Bell, Some(family))
        },
        Cmd::Tomo { family, shots, seed, trials, noise, bell_only, exact, out } => ExperimentConfig {
            shots: Some(shots),
            seed: Some(seed),
            trials: Some(trials),
            noise,
            bell_only,
            exact,
            out,
            ..base(CommandName::Tomo, Some(family))
        },
        Cmd::Run { config } => ExperimentConfig::from_toml(&std::fs::read_to_string(config)?)?,
    })
}

fn kind(e: &Error) -> String {
    let dbg = format!("{e:?}");
    dbg.split(|c: char| !c.is_alphanumeric()).next().unwrap_or("Error").to_string()
}

fn fail(e: &Error) -> ExitCode {
    let record = serde_json::json!({ "schema": 1, "error": { "kind": kind(e), "message": e.to_string() } });
    eprintln!("{record}");
    ExitCode::from(1)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match to_config(cli.command) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    if cli.dump_config {
        return match cfg.to_toml() {
            Ok(t) => {
                print!("{t}");
                ExitCode::SUCCESS
            }
            Err(e) => fail(&e),
        };
    }
    match execute(&cfg).and_then(|art| emit(&art, cfg.out.as_deref()).map(|_| art.success)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => fail(&e),
    }
}
