use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qubench_cli::config::ProtocolId;

#[derive(Parser)]
#[command(
    name = "qubench",
    version,
    about = "Noisy-gate simulation and benchmarking protocols for single qubits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Path to the JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: $QUBENCH_OUT_DIR or the current dir).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the shot count (0 = exact expectation values).
    #[arg(long)]
    shots: Option<u64>,
    /// Cap the worker thread count.
    #[arg(long)]
    threads: Option<usize>,
    /// Override config values as dotted.path=json_value (repeatable).
    #[arg(long = "override", value_parser = parse_override)]
    overrides: Vec<(String, String)>,
}

fn parse_override(s: &str) -> Result<(String, String), String> {
    s.split_once('=')
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .ok_or_else(|| format!("expected key=value, got `{s}`"))
}

#[derive(Subcommand)]
enum Command {
    /// Deterministic benchmarking: four learning sequences plus tests.
    Db(RunArgs),
    /// Standard randomized benchmarking.
    Rb(RunArgs),
    /// Interleaved randomized benchmarking.
    Irb(RunArgs),
    /// Direct fidelity estimation.
    Dfe(RunArgs),
    /// Process fidelity estimation.
    Pfe(RunArgs),
    /// Cross-entropy benchmarking at fixed depths.
    Xeb(RunArgs),
    /// Random circuit sampling sweep with noise-rate fit.
    Rcs(RunArgs),
    /// Process tomography (config selects sqpt, aapt, or dcqd).
    Tomo(RunArgs),
    /// Gate set tomography.
    Gst(RunArgs),
    /// Pulse-pair sequence simulation and trajectory dumps.
    Simulate(RunArgs),
    /// Standalone curve fitting from CSV data.
    Fit(RunArgs),
    /// Re-emit plot CSVs from a results JSON.
    Plotdata {
        /// Results JSON produced by a previous run.
        #[arg(long)]
        results: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn expected_protocols(cmd: &Command) -> &'static [ProtocolId] {
    match cmd {
        Command::Db(_) => &[ProtocolId::Db],
        Command::Rb(_) => &[ProtocolId::Rb],
        Command::Irb(_) => &[ProtocolId::Irb],
        Command::Dfe(_) => &[ProtocolId::Dfe],
        Command::Pfe(_) => &[ProtocolId::Pfe],
        Command::Xeb(_) => &[ProtocolId::Xeb],
        Command::Rcs(_) => &[ProtocolId::Rcs],
        Command::Tomo(_) => &[ProtocolId::Sqpt, ProtocolId::Aapt, ProtocolId::Dcqd],
        Command::Gst(_) => &[ProtocolId::Gst],
        Command::Simulate(_) => &[ProtocolId::Simulate],
        Command::Fit(_) => &[ProtocolId::Fit],
        Command::Plotdata { .. } => &[],
    }
}

fn run(cli: Cli) -> Result<i32, qubench_core::Error> {
    if let Command::Plotdata { results, out } = &cli.command {
        let dir = qubench_cli::output_dir(out.as_deref());
        let paths = qubench_cli::emit_plotdata(results, &dir)?;
        for p in paths {
            println!("{}", p.display());
        }
        return Ok(0);
    }
    let expected = expected_protocols(&cli.command);
    let args = match &cli.command {
        Command::Db(a)
        | Command::Rb(a)
        | Command::Irb(a)
        | Command::Dfe(a)
        | Command::Pfe(a)
        | Command::Xeb(a)
        | Command::Rcs(a)
        | Command::Tomo(a)
        | Command::Gst(a)
        | Command::Simulate(a)
        | Command::Fit(a) => a.clone(),
        Command::Plotdata { .. } => unreachable!(),
    };
    if let Some(n) = args.threads {
        // best effort: the global pool may already exist
        let _ = qubench_cli::set_threads(n);
    }
    let (config, echo) =
        qubench_cli::load_config(&args.config, &args.overrides, args.seed, args.shots)?;
    if !expected.contains(&config.protocol) {
        return Err(qubench_core::Error::InvalidParameter(format!(
            "config protocol `{}` does not match the subcommand",
            config.protocol.name()
        )));
    }
    let dir = qubench_cli::output_dir(args.out.as_deref());
    let (code, results_path) = qubench_cli::execute_and_write(&config, echo, &dir)?;
    println!("{}", results_path.display());
    Ok(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
