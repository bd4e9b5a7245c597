use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tunnel_cli::config::{parse_config, Mode};
use tunnel_cli::pipelines::run;
use tunnel_cli::CliError;

#[derive(Parser)]
#[command(
    name = "tunnel",
    version,
    about = "Wave-packet tunneling: closed forms, oracle and checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Approximate wavefunction on a grid.
    Analytic(Common),
    /// Crank–Nicolson frames.
    Oracle(Common),
    /// Oracle against the closed forms, with tolerance gates.
    Compare(Common),
    /// First three transmitted sub-packets.
    Figure1(Common),
    /// Reference checks; exits 3 if any fails.
    Validate(Common),
    /// Derived packet quantities as JSON.
    PacketInfo(Common),
}

#[derive(Args)]
struct Common {
    /// JSON configuration; missing keys take the mode defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output path prefix.
    #[arg(long)]
    out: Option<String>,
    /// `key.path=value`, value parsed as JSON or taken as a string.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Run outside the oracle-safe scenario range.
    #[arg(long)]
    force: bool,
}

fn execute(mode: Mode, args: Common) -> Result<bool, CliError> {
    let text = match &args.config {
        Some(path) => std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?,
        None => String::new(),
    };
    let mut overrides = args.overrides;
    if let Some(out) = args.out {
        overrides.push(format!("output={}", serde_json::Value::String(out)));
    }
    let config = parse_config(&text, mode, &overrides)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| CliError::Config(format!("threads: {e}")))?;
    let outcome = pool.install(|| run(&config, args.force))?;
    outcome.write()?;
    print!("{}", outcome.report);
    for (path, _) in &outcome.files {
        eprintln!("wrote {}", path.display());
    }
    Ok(outcome.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mode, args) = match cli.command {
        Command::Analytic(a) => (Mode::Analytic, a),
        Command::Oracle(a) => (Mode::Oracle, a),
        Command::Compare(a) => (Mode::Compare, a),
        Command::Figure1(a) => (Mode::Figure1, a),
        Command::Validate(a) => (Mode::Validate, a),
        Command::PacketInfo(a) => (Mode::PacketInfo, a),
    };
    match execute(mode, args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
