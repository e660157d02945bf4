use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use yamabe_cli::config::keys_help;
use yamabe_cli::{commands, report, CliError, Outcome, RunConfig};

/// Verification toolkit for blow-up profiles of the critical Yamabe equation.
///
/// Exit codes: 0 all checks pass, 1 a check failed, 2 configuration or
/// precondition error.
#[derive(Parser)]
#[command(name = "yamabe", version, after_help = keys_help())]
struct Cli {
    /// Plain-text `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<String>,
    /// Override a configuration key (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
    /// Dimension n.
    #[arg(long, global = true)]
    dim: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a radial family and write its CSV and bound-check JSON.
    Solve(SolveArgs),
    /// f2 envelopes and comparison-function signs.
    Bounds,
    /// Dimension-gate table.
    Gate(GateArgs),
    /// Exact sphere moments and ladder constants.
    Moments,
    /// Generate or validate curvature jets.
    #[command(subcommand)]
    Jet(JetCommand),
    /// Build the three-term profile and fit its PDE residual.
    Profile(ProfileArgs),
    /// Evaluate the Pohozaev balance.
    Pohozaev(PohozaevArgs),
    /// Aggregated verification report.
    Report(ReportArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// f2, f3, f2lambda or fpl.
    #[arg(long)]
    profile: Option<String>,
    #[arg(long)]
    l: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
}

#[derive(Args)]
struct GateArgs {
    #[arg(long)]
    from: Option<usize>,
    #[arg(long)]
    to: Option<usize>,
    /// Decimal or `p/q`.
    #[arg(long)]
    eps: Option<String>,
}

#[derive(Subcommand)]
enum JetCommand {
    Generate {
        #[arg(long)]
        seed: Option<u64>,
        /// general or hypothesis.
        #[arg(long)]
        mode: Option<String>,
        /// Write here instead of stdout.
        #[arg(long)]
        output: Option<String>,
    },
    Validate {
        file: String,
    },
}

#[derive(Args)]
struct ProfileArgs {
    #[arg(long)]
    jet: Option<String>,
    #[arg(long)]
    height: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
#[group(required = true, multiple = false, id = "field")]
struct FieldArgs {
    /// Directory holding f2.csv and f3.csv from `solve`.
    #[arg(long, group = "field")]
    profile: Option<String>,
    /// Use the standard bubble.
    #[arg(long, group = "field")]
    bubble: bool,
}

#[derive(Args)]
struct PohozaevArgs {
    #[arg(long)]
    jet: Option<String>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    height: Option<f64>,
    #[command(flatten)]
    field: FieldArgs,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    jet: Option<String>,
    /// json or md on stdout; both files are always written.
    #[arg(long)]
    format: Option<String>,
}

fn set_opt(cfg: &mut RunConfig, key: &str, v: Option<impl ToString>) -> Result<(), CliError> {
    match v {
        Some(v) => cfg.set(key, v.to_string()),
        None => Ok(()),
    }
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::config(format!("{path}: {e}")))?;
        cfg.merge_file(&text, path)?;
    }
    for pair in &cli.set {
        cfg.set_pair(pair)?;
    }
    set_opt(&mut cfg, "dim", cli.dim)?;
    set_opt(&mut cfg, "out", cli.out.as_ref())?;
    match cli.command {
        Command::Solve(a) => {
            set_opt(&mut cfg, "family", a.profile)?;
            set_opt(&mut cfg, "l", a.l)?;
            set_opt(&mut cfg, "lambda", a.lambda)?;
            commands::cmd_solve(&cfg)
        }
        Command::Bounds => commands::cmd_bounds(&cfg),
        Command::Gate(a) => {
            set_opt(&mut cfg, "gate.from", a.from)?;
            set_opt(&mut cfg, "gate.to", a.to)?;
            set_opt(&mut cfg, "gate.eps", a.eps)?;
            commands::cmd_gate(&cfg)
        }
        Command::Moments => commands::cmd_moments(&cfg),
        Command::Jet(JetCommand::Generate { seed, mode, output }) => {
            set_opt(&mut cfg, "seed", seed)?;
            set_opt(&mut cfg, "mode", mode)?;
            commands::cmd_jet_generate(&cfg, output.as_deref())
        }
        Command::Jet(JetCommand::Validate { file }) => commands::cmd_jet_validate(&file),
        Command::Profile(a) => {
            set_opt(&mut cfg, "jet", a.jet)?;
            set_opt(&mut cfg, "height", a.height)?;
            set_opt(&mut cfg, "seed", a.seed)?;
            commands::cmd_profile(&cfg)
        }
        Command::Pohozaev(a) => {
            set_opt(&mut cfg, "jet", a.jet)?;
            set_opt(&mut cfg, "radius", a.radius)?;
            set_opt(&mut cfg, "height", a.height)?;
            let dir = if a.field.bubble { None } else { a.field.profile };
            commands::cmd_pohozaev(&cfg, dir.as_deref())
        }
        Command::Report(a) => {
            set_opt(&mut cfg, "seed", a.seed)?;
            set_opt(&mut cfg, "jet", a.jet)?;
            set_opt(&mut cfg, "format", a.format)?;
            report::cmd_report(&cfg)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { yamabe_cli::EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(out.stdout.as_bytes());
            ExitCode::from(out.exit_code())
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
