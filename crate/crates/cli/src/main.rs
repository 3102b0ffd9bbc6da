use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::parser::ValueSource;
use clap::{ArgMatches, CommandFactory, FromArgMatches, Parser, Subcommand};

mod commands;
mod config;
mod report;

use config::Settings;
use report::Report;

/// Genus-one quadratic centers: classification, Abelian integrals, zero
/// counting and limit-cycle cross-checks.
#[derive(Parser, Debug)]
#[command(name = "melnikov", version)]
struct Cli {
    /// Settings file (key = value, with [command] and [tol] sections).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// json or csv.
    #[arg(long, global = true)]
    format: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override a tolerance, e.g. --tol quad_rel=1e-10. Repeatable.
    #[arg(long = "tol", global = true, value_name = "NAME=VALUE")]
    tol: Vec<String>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Classify a reversible center (a, b) or a Lotka-Volterra center (A, B).
    Classify {
        #[arg(long, allow_hyphen_values = true)]
        a: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        b: Option<String>,
        /// Classify the complex Lotka-Volterra parameters instead.
        #[arg(long)]
        lv: bool,
        #[arg(long = "A", id = "A", allow_hyphen_values = true)]
        big_a: Option<String>,
        #[arg(long = "B", id = "B", allow_hyphen_values = true)]
        big_b: Option<String>,
    },
    /// Generating functions I and J, and moments, at one level.
    Integrate {
        #[arg(long)]
        case: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        b: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        t: Option<String>,
        /// Comma-separated weights.
        #[arg(long, allow_hyphen_values = true)]
        mu: Option<String>,
        /// Comma-separated moment indices.
        #[arg(long, allow_hyphen_values = true)]
        k: Option<String>,
    },
    /// Residuals of the moment recurrence and derivative identities.
    PfCheck {
        #[arg(long)]
        case: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        b: Option<String>,
        /// Number of levels in the annulus.
        #[arg(long)]
        points: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        kmin: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        kmax: Option<String>,
        /// Level span used when the annulus is unbounded.
        #[arg(long)]
        span: Option<String>,
    },
    /// Zeros of I or J for one weight vector.
    Zeros {
        #[arg(long)]
        case: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        b: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        mu: Option<String>,
        /// i or j.
        #[arg(long)]
        which: Option<String>,
        #[arg(long)]
        grid: Option<String>,
    },
    /// Zero counts of J over seeded random weights.
    Sweep {
        #[arg(long)]
        case: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        b: Option<String>,
        #[arg(long)]
        n: Option<String>,
        #[arg(long)]
        grid: Option<String>,
    },
    /// Power-law fits of J_k near the outer boundary.
    Asympt {
        #[arg(long)]
        case: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        b: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        k: Option<String>,
        /// Two distances to the boundary, comma-separated.
        #[arg(long)]
        window: Option<String>,
        #[arg(long)]
        points: Option<String>,
    },
    /// Integer identities between the monodromy matrices.
    Monodromy {
        /// fib_5_3 or fib_5_4; both when omitted.
        #[arg(long)]
        fibration: Option<String>,
    },
    /// Simulated first-return map against the generating function.
    Crosscheck {
        /// Three weights; a two-level witness when omitted.
        #[arg(long, allow_hyphen_values = true)]
        mu: Option<String>,
        #[arg(long)]
        epsilon: Option<String>,
        /// Levels compared against I.
        #[arg(long)]
        levels: Option<String>,
        /// Levels scanned for cycles.
        #[arg(long)]
        grid: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        witness_levels: Option<String>,
        #[arg(long)]
        order_epsilons: Option<String>,
    },
}

fn defaults(cmd: &str) -> &'static [(&'static str, &'static str)] {
    match cmd {
        "pf-check" => &[("points", "10"), ("span", "10")],
        "zeros" => &[("which", "j"), ("grid", "256")],
        "sweep" => &[("n", "2000"), ("seed", "42"), ("grid", "256")],
        "asympt" => &[("case", "r18"), ("window", "1e-5,1e-2"), ("points", "31")],
        "crosscheck" => &[
            ("epsilon", "1e-3"),
            ("levels", "10"),
            ("grid", "48"),
            ("witness_levels", "-0.12,-0.05"),
            ("order_epsilons", "1e-2,1e-3,1e-4"),
        ],
        _ => &[],
    }
}

/// Values typed on the command line, keyed by argument id.
fn explicit(cmd: &clap::Command, m: &ArgMatches, skip: &[&str]) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    for arg in cmd.get_arguments() {
        let id = arg.get_id().as_str();
        if skip.contains(&id) || m.value_source(id) != Some(ValueSource::CommandLine) {
            continue;
        }
        if let Ok(Some(raw)) = m.try_get_raw(id) {
            let vals: Vec<String> = raw.map(|v| v.to_string_lossy().into_owned()).collect();
            out.insert(id.to_string(), vals.join(","));
        }
    }
    out
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("MELNIKOV_THREADS") {
        let n: usize = v.parse().with_context(|| format!("MELNIKOV_THREADS='{v}'"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run() -> Result<bool> {
    init_threads()?;
    let command = Cli::command();
    let matches = command.clone().get_matches();
    let cli = Cli::from_arg_matches(&matches)?;
    let (name, sub) = matches.subcommand().expect("a subcommand is required");
    let skip = ["config", "tol", "help", "version"];
    let mut flags = explicit(&command, &matches, &skip);
    flags.extend(explicit(command.find_subcommand(name).expect("parsed subcommand"), sub, &skip));
    let settings = Settings::merge(name, defaults(name), cli.config.as_deref(), flags, &cli.tol)?;
    let outcome = match cli.cmd {
        Cmd::Classify { .. } => commands::classify(&settings)?,
        Cmd::Integrate { .. } => commands::integrate(&settings)?,
        Cmd::PfCheck { .. } => commands::pf_check(&settings)?,
        Cmd::Zeros { .. } => commands::zeros(&settings)?,
        Cmd::Sweep { .. } => commands::sweep(&settings)?,
        Cmd::Asympt { .. } => commands::asympt(&settings)?,
        Cmd::Monodromy { .. } => commands::monodromy(&settings)?,
        Cmd::Crosscheck { .. } => commands::crosscheck(&settings)?,
    };
    let report = Report {
        command: name.to_string(),
        config: settings.effective(),
        config_hash: settings.hash(),
        seed: settings.seed()?,
        outcome,
    };
    let text = match settings.get("format").unwrap_or("json") {
        "json" => serde_json::to_string_pretty(&report.to_json())? + "\n",
        "csv" => report.to_csv(),
        f => bail!("unknown format '{f}' (json or csv)"),
    };
    match settings.get("out") {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {p}"))?,
        None => print!("{text}"),
    }
    let failures = report.failures();
    if !failures.is_empty() {
        eprintln!("failed checks: {}", serde_json::to_string(&failures)?);
    }
    Ok(failures.is_empty())
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
