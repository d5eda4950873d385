use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use fraclap::harness::{emit_report, exit_status, run_suite, set_threads, Format, ScenarioConfig, Suite};

/// Environment variable holding the work-pool width.
const THREADS_VAR: &str = "FRACLAP_THREADS";

#[derive(Parser)]
#[command(name = "fraclap", version, about = "Comparison suites for fractional Laplacians on bounded domains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Run one suite from a scenario config and write its report
    Run {
        #[arg(long)]
        suite: String,
        #[arg(long)]
        config: PathBuf,
        /// report path; stdout when absent and the config names none
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
    },
    /// Special-function and quadrature self checks
    Selftest {
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn configure_pool() -> Result<()> {
    if let Ok(v) = std::env::var(THREADS_VAR) {
        let n: usize = v.trim().parse().with_context(|| format!("{THREADS_VAR}={v} is not a thread count"))?;
        if n > 0 {
            set_threads(n)?;
        }
    }
    Ok(())
}

fn real_main() -> Result<i32> {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            e.print()?;
            return Ok(0);
        }
        // usage errors exit 1; 2 is reserved for inconclusive reports
        Err(e) => {
            e.print()?;
            return Ok(1);
        }
    };
    configure_pool()?;
    let (cfg, out, format) = match cli.command {
        Command::Run { suite, config, out, format } => {
            let suite: Suite = suite.parse()?;
            let cfg = ScenarioConfig::from_file(&config).with_context(|| format!("reading {}", config.display()))?;
            if cfg.suite != suite {
                anyhow::bail!("{} names suite {}, but --suite is {}", config.display(), cfg.suite.name(), suite.name());
            }
            let out = out.or_else(|| cfg.out.clone());
            let format = format.map(into_format).unwrap_or(cfg.format);
            (cfg, out, format)
        }
        Command::Selftest { format, out } => (ScenarioConfig::new(Suite::SpecfunSelftest), out, into_format(format)),
    };
    let rows = run_suite(&cfg)?;
    emit_report(&rows, format, out.as_deref())?;
    Ok(exit_status(&rows, cfg.inconclusive_allowed))
}

fn into_format(f: FormatArg) -> Format {
    match f {
        FormatArg::Csv => Format::Csv,
        FormatArg::Json => Format::Json,
    }
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
