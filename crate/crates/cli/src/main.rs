use std::path::PathBuf;
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};
use nlsig::Sign;
use nlsig_cli::{run_to_dir, CliError, Format, IngestConfig, PhaseCount, RunOptions, Selector, SeriesKind};

#[derive(Parser, Debug)]
#[command(name = "nlsig", version, about = "Fit multi-phase logistic growth curves to cumulative series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit a series and write report.json and plot.csv
    Fit(FitArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Direction {
    Increasing,
    Decreasing,
}

#[derive(Args, Debug)]
struct FitArgs {
    /// Input CSV file
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::WhoDaily)]
    format: Format,
    /// Country code for who_daily input; WORLD sums all countries
    #[arg(long, default_value = "WORLD")]
    country: String,
    #[arg(long, value_enum, default_value_t = SeriesKind::Infections)]
    series: SeriesKind,
    /// x column for generic_xy input
    #[arg(long, default_value = "x")]
    x_col: String,
    /// y column for generic_xy input
    #[arg(long, default_value = "y")]
    y_col: String,
    /// Day 0 for who_daily input (YYYY-MM-DD); defaults to the first positive value
    #[arg(long)]
    origin: Option<NaiveDate>,
    /// Number of phases: `auto` or a positive integer
    #[arg(long, default_value = "auto")]
    n: PhaseCount,
    /// Bootstrap replicates (0 disables)
    #[arg(long, default_value_t = 200)]
    bootstrap: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Odd moving-average window used for inflection detection
    #[arg(long, default_value_t = 7)]
    window: usize,
    #[arg(long, value_enum, default_value_t = Direction::Increasing)]
    direction: Direction,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
}

fn fit(args: FitArgs) -> Result<(), CliError> {
    let selector = match args.format {
        Format::WhoDaily => Selector::WhoDaily { country: args.country, series: args.series },
        Format::GenericXy => Selector::GenericXy { x_col: args.x_col, y_col: args.y_col },
    };
    let cfg = IngestConfig { input: args.input, selector, origin: args.origin };
    let opts = RunOptions {
        n: args.n,
        smooth_window: args.window,
        bootstrap: args.bootstrap,
        seed: args.seed,
        sign: match args.direction {
            Direction::Increasing => Sign::Increasing,
            Direction::Decreasing => Sign::Decreasing,
        },
    };
    let (output, written) = run_to_dir(&cfg, &opts, &args.out)?;
    for w in &output.report.warnings {
        eprintln!("warning: {w}");
    }
    let report = &output.report;
    println!(
        "{}: n = {}, R² = {:.6}, {}",
        report.series.label, report.fit.n, report.fit.r_squared, report.metrics.classification.summary
    );
    eprintln!("wrote {} and {}", written.report.display(), written.plot.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Fit(args) => fit(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
