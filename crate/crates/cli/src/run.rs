use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nlsig::fit::detect_with_count;
use nlsig::{
    bootstrap, detect_inflections, fit, metric_report, BootstrapOptions, FitOptions, NlsigError, PeakBands,
    Sign,
};

use crate::error::{CliError, Result};
use crate::ingest::{ingest, IngestConfig, Ingested};
use crate::report::{
    plot_rows, write_plot, BootstrapInfo, FitReport, FitSummary, PlotRow, Provenance, SeriesInfo, Settings,
};

pub const REPORT_FILE: &str = "report.json";
pub const PLOT_FILE: &str = "plot.csv";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhaseCount {
    #[default]
    Auto,
    Fixed(usize),
}

impl FromStr for PhaseCount {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(PhaseCount::Auto);
        }
        match s.parse::<usize>() {
            Ok(k) if k >= 1 => Ok(PhaseCount::Fixed(k)),
            _ => Err(format!("expected `auto` or a positive integer, got `{s}`")),
        }
    }
}

impl fmt::Display for PhaseCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhaseCount::Auto => f.write_str("auto"),
            PhaseCount::Fixed(k) => write!(f, "{k}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub n: PhaseCount,
    pub smooth_window: usize,
    /// Bootstrap replicates; 0 disables the bootstrap.
    pub bootstrap: usize,
    pub seed: u64,
    pub sign: Sign,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { n: PhaseCount::Auto, smooth_window: 7, bootstrap: 200, seed: 0, sign: Sign::Increasing }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub report: FitReport,
    pub plot: Vec<PlotRow>,
}

/// Errors caused by the data rather than by the optimizer.
fn classify(e: NlsigError) -> CliError {
    match e {
        NlsigError::DegenerateData
        | NlsigError::SeriesTooShort { .. }
        | NlsigError::NonFiniteData
        | NlsigError::InvalidSeries(_) => CliError::Series(e),
        other => CliError::Fit(other),
    }
}

/// Detect, fit, bootstrap and evaluate metrics on an ingested series.
pub fn run_fit(data: &Ingested, cfg: &IngestConfig, opts: &RunOptions) -> Result<RunOutput> {
    if opts.smooth_window % 2 == 0 {
        return Err(CliError::Usage(format!("--window must be odd, got {}", opts.smooth_window)));
    }
    if opts.bootstrap == 1 {
        return Err(CliError::Usage("--bootstrap needs 0 (off) or at least 2 replicates".into()));
    }
    let ts = &data.series;
    let mut warnings = data.warnings.clone();

    let guess = match opts.n {
        PhaseCount::Auto => detect_inflections(ts, opts.smooth_window),
        PhaseCount::Fixed(k) => detect_with_count(ts, opts.smooth_window, k),
    }
    .map_err(classify)?;
    let fit_opts = FitOptions { sign: opts.sign, smooth_window: opts.smooth_window, ..FitOptions::default() };
    let fitted = fit(ts, &guess, &fit_opts).map_err(classify)?;
    if !fitted.converged {
        warnings.push(format!("fit did not converge within {} iterations", fit_opts.max_iterations));
    }

    let boot = if opts.bootstrap == 0 {
        None
    } else if !fitted.converged {
        warnings.push("bootstrap skipped because the fit did not converge".into());
        None
    } else {
        let b_opts = BootstrapOptions { replicates: opts.bootstrap, seed: opts.seed, ..Default::default() };
        Some(bootstrap(ts, &fitted, &b_opts).map_err(CliError::Fit)?)
    };

    let (x_first, x_last) = ts.domain();
    let metrics = metric_report(&fitted.model, boot.as_ref(), x_last, None, &PeakBands::default())
        .map_err(CliError::Fit)?;

    let report = FitReport {
        series: SeriesInfo {
            label: data.label.clone(),
            selector: cfg.selector.clone(),
            points: ts.len(),
            x_first,
            x_last,
            origin: data.origin.map(|d| d.format("%Y-%m-%d").to_string()),
        },
        settings: Settings {
            n: opts.n.to_string(),
            smooth_window: opts.smooth_window,
            bootstrap: opts.bootstrap,
        },
        fit: FitSummary::new(&fitted, boot.as_ref()),
        metrics,
        bootstrap: boot.as_ref().map(|b| BootstrapInfo {
            requested: opts.bootstrap,
            succeeded: b.replicates.len(),
            failed: b.failed,
            seed: b.seed,
        }),
        warnings,
        provenance: Provenance::new(&data.bytes, opts.seed),
    };
    let plot = plot_rows(&fitted.model, boot.as_ref(), ts.x(), ts.r());
    Ok(RunOutput { report, plot })
}

/// Paths of the files written by [`run_to_dir`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Written {
    pub report: PathBuf,
    pub plot: PathBuf,
}

/// Ingest `cfg`, run the pipeline and write `report.json` and `plot.csv`
/// into `out`, creating it if needed.
pub fn run_to_dir(cfg: &IngestConfig, opts: &RunOptions, out: &Path) -> Result<(RunOutput, Written)> {
    let data = ingest(cfg)?;
    let output = run_fit(&data, cfg, opts)?;
    std::fs::create_dir_all(out).map_err(|source| CliError::Write { path: out.to_path_buf(), source })?;
    let written = Written { report: out.join(REPORT_FILE), plot: out.join(PLOT_FILE) };
    output.report.write(&written.report)?;
    write_plot(&written.plot, &output.plot)?;
    Ok((output, written))
}
