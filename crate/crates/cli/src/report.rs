//! JSON fit report and CSV plot data.
//!
//! Every map in the report is a struct, so keys serialize in declaration
//! order and identical inputs give identical bytes.

use std::path::Path;

use nlsig::{BootstrapResult, FitResult, MetricReport, NlsigModel, Partition, Sign, PARAMS_PER_PARTITION};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};
use crate::ingest::Selector;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    /// `[2.5%, 97.5%]` bootstrap percentiles, absent without a bootstrap.
    pub ci: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionBlock {
    /// 1-based phase number.
    pub phase: usize,
    pub base: Estimate,
    pub lambda: Estimate,
    pub x_max: Estimate,
    pub x_min: Estimate,
    pub delta: Estimate,
    pub y_max: Estimate,
    pub y_min: Estimate,
}

impl PartitionBlock {
    fn new(phase: usize, p: &Partition, ci: Option<(&[f64], &[f64])>) -> Self {
        let values = p.to_array();
        let est = |j: usize| Estimate { value: values[j], ci: ci.map(|(lo, hi)| [lo[j], hi[j]]) };
        PartitionBlock {
            phase,
            base: est(0),
            lambda: est(1),
            x_max: est(2),
            x_min: est(3),
            delta: est(4),
            y_max: est(5),
            y_min: est(6),
        }
    }

    pub fn partition(&self) -> Partition {
        Partition::from_array([
            self.base.value,
            self.lambda.value,
            self.x_max.value,
            self.x_min.value,
            self.delta.value,
            self.y_max.value,
            self.y_min.value,
        ])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitSummary {
    pub n: usize,
    pub sign: Sign,
    pub r_squared: f64,
    pub converged: bool,
    pub iterations: usize,
    pub objective: f64,
    pub partitions: Vec<PartitionBlock>,
}

impl FitSummary {
    pub fn new(fit: &FitResult, boot: Option<&BootstrapResult>) -> Self {
        let partitions = fit
            .model
            .partitions()
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let span = i * PARAMS_PER_PARTITION..(i + 1) * PARAMS_PER_PARTITION;
                let ci = boot.map(|b| (&b.ci_lower[span.clone()], &b.ci_upper[span]));
                PartitionBlock::new(i + 1, p, ci)
            })
            .collect();
        FitSummary {
            n: fit.model.len(),
            sign: fit.model.sign(),
            r_squared: fit.r_squared,
            converged: fit.converged,
            iterations: fit.iterations,
            objective: fit.objective,
            partitions,
        }
    }

    /// The fitted model as written in the report.
    pub fn model(&self) -> nlsig::Result<NlsigModel> {
        NlsigModel::new(self.partitions.iter().map(PartitionBlock::partition).collect(), self.sign)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesInfo {
    pub label: String,
    #[serde(flatten)]
    pub selector: Selector,
    pub points: usize,
    pub x_first: f64,
    pub x_last: f64,
    /// Calendar date of `x = 0` (`YYYY-MM-DD`) for date-indexed input.
    pub origin: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BootstrapInfo {
    pub requested: usize,
    pub succeeded: usize,
    pub failed: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Settings {
    /// `"auto"` or the forced phase count.
    pub n: String,
    pub smooth_window: usize,
    pub bootstrap: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub input_sha256: String,
    pub seed: u64,
    pub tool: String,
    pub version: String,
}

impl Provenance {
    pub fn new(input: &[u8], seed: u64) -> Self {
        Provenance {
            input_sha256: hex::encode(Sha256::digest(input)),
            seed,
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub series: SeriesInfo,
    pub settings: Settings,
    pub fit: FitSummary,
    /// Growth-state metrics at the last observation.
    pub metrics: MetricReport,
    pub bootstrap: Option<BootstrapInfo>,
    pub warnings: Vec<String>,
    pub provenance: Provenance,
}

impl FitReport {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)
            .map_err(|source| CliError::Write { path: path.to_path_buf(), source })
    }
}

/// One row of the plot file.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotRow {
    pub x: f64,
    pub y_fit: f64,
    pub g_fit: f64,
    /// Pointwise 2.5% / 97.5% of the replicate curves.
    pub band: Option<(f64, f64)>,
    pub r_observed: f64,
}

pub const PLOT_HEADER: [&str; 6] = ["x", "y_fit", "g_fit", "y_ci_lower", "y_ci_upper", "r_observed"];

pub fn plot_rows(model: &NlsigModel, boot: Option<&BootstrapResult>, x: &[f64], r: &[f64]) -> Vec<PlotRow> {
    x.iter()
        .zip(r)
        .map(|(&xv, &rv)| {
            let band = boot.map(|b| b.interval(|m| m.eval(xv)));
            PlotRow { x: xv, y_fit: model.eval(xv), g_fit: model.eval_d1(xv), band, r_observed: rv }
        })
        .collect()
}

pub fn write_plot(path: &Path, rows: &[PlotRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(PLOT_HEADER)?;
    for row in rows {
        let (lo, hi) = match row.band {
            Some((lo, hi)) => (lo.to_string(), hi.to_string()),
            None => (String::new(), String::new()),
        };
        w.write_record([
            row.x.to_string(),
            row.y_fit.to_string(),
            row.g_fit.to_string(),
            lo,
            hi,
            row.r_observed.to_string(),
        ])?;
    }
    w.flush().map_err(|source| CliError::Write { path: path.to_path_buf(), source })
}
