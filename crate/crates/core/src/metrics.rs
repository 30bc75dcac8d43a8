//! Growth-state metrics.
//!
//! * YIR: `(y - y_lo_i) / Δy_i`, the position of the current output inside
//!   phase `i`'s chained output range. It is 0.5 at the peak inflection.
//! * XIR: `b_i^(α_i (x - δ_i))`, the distance of `x` from the peak on the
//!   phase's own exponential scale. It is 1 at the peak.

use serde::{Deserialize, Serialize};

use crate::error::{NlsigError, Result};
use crate::fit::{percentile, BootstrapResult};
use crate::model::{NlsigModel, EXPONENT_CLAMP};

/// XIR reported when the exponent exceeds the overflow clamp.
pub const XIR_SATURATED: f64 = 1.014_232_054_735_004_5e304;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum YirState {
    Increasing,
    Peaking,
    Reducing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum XirState {
    PrePeak,
    Peak,
    PostPeak,
    Indeterminate,
}

/// Closed intervals treated as "around the peak" for each metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakBands {
    pub yir: (f64, f64),
    pub xir: (f64, f64),
}

impl Default for PeakBands {
    fn default() -> Self {
        PeakBands { yir: (0.45, 0.55), xir: (0.9, 1.1) }
    }
}

fn check_phase(model: &NlsigModel, i: usize) -> Result<()> {
    if i >= model.len() {
        return Err(NlsigError::InvalidArgument(format!(
            "partition index {i} out of range for a {}-phase model",
            model.len()
        )));
    }
    Ok(())
}

/// Y-variable to inflection ratio of phase `i` (0-based) at `x`.
pub fn yir(model: &NlsigModel, x: f64, i: usize) -> Result<f64> {
    check_phase(model, i)?;
    let (lower, upper) = model.phase_range(i).expect("checked index");
    let dy = upper - lower;
    if dy <= 0.0 {
        return Err(NlsigError::DegeneratePartition(i));
    }
    Ok((model.eval(x) - lower) / dy)
}

/// X-variable to inflection ratio of phase `i` (0-based) at `x`. Always uses
/// the positive exponent, so values below 1 mean the peak lies ahead.
pub fn xir(model: &NlsigModel, x: f64, i: usize) -> Result<f64> {
    check_phase(model, i)?;
    let p = &model.partitions()[i];
    let exponent = p.rate() * (x - p.delta);
    Ok(if exponent > EXPONENT_CLAMP { XIR_SATURATED } else { exponent.max(-EXPONENT_CLAMP).exp() })
}

fn yir_state_of(v: f64, band: (f64, f64)) -> YirState {
    if v < band.0 {
        YirState::Increasing
    } else if v > band.1 {
        YirState::Reducing
    } else {
        YirState::Peaking
    }
}

fn xir_state_of(v: f64, band: (f64, f64)) -> XirState {
    if !v.is_finite() || v <= 0.0 {
        XirState::Indeterminate
    } else if v < band.0 {
        XirState::PrePeak
    } else if v > band.1 {
        XirState::PostPeak
    } else {
        XirState::Peak
    }
}

/// Other states whose region overlaps the interval `ci`.
fn spanned<S: PartialEq + Copy>(
    primary: S,
    ci: (f64, f64),
    band: (f64, f64),
    below: S,
    at: S,
    above: S,
) -> Vec<S> {
    let mut out = Vec::new();
    if ci.0 < band.0 {
        out.push(below);
    }
    if ci.0 <= band.1 && ci.1 >= band.0 {
        out.push(at);
    }
    if ci.1 > band.1 {
        out.push(above);
    }
    out.retain(|s| *s != primary);
    out
}

/// States read from a pair of metric estimates with their intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub yir_state: YirState,
    pub yir_alternatives: Vec<YirState>,
    pub xir_state: XirState,
    pub xir_alternatives: Vec<XirState>,
    pub summary: String,
}

fn yir_phrase(s: YirState) -> &'static str {
    match s {
        YirState::Increasing => "still increasing",
        YirState::Peaking => "peaking",
        YirState::Reducing => "decreasing",
    }
}

fn xir_phrase(s: XirState) -> &'static str {
    match s {
        XirState::PrePeak => "a pre-peak period",
        XirState::Peak => "a peak period",
        XirState::PostPeak => "a post-peak period",
        XirState::Indeterminate => "indeterminate",
    }
}

/// The point estimates pick the state; interval ends that cross a band edge
/// add the neighbouring states as alternatives.
pub fn classify(
    yir_point: f64,
    yir_ci: (f64, f64),
    xir_point: f64,
    xir_ci: (f64, f64),
    bands: &PeakBands,
) -> Classification {
    let yir_state = yir_state_of(yir_point, bands.yir);
    let yir_alternatives =
        spanned(yir_state, yir_ci, bands.yir, YirState::Increasing, YirState::Peaking, YirState::Reducing);
    let xir_state = xir_state_of(xir_point, bands.xir);
    let xir_alternatives = if xir_state == XirState::Indeterminate {
        Vec::new()
    } else {
        spanned(xir_state, xir_ci, bands.xir, XirState::PrePeak, XirState::Peak, XirState::PostPeak)
    };

    let mut summary = format!("YIR: the numbers are {}", yir_phrase(yir_state));
    for alt in &yir_alternatives {
        summary.push_str(&format!(", but may also be {}", yir_phrase(*alt)));
    }
    if xir_state == XirState::Indeterminate {
        summary.push_str(". XIR: the period is indeterminate.");
    } else {
        summary.push_str(&format!(". XIR: this time is most likely {}", xir_phrase(xir_state)));
        for alt in &xir_alternatives {
            summary.push_str(&format!(", but could also be {}", xir_phrase(*alt)));
        }
        summary.push('.');
    }

    Classification { yir_state, yir_alternatives, xir_state, xir_alternatives, summary }
}

/// Percentile intervals of YIR and XIR across bootstrap replicates.
pub fn metric_ci(boot: &BootstrapResult, x: f64, i: usize) -> Result<((f64, f64), (f64, f64))> {
    if boot.replicates.is_empty() {
        return Err(NlsigError::InvalidArgument("bootstrap result has no replicates".into()));
    }
    let yirs = boot.replicates.iter().map(|m| yir(m, x, i)).collect::<Result<Vec<_>>>()?;
    let xirs = boot.replicates.iter().map(|m| xir(m, x, i)).collect::<Result<Vec<_>>>()?;
    Ok(((percentile(&yirs, 2.5), percentile(&yirs, 97.5)), (percentile(&xirs, 2.5), percentile(&xirs, 97.5))))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub x: f64,
    /// 1-based phase index.
    pub phase: usize,
    pub yir: f64,
    pub yir_ci: (f64, f64),
    pub xir: f64,
    pub xir_ci: (f64, f64),
    #[serde(flatten)]
    pub classification: Classification,
}

/// Metrics of the phase `phase` (0-based; default: the phase containing `x`)
/// at `x`. Intervals come from `boot` when given and always contain the
/// point estimate.
pub fn metric_report(
    model: &NlsigModel,
    boot: Option<&BootstrapResult>,
    x: f64,
    phase: Option<usize>,
    bands: &PeakBands,
) -> Result<MetricReport> {
    let i = phase.unwrap_or_else(|| model.partition_containing(x));
    let y = yir(model, x, i)?;
    let z = xir(model, x, i)?;
    let (yir_ci, xir_ci) = match boot {
        Some(b) => {
            let (yc, xc) = metric_ci(b, x, i)?;
            ((yc.0.min(y), yc.1.max(y)), (xc.0.min(z), xc.1.max(z)))
        }
        None => ((y, y), (z, z)),
    };
    Ok(MetricReport {
        x,
        phase: i + 1,
        yir: y,
        yir_ci,
        xir: z,
        xir_ci,
        classification: classify(y, yir_ci, z, xir_ci, bands),
    })
}
