//! Inflection-point detection on a smoothed cumulative series.
//!
//! Peak inflections are `+ → −` sign changes of the discrete second derivative
//! (growth rate at a maximum); valley inflections are `− → +` changes.

use serde::{Deserialize, Serialize};

use super::TimeSeries;
use crate::error::{NlsigError, Result};

/// Initial phase structure for a fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InflectionGuess {
    pub n: usize,
    pub peak_locations: Vec<f64>,
    pub valley_locations: Vec<f64>,
}

impl InflectionGuess {
    pub fn new(peak_locations: Vec<f64>, valley_locations: Vec<f64>) -> Result<Self> {
        if peak_locations.is_empty() {
            return Err(NlsigError::InvalidArgument("at least one peak location is required".into()));
        }
        if peak_locations.iter().chain(&valley_locations).any(|v| !v.is_finite()) {
            return Err(NlsigError::NonFiniteData);
        }
        if peak_locations.windows(2).any(|w| w[1] <= w[0]) {
            return Err(NlsigError::InvalidArgument("peak locations must be strictly increasing".into()));
        }
        Ok(InflectionGuess { n: peak_locations.len(), peak_locations, valley_locations })
    }

    /// `n` equal sub-intervals of the series' domain, peaks at their centres.
    pub fn equal_partition(ts: &TimeSeries, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(NlsigError::InvalidArgument("n must be at least 1".into()));
        }
        let (lo, hi) = ts.domain();
        let width = (hi - lo) / n as f64;
        let peaks = (0..n).map(|i| lo + width * (i as f64 + 0.5)).collect();
        let valleys = (1..n).map(|i| lo + width * i as f64).collect();
        Self::new(peaks, valleys)
    }

    fn check_within(&self, ts: &TimeSeries) -> Result<()> {
        let (lo, hi) = ts.domain();
        if self.peak_locations.iter().any(|&p| p < lo || p > hi) {
            return Err(NlsigError::InvalidArgument(format!(
                "peak locations must lie within the data domain [{lo}, {hi}]"
            )));
        }
        Ok(())
    }
}

/// Centred moving average keeping only fully-covered positions, so the output
/// has `values.len() - window + 1` entries.
pub fn moving_average(values: &[f64], window: usize) -> Vec<f64> {
    if window == 0 || window > values.len() {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(values.len() - window + 1);
    let mut sum: f64 = values[..window].iter().sum();
    out.push(sum / window as f64);
    for i in window..values.len() {
        sum += values[i] - values[i - window];
        out.push(sum / window as f64);
    }
    out
}

/// Centred moving average that shrinks symmetrically near the ends, keeping
/// the input length.
pub(crate) fn smooth_full(values: &[f64], window: usize) -> Vec<f64> {
    let half = window / 2;
    let n = values.len();
    (0..n)
        .map(|i| {
            let h = half.min(i).min(n - 1 - i);
            let slice = &values[i - h..=i + h];
            slice.iter().sum::<f64>() / slice.len() as f64
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Peak,
    Valley,
}

#[derive(Debug, Clone, Copy)]
struct Event {
    index: usize,
    location: f64,
    kind: Kind,
}

fn validate_window(ts: &TimeSeries, window: usize) -> Result<()> {
    if ts.len() < 4 {
        return Err(NlsigError::SeriesTooShort { required: 4, actual: ts.len() });
    }
    if window == 0 || window % 2 == 0 {
        return Err(NlsigError::InvalidArgument(format!(
            "smoothing window must be a positive odd integer, got {window}"
        )));
    }
    if window > ts.len() / 2 {
        return Err(NlsigError::InvalidArgument(format!(
            "smoothing window {window} exceeds half the series length {}",
            ts.len()
        )));
    }
    Ok(())
}

/// Sign-change events of the second derivative of the smoothed series, with
/// events closer than `window` grid steps merged.
fn sign_change_events(ts: &TimeSeries, window: usize) -> Vec<Event> {
    let half = window / 2;
    let s = moving_average(ts.r(), window);
    let xs = &ts.x()[half..ts.len() - half];

    let scale = s.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let min_dx = xs.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let tol = 1e-10 * scale / (min_dx * min_dx);

    let mut raw = Vec::new();
    let mut last: Option<(usize, f64)> = None;
    for j in 1..s.len().saturating_sub(1) {
        let left = (s[j] - s[j - 1]) / (xs[j] - xs[j - 1]);
        let right = (s[j + 1] - s[j]) / (xs[j + 1] - xs[j]);
        let d2 = 2.0 * (right - left) / (xs[j + 1] - xs[j - 1]);
        if d2.abs() <= tol {
            continue;
        }
        let sign = d2.signum();
        if let Some((prev_j, prev_sign)) = last {
            if sign != prev_sign {
                raw.push(Event {
                    index: j,
                    location: 0.5 * (xs[prev_j] + xs[j]),
                    kind: if prev_sign > 0.0 { Kind::Peak } else { Kind::Valley },
                });
            }
        }
        last = Some((j, sign));
    }

    // Merge clusters of nearby events; a cluster's net sign change decides
    // whether it survives as a peak, a valley, or cancels out.
    let mut merged = Vec::new();
    let mut start = 0;
    while start < raw.len() {
        let mut end = start;
        while end + 1 < raw.len() && raw[end + 1].index - raw[end].index < window {
            end += 1;
        }
        let group = &raw[start..=end];
        let first = group[0].kind;
        let last = group[group.len() - 1].kind;
        if first == last {
            let location = group.iter().map(|e| e.location).sum::<f64>() / group.len() as f64;
            merged.push(Event { index: group[0].index, location, kind: first });
        }
        start = end + 1;
    }
    merged
}

/// Counts peak inflections of the smoothed series. With no peak sign change
/// the result is a single phase peaking at the domain midpoint.
pub fn detect_inflections(ts: &TimeSeries, smooth_window: usize) -> Result<InflectionGuess> {
    validate_window(ts, smooth_window)?;
    let events = sign_change_events(ts, smooth_window);
    let peaks: Vec<f64> = events.iter().filter(|e| e.kind == Kind::Peak).map(|e| e.location).collect();
    let valleys: Vec<f64> = events.iter().filter(|e| e.kind == Kind::Valley).map(|e| e.location).collect();
    let guess = if peaks.is_empty() {
        let (lo, hi) = ts.domain();
        InflectionGuess::new(vec![0.5 * (lo + hi)], valleys)?
    } else {
        InflectionGuess::new(peaks, valleys)?
    };
    guess.check_within(ts)?;
    Ok(guess)
}

/// Like [`detect_inflections`] but for a known phase count: widens the
/// smoothing window until exactly `n` peaks remain, falling back to an equal
/// partition of the domain.
pub fn detect_with_count(ts: &TimeSeries, smooth_window: usize, n: usize) -> Result<InflectionGuess> {
    if n == 0 {
        return Err(NlsigError::InvalidArgument("n must be at least 1".into()));
    }
    validate_window(ts, smooth_window)?;
    let mut window = smooth_window;
    while window <= ts.len() / 2 {
        let guess = detect_inflections(ts, window)?;
        if guess.n == n {
            return Ok(guess);
        }
        window = 2 * window + 1;
    }
    InflectionGuess::equal_partition(ts, n)
}
