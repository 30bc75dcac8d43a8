//! Residual-resampling bootstrap around a fitted curve.
//!
//! Each replicate refits `r*_d = y_d + e*_d`, where `e*` is drawn with
//! replacement from the fitted residuals. Replicate `k` draws from ChaCha
//! stream `k` of the run seed, so serial and parallel runs agree exactly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{fit_from, FitResult, TimeSeries};
use crate::error::{NlsigError, Result};
use crate::model::NlsigModel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapOptions {
    pub replicates: usize,
    pub seed: u64,
    /// Abort when more than this fraction of replicate fits fail.
    pub max_failure_rate: f64,
    pub parallel: bool,
}

impl Default for BootstrapOptions {
    fn default() -> Self {
        BootstrapOptions { replicates: 200, seed: 0, max_failure_rate: 0.2, parallel: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    pub replicates: Vec<NlsigModel>,
    /// 2.5th percentile of each hyper-parameter, in [`NlsigModel::parameters`] order.
    pub ci_lower: Vec<f64>,
    /// 97.5th percentile of each hyper-parameter.
    pub ci_upper: Vec<f64>,
    pub seed: u64,
    /// Replicates whose refit failed or did not converge.
    pub failed: usize,
}

impl BootstrapResult {
    /// `(2.5%, 97.5%)` percentiles of `f` over the replicates.
    pub fn interval<F: Fn(&NlsigModel) -> f64>(&self, f: F) -> (f64, f64) {
        let values: Vec<f64> = self.replicates.iter().map(f).collect();
        (percentile(&values, 2.5), percentile(&values, 97.5))
    }
}

/// Linearly interpolated percentile (`q` in `[0, 100]`) of unsorted values.
/// Returns NaN for an empty slice.
pub fn percentile(values: &[f64], q: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let pos = (q / 100.0).clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

fn replicate(
    ts: &TimeSeries,
    fitted: &FitResult,
    fitted_y: &[f64],
    seed: u64,
    k: usize,
) -> Option<NlsigModel> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k as u64);
    let d = fitted.residuals.len();
    let r: Vec<f64> = fitted_y.iter().map(|y| y + fitted.residuals[rng.random_range(0..d)]).collect();
    let refit = fit_from(&ts.with_values(r), &fitted.model, &fitted.options).ok()?;
    refit.converged.then_some(refit.model)
}

pub fn bootstrap(ts: &TimeSeries, fitted: &FitResult, opts: &BootstrapOptions) -> Result<BootstrapResult> {
    if !fitted.converged {
        return Err(NlsigError::InvalidArgument("bootstrap requires a converged fit".into()));
    }
    if opts.replicates < 2 {
        return Err(NlsigError::InvalidArgument("bootstrap needs at least 2 replicates".into()));
    }
    if fitted.residuals.len() != ts.len() {
        return Err(NlsigError::DimensionMismatch { expected: ts.len(), actual: fitted.residuals.len() });
    }
    let fitted_y: Vec<f64> = ts.x().iter().map(|&x| fitted.model.eval(x)).collect();
    let run = |k: usize| replicate(ts, fitted, &fitted_y, opts.seed, k);
    let outcomes: Vec<Option<NlsigModel>> = if opts.parallel {
        (0..opts.replicates).into_par_iter().map(run).collect()
    } else {
        (0..opts.replicates).map(run).collect()
    };

    let total = outcomes.len();
    let replicates: Vec<NlsigModel> = outcomes.into_iter().flatten().collect();
    let failed = total - replicates.len();
    if failed as f64 > opts.max_failure_rate * total as f64 || replicates.len() < 2 {
        return Err(NlsigError::BootstrapFailure { failed, total });
    }

    let params: Vec<Vec<f64>> = replicates.iter().map(NlsigModel::parameters).collect();
    let width = params[0].len();
    let column = |j: usize| params.iter().map(|p| p[j]).collect::<Vec<f64>>();
    let ci_lower = (0..width).map(|j| percentile(&column(j), 2.5)).collect();
    let ci_upper = (0..width).map(|j| percentile(&column(j), 97.5)).collect();

    Ok(BootstrapResult { replicates, ci_lower, ci_upper, seed: opts.seed, failed })
}
