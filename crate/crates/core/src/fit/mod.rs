//! Fitting a model to a cumulative time series.
//!
//! The pipeline is: [`detect_inflections`] for the phase count and initial
//! peak locations, [`fit`] (bounded Levenberg-Marquardt on the analytic
//! Jacobian), then [`bootstrap`] for percentile intervals.

mod bootstrap;
mod detect;
mod solver;
mod transform;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

pub use bootstrap::{bootstrap, percentile, BootstrapOptions, BootstrapResult};
pub use detect::{detect_inflections, detect_with_count, moving_average, InflectionGuess};
pub use transform::FreeMask;

use crate::calculus::model_partials;
use crate::error::{NlsigError, Result};
use crate::model::{NlsigModel, Partition, Sign, PARAMS_PER_PARTITION};
use solver::{LeastSquaresProblem, LmSettings};
use transform::Parameterization;

/// Minimum number of observations accepted by [`fit`].
pub const MIN_FIT_POINTS: usize = 8;

/// Observed cumulative values `r` on a strictly increasing grid `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    x: Vec<f64>,
    r: Vec<f64>,
}

impl TimeSeries {
    pub fn new(x: Vec<f64>, r: Vec<f64>) -> Result<Self> {
        if x.len() != r.len() {
            return Err(NlsigError::DimensionMismatch { expected: x.len(), actual: r.len() });
        }
        if x.is_empty() {
            return Err(NlsigError::SeriesTooShort { required: 1, actual: 0 });
        }
        if x.iter().chain(&r).any(|v| !v.is_finite()) {
            return Err(NlsigError::NonFiniteData);
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(NlsigError::InvalidSeries("x must be strictly increasing".into()));
        }
        Ok(TimeSeries { x, r })
    }

    /// Samples `model` at every grid point.
    pub fn from_model(model: &NlsigModel, x: Vec<f64>) -> Result<Self> {
        let r = x.iter().map(|&v| model.eval(v)).collect();
        Self::new(x, r)
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// `(x_1, x_D)`
    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    fn with_values(&self, r: Vec<f64>) -> Self {
        TimeSeries { x: self.x.clone(), r }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub mask: FreeMask,
    /// `x_min` of each later phase follows `x_max` of the previous one.
    pub chain_x: bool,
    /// `y_min` of each later phase follows `y_max` of the previous one.
    pub chain_y: bool,
    pub sign: Sign,
    /// Base for every partition of the initial model.
    pub base: f64,
    pub initial_lambda: f64,
    /// Window for the smoothed plateau levels used as initial `y_max`.
    pub smooth_window: usize,
    pub max_iterations: usize,
    pub initial_damping: f64,
    pub step_tolerance: f64,
    pub objective_tolerance: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            mask: FreeMask::default(),
            chain_x: true,
            chain_y: true,
            sign: Sign::Increasing,
            base: std::f64::consts::E,
            initial_lambda: 6.0,
            smooth_window: 7,
            max_iterations: 500,
            initial_damping: 1e-3,
            step_tolerance: 1e-10,
            objective_tolerance: 1e-12,
        }
    }
}

impl FitOptions {
    fn lm(&self) -> LmSettings {
        LmSettings {
            max_iterations: self.max_iterations,
            initial_damping: self.initial_damping,
            step_tolerance: self.step_tolerance,
            objective_tolerance: self.objective_tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: NlsigModel,
    /// `e_d = r_d - y_d`
    pub residuals: Vec<f64>,
    pub r_squared: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Final `E = ½ Σ e_d²`.
    pub objective: f64,
    /// `E` at the start and after each accepted step.
    pub objective_history: Vec<f64>,
    pub options: FitOptions,
}

/// `1 - Σe² / Σ(r - mean r)²`
pub fn r_squared(residuals: &[f64], r: &[f64]) -> Result<f64> {
    if residuals.len() != r.len() {
        return Err(NlsigError::DimensionMismatch { expected: r.len(), actual: residuals.len() });
    }
    if r.is_empty() {
        return Err(NlsigError::DegenerateData);
    }
    let mean = r.iter().sum::<f64>() / r.len() as f64;
    let ss_tot: f64 = r.iter().map(|v| (v - mean) * (v - mean)).sum();
    if ss_tot <= 0.0 {
        return Err(NlsigError::DegenerateData);
    }
    let ss_res: f64 = residuals.iter().map(|e| e * e).sum();
    Ok(1.0 - ss_res / ss_tot)
}

struct CurveProblem<'a> {
    ts: &'a TimeSeries,
    param: &'a Parameterization,
}

impl LeastSquaresProblem for CurveProblem<'_> {
    fn residuals(&self, theta: &DVector<f64>) -> Option<DVector<f64>> {
        let (model, _) = self.param.decode(theta)?;
        let f = DVector::from_iterator(
            self.ts.len(),
            self.ts.x.iter().zip(&self.ts.r).map(|(&x, &r)| model.eval(x) - r),
        );
        f.iter().all(|v| v.is_finite()).then_some(f)
    }

    fn jacobian(&self, theta: &DVector<f64>) -> Option<DMatrix<f64>> {
        let (model, dp) = self.param.decode(theta)?;
        let cols = model.len() * PARAMS_PER_PARTITION;
        let mut raw = DMatrix::zeros(self.ts.len(), cols);
        for (d, &x) in self.ts.x.iter().enumerate() {
            for (c, v) in model_partials(&model, x).into_iter().enumerate() {
                raw[(d, c)] = v;
            }
        }
        let jac = raw * dp;
        jac.iter().all(|v| v.is_finite()).then_some(jac)
    }
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    match xs.iter().position(|&v| v >= x) {
        None => ys[ys.len() - 1],
        Some(0) => ys[0],
        Some(j) => {
            let t = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
            ys[j - 1] + t * (ys[j] - ys[j - 1])
        }
    }
}

/// Starting model from detected inflections: sub-intervals split at the valley
/// between consecutive peaks, plateau levels from the smoothed series, and
/// `λ = initial_lambda` everywhere.
pub fn initial_model(ts: &TimeSeries, guess: &InflectionGuess, opts: &FitOptions) -> Result<NlsigModel> {
    let (lo, hi) = ts.domain();
    let n = guess.n;
    if n == 0 || guess.peak_locations.len() != n {
        return Err(NlsigError::InvalidArgument("guess must carry n peak locations".into()));
    }
    let peaks = &guess.peak_locations;

    let mut edges = Vec::with_capacity(n + 1);
    edges.push(lo);
    for w in peaks.windows(2) {
        let split = guess
            .valley_locations
            .iter()
            .copied()
            .find(|&v| v > w[0] && v < w[1])
            .unwrap_or(0.5 * (w[0] + w[1]));
        edges.push(split);
    }
    edges.push(hi);

    let window = opts.smooth_window.max(1).min(ts.len().div_ceil(2)) | 1;
    let smooth = detect::smooth_full(&ts.r, window);
    let level = |x: f64| interpolate(&ts.x, &smooth, x);
    let range = ts.r.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
        - ts.r.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    let min_dy = 1e-3 * range.max(f64::MIN_POSITIVE);

    let mut partitions = Vec::with_capacity(n);
    let mut floor = level(lo);
    for i in 0..n {
        let (x_min, x_max) = (edges[i], edges[i + 1]);
        let width = x_max - x_min;
        let delta = peaks[i].clamp(x_min + 0.01 * width, x_max - 0.01 * width);
        let mut top = level(x_max);
        if i == n - 1 {
            // The last phase may be unfinished; mirror the rise up to the peak.
            top = top.max(floor + 2.0 * (level(delta) - floor));
        }
        let top = top.max(floor + min_dy);
        partitions.push(Partition {
            base: opts.base,
            lambda: opts.initial_lambda,
            x_min,
            x_max,
            delta,
            y_min: floor,
            y_max: top,
        });
        floor = top;
    }
    NlsigModel::new(partitions, opts.sign)
}

/// Fits from the detected structure in `guess`.
pub fn fit(ts: &TimeSeries, guess: &InflectionGuess, opts: &FitOptions) -> Result<FitResult> {
    check_fittable(ts)?;
    let start = initial_model(ts, guess, opts)?;
    fit_from(ts, &start, opts)
}

fn check_fittable(ts: &TimeSeries) -> Result<()> {
    if ts.len() < MIN_FIT_POINTS {
        return Err(NlsigError::SeriesTooShort { required: MIN_FIT_POINTS, actual: ts.len() });
    }
    let first = ts.r[0];
    if ts.r.iter().all(|&v| v == first) {
        return Err(NlsigError::DegenerateData);
    }
    Ok(())
}

/// Fits starting from an explicit model. Frozen parameters keep the values of
/// `start`.
pub fn fit_from(ts: &TimeSeries, start: &NlsigModel, opts: &FitOptions) -> Result<FitResult> {
    check_fittable(ts)?;
    let param = Parameterization::new(start, opts.mask, opts.chain_x, opts.chain_y);
    if param.free_count() == 0 {
        return Err(NlsigError::InvalidArgument("no free parameters to fit".into()));
    }
    let theta0 = param.encode(start)?;
    let problem = CurveProblem { ts, param: &param };
    let outcome = solver::minimize(&problem, theta0, opts.lm())
        .ok_or_else(|| NlsigError::InvalidModel("initial model is outside the feasible region".into()))?;
    let (model, _) = param.decode(&outcome.theta).expect("accepted iterates decode to valid models");

    let residuals: Vec<f64> = ts.x.iter().zip(&ts.r).map(|(&x, &r)| r - model.eval(x)).collect();
    let objective = 0.5 * residuals.iter().map(|e| e * e).sum::<f64>();
    let r_squared = r_squared(&residuals, &ts.r)?;
    Ok(FitResult {
        model,
        residuals,
        r_squared,
        converged: outcome.converged,
        iterations: outcome.iterations,
        objective,
        objective_history: outcome.history,
        options: *opts,
    })
}
