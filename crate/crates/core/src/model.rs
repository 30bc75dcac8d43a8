//! Forward evaluation of the n-logistic-sigmoid.
//!
//! A model is a floor plus a sum of bounded logistic sub-sigmoids, one per
//! growth phase:
//!
//! ```text
//! y(x)   = y_min[0] + Σ_i υ_i(x)
//! υ_i(x) = Δy_i / (1 + b_i^(∓α_i (x − δ_i))),   α_i = 2 λ_i / Δx_i
//! ```
//!
//! The exponent sign is a model-level [`Sign`]: `Increasing` uses the negative
//! exponent so that the output grows with `x`.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::error::{NlsigError, Result};

/// Smallest admissible exponential base. `∂y/∂b` divides by `b ln b`.
pub const MIN_BASE: f64 = 1.0 + 1e-6;

/// Exponents beyond this magnitude are treated as fully saturated.
pub const EXPONENT_CLAMP: f64 = 700.0;

/// Direction of growth of every sub-sigmoid in a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    #[default]
    Increasing,
    Decreasing,
}

impl Sign {
    /// `+1` for increasing, `-1` for decreasing. Multiplies the logistic argument.
    #[inline]
    pub fn factor(self) -> f64 {
        match self {
            Sign::Increasing => 1.0,
            Sign::Decreasing => -1.0,
        }
    }
}

/// The seven hyper-parameters of one growth phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub base: f64,
    pub lambda: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub delta: f64,
    pub y_min: f64,
    pub y_max: f64,
}

/// Number of hyper-parameters carried by each partition.
pub const PARAMS_PER_PARTITION: usize = 7;

/// Names a partition hyper-parameter. The declaration order is the column order
/// of every Jacobian row in this crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamKind {
    Base,
    Lambda,
    XMax,
    XMin,
    Delta,
    YMax,
    YMin,
}

impl ParamKind {
    pub const ALL: [ParamKind; PARAMS_PER_PARTITION] = [
        ParamKind::Base,
        ParamKind::Lambda,
        ParamKind::XMax,
        ParamKind::XMin,
        ParamKind::Delta,
        ParamKind::YMax,
        ParamKind::YMin,
    ];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            ParamKind::Base => "base",
            ParamKind::Lambda => "lambda",
            ParamKind::XMax => "x_max",
            ParamKind::XMin => "x_min",
            ParamKind::Delta => "delta",
            ParamKind::YMax => "y_max",
            ParamKind::YMin => "y_min",
        }
    }
}

/// Logistic value `u` and its complement `1 - u`, each computed without
/// cancellation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Logistic {
    pub u: f64,
    pub one_minus_u: f64,
}

impl Logistic {
    pub(crate) fn of(z: f64) -> Self {
        if z > EXPONENT_CLAMP {
            Logistic { u: 1.0, one_minus_u: 0.0 }
        } else if z < -EXPONENT_CLAMP {
            Logistic { u: 0.0, one_minus_u: 1.0 }
        } else if z >= 0.0 {
            let t = (-z).exp();
            Logistic { u: 1.0 / (1.0 + t), one_minus_u: t / (1.0 + t) }
        } else {
            let t = z.exp();
            Logistic { u: t / (1.0 + t), one_minus_u: 1.0 / (1.0 + t) }
        }
    }

    /// `u (1 - u)`
    #[inline]
    pub(crate) fn spread(self) -> f64 {
        self.u * self.one_minus_u
    }
}

impl Partition {
    /// A partition on the natural base.
    pub fn new(lambda: f64, x_min: f64, x_max: f64, delta: f64, y_min: f64, y_max: f64) -> Self {
        Partition { base: E, lambda, x_min, x_max, delta, y_min, y_max }
    }

    pub fn with_base(mut self, base: f64) -> Self {
        self.base = base;
        self
    }

    #[inline]
    pub fn delta_x(&self) -> f64 {
        self.x_max - self.x_min
    }

    #[inline]
    pub fn delta_y(&self) -> f64 {
        self.y_max - self.y_min
    }

    /// `α = 2λ / Δx`
    #[inline]
    pub fn alpha(&self) -> f64 {
        2.0 * self.lambda / self.delta_x()
    }

    /// Natural-base rate `α ln b`.
    #[inline]
    pub fn rate(&self) -> f64 {
        self.alpha() * self.base.ln()
    }

    pub(crate) fn logistic(&self, sign: Sign, x: f64) -> Logistic {
        Logistic::of(sign.factor() * self.rate() * (x - self.delta))
    }

    /// Sub-sigmoid output `υ` at `x`.
    pub fn contribution(&self, sign: Sign, x: f64) -> f64 {
        self.delta_y() * self.logistic(sign, x).u
    }

    /// `dυ/dx` at `x`.
    pub fn contribution_d1(&self, sign: Sign, x: f64) -> f64 {
        let l = self.logistic(sign, x);
        sign.factor() * self.rate() * self.delta_y() * l.spread()
    }

    /// `d²υ/dx²` at `x`.
    pub fn contribution_d2(&self, sign: Sign, x: f64) -> f64 {
        let l = self.logistic(sign, x);
        let k = self.rate();
        k * k * self.delta_y() * l.spread() * (l.one_minus_u - l.u)
    }

    pub fn get(&self, kind: ParamKind) -> f64 {
        match kind {
            ParamKind::Base => self.base,
            ParamKind::Lambda => self.lambda,
            ParamKind::XMax => self.x_max,
            ParamKind::XMin => self.x_min,
            ParamKind::Delta => self.delta,
            ParamKind::YMax => self.y_max,
            ParamKind::YMin => self.y_min,
        }
    }

    pub fn set(&mut self, kind: ParamKind, value: f64) {
        match kind {
            ParamKind::Base => self.base = value,
            ParamKind::Lambda => self.lambda = value,
            ParamKind::XMax => self.x_max = value,
            ParamKind::XMin => self.x_min = value,
            ParamKind::Delta => self.delta = value,
            ParamKind::YMax => self.y_max = value,
            ParamKind::YMin => self.y_min = value,
        }
    }

    /// Values in [`ParamKind::ALL`] order.
    pub fn to_array(&self) -> [f64; PARAMS_PER_PARTITION] {
        ParamKind::ALL.map(|k| self.get(k))
    }

    pub fn from_array(values: [f64; PARAMS_PER_PARTITION]) -> Self {
        let mut p = Partition::new(1.0, 0.0, 1.0, 0.5, 0.0, 1.0);
        for (k, v) in ParamKind::ALL.into_iter().zip(values) {
            p.set(k, v);
        }
        p
    }

    pub fn validate(&self, index: usize) -> Result<()> {
        let fail = |reason: &str| Err(NlsigError::InvalidPartition { index, reason: reason.to_owned() });
        let fields = [self.base, self.lambda, self.x_min, self.x_max, self.delta, self.y_min, self.y_max];
        if fields.iter().any(|v| !v.is_finite()) {
            return fail("non-finite hyper-parameter");
        }
        if self.base < MIN_BASE {
            return fail("base must be at least 1 + 1e-6");
        }
        if self.lambda <= 0.0 {
            return fail("lambda must be positive");
        }
        if self.x_max <= self.x_min {
            return fail("x_max must exceed x_min");
        }
        if self.y_max < self.y_min {
            return fail("y_max must not be below y_min");
        }
        if self.delta < self.x_min || self.delta > self.x_max {
            return fail("delta must lie within [x_min, x_max]");
        }
        if !self.alpha().is_finite() {
            return fail("sub-interval too narrow for lambda");
        }
        Ok(())
    }
}

/// A validated n-logistic-sigmoid: ordered partitions plus a growth direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModel")]
pub struct NlsigModel {
    partitions: Vec<Partition>,
    sign: Sign,
}

#[derive(Deserialize)]
struct RawModel {
    partitions: Vec<Partition>,
    #[serde(default)]
    sign: Sign,
}

impl TryFrom<RawModel> for NlsigModel {
    type Error = NlsigError;

    fn try_from(raw: RawModel) -> Result<Self> {
        NlsigModel::new(raw.partitions, raw.sign)
    }
}

impl NlsigModel {
    pub fn new(partitions: Vec<Partition>, sign: Sign) -> Result<Self> {
        if partitions.is_empty() {
            return Err(NlsigError::InvalidModel("a model needs at least one partition".into()));
        }
        for (i, p) in partitions.iter().enumerate() {
            p.validate(i)?;
        }
        for (i, w) in partitions.windows(2).enumerate() {
            if w[1].delta <= w[0].delta {
                return Err(NlsigError::InvalidModel(format!(
                    "peak locations must be strictly increasing (partition {} at {} follows {})",
                    i + 1,
                    w[1].delta,
                    w[0].delta
                )));
            }
        }
        Ok(NlsigModel { partitions, sign })
    }

    pub fn single(partition: Partition, sign: Sign) -> Result<Self> {
        Self::new(vec![partition], sign)
    }

    #[inline]
    pub fn partitions(&self) -> &[Partition] {
        &self.partitions
    }

    #[inline]
    pub fn partition(&self, i: usize) -> Option<&Partition> {
        self.partitions.get(i)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.partitions.len()
    }

    /// Always false; a valid model has at least one partition.
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.partitions.is_empty()
    }

    #[inline]
    pub fn sign(&self) -> Sign {
        self.sign
    }

    /// Global output floor, `y_min` of the first partition.
    #[inline]
    pub fn floor(&self) -> f64 {
        self.partitions[0].y_min
    }

    /// Upper saturation level, `floor + Σ Δy_i`.
    pub fn ceiling(&self) -> f64 {
        self.floor() + self.partitions.iter().map(Partition::delta_y).sum::<f64>()
    }

    /// Output range of phase `i` under the chained reading: phase `i` starts where
    /// the cumulative ceilings of the earlier phases end.
    pub fn phase_range(&self, i: usize) -> Option<(f64, f64)> {
        if i >= self.partitions.len() {
            return None;
        }
        let lower = self.floor() + self.partitions[..i].iter().map(Partition::delta_y).sum::<f64>();
        Some((lower, lower + self.partitions[i].delta_y()))
    }

    /// Index of the partition whose sub-interval contains `x`, falling back to
    /// the last partition.
    pub fn partition_containing(&self, x: f64) -> usize {
        self.partitions
            .iter()
            .rposition(|p| p.x_min <= x && x <= p.x_max)
            .unwrap_or(self.partitions.len() - 1)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.floor() + self.partitions.iter().map(|p| p.contribution(self.sign, x)).sum::<f64>()
    }

    /// First derivative `dy/dx`.
    pub fn eval_d1(&self, x: f64) -> f64 {
        self.partitions.iter().map(|p| p.contribution_d1(self.sign, x)).sum()
    }

    /// Second derivative `d²y/dx²`.
    pub fn eval_d2(&self, x: f64) -> f64 {
        self.partitions.iter().map(|p| p.contribution_d2(self.sign, x)).sum()
    }

    /// `(y, dy/dx, d²y/dx²)` sharing one logistic evaluation per partition.
    pub fn eval_all(&self, x: f64) -> (f64, f64, f64) {
        let s = self.sign.factor();
        let mut y = 0.0;
        let mut g = 0.0;
        let mut h = 0.0;
        for p in &self.partitions {
            let l = p.logistic(self.sign, x);
            let k = p.rate();
            let dy = p.delta_y();
            y += dy * l.u;
            g += s * k * dy * l.spread();
            h += k * k * dy * l.spread() * (l.one_minus_u - l.u);
        }
        (self.floor() + y, g, h)
    }

    /// All hyper-parameters, partition-major in [`ParamKind::ALL`] order.
    pub fn parameters(&self) -> Vec<f64> {
        self.partitions.iter().flat_map(Partition::to_array).collect()
    }

    /// Rebuilds a model from [`NlsigModel::parameters`] output.
    pub fn from_parameters(values: &[f64], sign: Sign) -> Result<Self> {
        if values.is_empty() || values.len() % PARAMS_PER_PARTITION != 0 {
            return Err(NlsigError::DimensionMismatch {
                expected: PARAMS_PER_PARTITION * values.len().div_ceil(PARAMS_PER_PARTITION).max(1),
                actual: values.len(),
            });
        }
        let partitions = values
            .chunks_exact(PARAMS_PER_PARTITION)
            .map(|c| Partition::from_array(c.try_into().expect("chunk length")))
            .collect();
        Self::new(partitions, sign)
    }
}

/// The classic single-phase logistic `y_min + (y_max - y_min) / (1 + e^(∓α (x - δ)))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicLogistic {
    pub y_min: f64,
    pub y_max: f64,
    pub alpha: f64,
    pub delta: f64,
    pub sign: Sign,
}

impl ClassicLogistic {
    pub fn new(y_min: f64, y_max: f64, alpha: f64, delta: f64, sign: Sign) -> Result<Self> {
        if ![y_min, y_max, alpha, delta].iter().all(|v| v.is_finite()) {
            return Err(NlsigError::InvalidModel("non-finite logistic parameter".into()));
        }
        if y_max < y_min {
            return Err(NlsigError::InvalidModel("y_max must not be below y_min".into()));
        }
        if alpha <= 0.0 {
            return Err(NlsigError::InvalidModel("alpha must be positive".into()));
        }
        Ok(ClassicLogistic { y_min, y_max, alpha, delta, sign })
    }

    /// Natural-base equivalent of a single partition: `α = (2λ/Δx)·ln b`.
    pub fn from_partition(p: &Partition, sign: Sign) -> Result<Self> {
        p.validate(0)?;
        Self::new(p.y_min, p.y_max, p.rate(), p.delta, sign)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let exponent = -self.sign.factor() * self.alpha * (x - self.delta);
        let denom = 1.0 + exponent.min(EXPONENT_CLAMP).exp();
        self.y_min + (self.y_max - self.y_min) / denom
    }
}
