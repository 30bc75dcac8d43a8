//! Analytic partial derivatives of the model output with respect to its
//! hyper-parameters and input weights, and the least-squares building blocks
//! assembled from them.
//!
//! The rate `α` never appears as a free parameter; its partial `∂y/∂α` is mapped
//! onto `λ`, `x_max`, `x_min` and `b` by the chain rule.

use nalgebra::{DMatrix, DVector};

use crate::error::{NlsigError, Result};
use crate::model::{NlsigModel, ParamKind, Partition, Sign, PARAMS_PER_PARTITION};

/// `∂y/∂θ` for the seven hyper-parameters of one partition, in
/// [`ParamKind::ALL`] order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamJacobianRow(pub [f64; PARAMS_PER_PARTITION]);

impl ParamJacobianRow {
    #[inline]
    pub fn get(&self, kind: ParamKind) -> f64 {
        self.0[kind.index()]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Partials of `y = y_min + υ(x)` for a single partition treated as a whole
/// model, so `∂y/∂y_min + ∂y/∂y_max = 1`.
pub fn param_partials(partition: &Partition, sign: Sign, x: f64) -> Result<ParamJacobianRow> {
    partition.validate(0)?;
    if !x.is_finite() {
        return Err(NlsigError::NonFiniteData);
    }
    Ok(partials_unchecked(partition, sign, x))
}

pub(crate) fn partials_unchecked(p: &Partition, sign: Sign, x: f64) -> ParamJacobianRow {
    let l = p.logistic(sign, x);
    let ln_b = p.base.ln();
    let alpha = p.alpha();
    let dx = p.delta_x();

    let t = sign.factor() * ln_b * p.delta_y() * l.spread();
    let d_alpha = (x - p.delta) * t;

    let mut row = [0.0; PARAMS_PER_PARTITION];
    row[ParamKind::Base.index()] = alpha / (p.base * ln_b) * d_alpha;
    row[ParamKind::Lambda.index()] = 2.0 / dx * d_alpha;
    row[ParamKind::XMax.index()] = -alpha / dx * d_alpha;
    row[ParamKind::XMin.index()] = alpha / dx * d_alpha;
    row[ParamKind::Delta.index()] = -alpha * t;
    row[ParamKind::YMax.index()] = l.u;
    row[ParamKind::YMin.index()] = l.one_minus_u;
    ParamJacobianRow(row)
}

/// Partials of the full model output at `x`, partition-major. Only the first
/// partition's `y_min` is the global floor; later partitions' `y_min` enter
/// through `Δy` alone.
pub fn model_partials(model: &NlsigModel, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(model.len() * PARAMS_PER_PARTITION);
    for (i, p) in model.partitions().iter().enumerate() {
        let mut row = partials_unchecked(p, model.sign(), x);
        if i > 0 {
            row.0[ParamKind::YMin.index()] -= 1.0;
        }
        out.extend_from_slice(&row.0);
    }
    out
}

/// A least-squares problem: observed `(x_d, r_d)` pairs and a candidate model.
#[derive(Debug, Clone)]
pub struct LsqObjective {
    x: Vec<f64>,
    r: Vec<f64>,
    model: NlsigModel,
}

impl LsqObjective {
    pub fn new(x: Vec<f64>, r: Vec<f64>, model: NlsigModel) -> Result<Self> {
        if x.is_empty() {
            return Err(NlsigError::SeriesTooShort { required: 1, actual: 0 });
        }
        if x.len() != r.len() {
            return Err(NlsigError::DimensionMismatch { expected: x.len(), actual: r.len() });
        }
        if x.iter().chain(&r).any(|v| !v.is_finite()) {
            return Err(NlsigError::NonFiniteData);
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(NlsigError::InvalidSeries("x must be strictly increasing".into()));
        }
        Ok(LsqObjective { x, r, model })
    }

    pub fn model(&self) -> &NlsigModel {
        &self.model
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn observed(&self) -> &[f64] {
        &self.r
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// `e_d = r_d - y_d`
    pub fn residuals(&self) -> DVector<f64> {
        DVector::from_iterator(self.len(), self.x.iter().zip(&self.r).map(|(&x, &r)| r - self.model.eval(x)))
    }

    /// `E = ½ Σ e_d²`
    pub fn objective(&self) -> f64 {
        0.5 * self.residuals().norm_squared()
    }

    /// `∇E = -Jᵀe`, since `∂e_d/∂θ = -∂y_d/∂θ`.
    pub fn gradient(&self) -> DVector<f64> {
        -(residual_jacobian(self).transpose() * self.residuals())
    }
}

/// `D × 7n` matrix of output partials `∂y_d/∂θ`, one row per data point.
pub fn residual_jacobian(obj: &LsqObjective) -> DMatrix<f64> {
    let cols = obj.model.len() * PARAMS_PER_PARTITION;
    let mut jac = DMatrix::zeros(obj.len(), cols);
    for (d, &x) in obj.x.iter().enumerate() {
        for (c, v) in model_partials(&obj.model, x).into_iter().enumerate() {
            jac[(d, c)] = v;
        }
    }
    jac
}

/// Gauss-Newton curvature `JᵀJ`.
pub fn gauss_newton_hessian(jacobian: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if jacobian.nrows() == 0 || jacobian.ncols() == 0 {
        return Err(NlsigError::DimensionMismatch { expected: 1, actual: 0 });
    }
    if jacobian.iter().any(|v| !v.is_finite()) {
        return Err(NlsigError::NonFiniteData);
    }
    Ok(jacobian.tr_mul(jacobian))
}

/// Bias plus per-input weights: `x = ω_0 + Σ ω_l x_l`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightLayer {
    weights: Vec<f64>,
}

impl WeightLayer {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.len() < 2 {
            return Err(NlsigError::InvalidArgument(
                "a weight layer needs a bias and at least one input weight".into(),
            ));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(NlsigError::NonFiniteData);
        }
        Ok(WeightLayer { weights })
    }

    /// Unit weight, zero bias, for `q` inputs.
    pub fn identity(q: usize) -> Self {
        let mut weights = vec![0.0; q + 1];
        weights[1..].iter_mut().for_each(|w| *w = 1.0);
        WeightLayer { weights }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub(crate) fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    /// Number of inputs `q`.
    pub fn arity(&self) -> usize {
        self.weights.len() - 1
    }

    pub fn combine(&self, inputs: &[f64]) -> Result<f64> {
        if inputs.len() != self.arity() {
            return Err(NlsigError::DimensionMismatch { expected: self.arity(), actual: inputs.len() });
        }
        Ok(self.weights[0] + self.weights[1..].iter().zip(inputs).map(|(w, x)| w * x).sum::<f64>())
    }
}

/// `[∂y/∂ω_0, ∂y/∂ω_1, …, ∂y/∂ω_q]` where `∂y/∂ω_0 = dy/dx` and
/// `∂y/∂ω_l = x_l dy/dx`.
pub fn weight_partials(layer: &WeightLayer, inputs: &[f64], model: &NlsigModel) -> Result<Vec<f64>> {
    let x = layer.combine(inputs)?;
    let g = model.eval_d1(x);
    Ok(std::iter::once(g).chain(inputs.iter().map(|xl| xl * g)).collect())
}
