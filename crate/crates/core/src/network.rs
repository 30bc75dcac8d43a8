//! Multi-output pipelines: `m` weighted-input layers, each feeding its own
//! model, i.e. a network with `m` hidden weight layers and `m` hidden logistic
//! layers.

use crate::calculus::{model_partials, weight_partials, WeightLayer};
use crate::error::{NlsigError, Result};
use crate::model::NlsigModel;

/// One output: `y_j = model_j(ω_0j + Σ ω_lj x_l)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pipeline {
    pub weights: WeightLayer,
    pub model: NlsigModel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NlsigNetwork {
    pipelines: Vec<Pipeline>,
}

/// Outputs with their first and second derivatives with respect to each
/// pipeline's own weighted input.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardOutput {
    pub y: Vec<f64>,
    pub g: Vec<f64>,
    pub h: Vec<f64>,
}

/// `∂E/∂θ` for one pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineGradient {
    /// Model hyper-parameters, in [`NlsigModel::parameters`] order.
    pub params: Vec<f64>,
    /// `[∂E/∂ω_0, …, ∂E/∂ω_q]`
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkGradient {
    pub pipelines: Vec<PipelineGradient>,
    /// `E = ½ Σ_d Σ_j e_jd²`
    pub objective: f64,
}

impl NlsigNetwork {
    pub fn new(pipelines: Vec<Pipeline>) -> Result<Self> {
        let Some(first) = pipelines.first() else {
            return Err(NlsigError::InvalidModel("a network needs at least one pipeline".into()));
        };
        let q = first.weights.arity();
        if let Some(p) = pipelines.iter().find(|p| p.weights.arity() != q) {
            return Err(NlsigError::DimensionMismatch { expected: q, actual: p.weights.arity() });
        }
        Ok(NlsigNetwork { pipelines })
    }

    pub fn pipelines(&self) -> &[Pipeline] {
        &self.pipelines
    }

    /// Number of outputs `m`.
    pub fn outputs(&self) -> usize {
        self.pipelines.len()
    }

    /// Number of inputs `q`.
    pub fn arity(&self) -> usize {
        self.pipelines[0].weights.arity()
    }

    fn check_inputs(&self, inputs: &[f64]) -> Result<()> {
        if inputs.len() != self.arity() {
            return Err(NlsigError::DimensionMismatch { expected: self.arity(), actual: inputs.len() });
        }
        if inputs.iter().any(|v| !v.is_finite()) {
            return Err(NlsigError::NonFiniteData);
        }
        Ok(())
    }

    fn weighted_inputs(&self, inputs: &[f64]) -> Result<Vec<f64>> {
        self.check_inputs(inputs)?;
        self.pipelines.iter().map(|p| p.weights.combine(inputs)).collect()
    }
}

pub fn forward(net: &NlsigNetwork, inputs: &[f64]) -> Result<ForwardOutput> {
    let xs = net.weighted_inputs(inputs)?;
    let mut out = ForwardOutput {
        y: Vec::with_capacity(xs.len()),
        g: Vec::with_capacity(xs.len()),
        h: Vec::with_capacity(xs.len()),
    };
    for (p, &x) in net.pipelines.iter().zip(&xs) {
        let (y, g, h) = p.model.eval_all(x);
        out.y.push(y);
        out.g.push(g);
        out.h.push(h);
    }
    Ok(out)
}

/// `m × q` matrix of `∂y_j/∂x_l = ω_lj g_j`.
pub fn input_jacobian(net: &NlsigNetwork, inputs: &[f64]) -> Result<Vec<Vec<f64>>> {
    let fwd = forward(net, inputs)?;
    Ok(net
        .pipelines
        .iter()
        .zip(&fwd.g)
        .map(|(p, g)| p.weights.weights()[1..].iter().map(|w| w * g).collect())
        .collect())
}

/// Gradient of `E = ½ Σ_j e_j²` for a single datum, with `e_j = y_j - target_j`.
pub fn backward(net: &NlsigNetwork, inputs: &[f64], targets: &[f64]) -> Result<NetworkGradient> {
    if targets.len() != net.outputs() {
        return Err(NlsigError::DimensionMismatch { expected: net.outputs(), actual: targets.len() });
    }
    let xs = net.weighted_inputs(inputs)?;
    let mut objective = 0.0;
    let mut pipelines = Vec::with_capacity(net.outputs());
    for ((p, &x), &target) in net.pipelines.iter().zip(&xs).zip(targets) {
        let e = p.model.eval(x) - target;
        objective += 0.5 * e * e;
        let params = model_partials(&p.model, x).into_iter().map(|d| e * d).collect();
        let weights = weight_partials(&p.weights, inputs, &p.model)?.into_iter().map(|d| e * d).collect();
        pipelines.push(PipelineGradient { params, weights });
    }
    Ok(NetworkGradient { pipelines, objective })
}

/// Sum of [`backward`] over `batch`, accumulated in batch order.
pub fn backward_batch(net: &NlsigNetwork, batch: &[(Vec<f64>, Vec<f64>)]) -> Result<NetworkGradient> {
    let mut total = NetworkGradient {
        pipelines: net
            .pipelines
            .iter()
            .map(|p| PipelineGradient {
                params: vec![0.0; p.model.parameters().len()],
                weights: vec![0.0; p.weights.weights().len()],
            })
            .collect(),
        objective: 0.0,
    };
    for (inputs, targets) in batch {
        let g = backward(net, inputs, targets)?;
        total.objective += g.objective;
        for (acc, part) in total.pipelines.iter_mut().zip(g.pipelines) {
            acc.params.iter_mut().zip(part.params).for_each(|(a, v)| *a += v);
            acc.weights.iter_mut().zip(part.weights).for_each(|(a, v)| *a += v);
        }
    }
    Ok(total)
}

/// One full-batch gradient-descent update of every weight and hyper-parameter.
/// Returns the objective before the update. When the update would leave the
/// valid parameter region the network is left unchanged and an error returned.
pub fn gradient_descent_step(
    net: &mut NlsigNetwork,
    batch: &[(Vec<f64>, Vec<f64>)],
    step: f64,
) -> Result<f64> {
    let grad = backward_batch(net, batch)?;
    let mut updated = Vec::with_capacity(net.outputs());
    for (p, g) in net.pipelines.iter().zip(&grad.pipelines) {
        let params: Vec<f64> =
            p.model.parameters().iter().zip(&g.params).map(|(v, d)| v - step * d).collect();
        let model = NlsigModel::from_parameters(&params, p.model.sign())?;
        let mut weights = p.weights.clone();
        weights.weights_mut().iter_mut().zip(&g.weights).for_each(|(w, d)| *w -= step * d);
        updated.push(Pipeline { weights, model });
    }
    net.pipelines = updated;
    Ok(grad.objective)
}

/// Softmax-like coupled outputs:
/// `D_ij = 1 + Σ_{k≠j} b_ij^(∓(α_ij (x_j - δ_ij) - α_ik (x_k - δ_ik)))`.
/// Requires at least two pipelines sharing the partition count, bases and sign.
pub fn forward_multinomial(net: &NlsigNetwork, inputs: &[f64]) -> Result<Vec<f64>> {
    let m = net.outputs();
    if m < 2 {
        return Err(NlsigError::HeterogeneousPipelines(
            "the coupled form needs at least two pipelines".into(),
        ));
    }
    let first = &net.pipelines[0].model;
    for (j, p) in net.pipelines.iter().enumerate().skip(1) {
        if p.model.len() != first.len() {
            return Err(NlsigError::HeterogeneousPipelines(format!(
                "pipeline {j} has {} partitions, pipeline 0 has {}",
                p.model.len(),
                first.len()
            )));
        }
        if p.model.sign() != first.sign() {
            return Err(NlsigError::HeterogeneousPipelines(format!("pipeline {j} has a different sign")));
        }
        let same_bases = p.model.partitions().iter().zip(first.partitions()).all(|(a, b)| a.base == b.base);
        if !same_bases {
            return Err(NlsigError::HeterogeneousPipelines(format!("pipeline {j} uses different bases")));
        }
    }

    let xs = net.weighted_inputs(inputs)?;
    let s = first.sign().factor();
    // a[j][i] = α_ij (x_j - δ_ij)
    let a: Vec<Vec<f64>> = net
        .pipelines
        .iter()
        .zip(&xs)
        .map(|(p, &x)| p.model.partitions().iter().map(|q| q.alpha() * (x - q.delta)).collect())
        .collect();

    Ok(net
        .pipelines
        .iter()
        .enumerate()
        .map(|(j, p)| {
            let parts = p.model.partitions();
            let mut y = p.model.floor();
            for (i, part) in parts.iter().enumerate() {
                let ln_b = part.base.ln();
                let denom: f64 = 1.0
                    + (0..m)
                        .filter(|&k| k != j)
                        .map(|k| (-s * ln_b * (a[j][i] - a[k][i])).min(700.0).exp())
                        .sum::<f64>();
                y += part.delta_y() / denom;
            }
            y
        })
        .collect())
}
