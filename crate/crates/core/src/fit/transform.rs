//! Map between an unconstrained solver vector and a valid model.
//!
//! Positive quantities (`b - MIN_BASE`, `λ`, `Δx`, `Δy`) live in log space and
//! `δ` is a logistic fraction of its own sub-interval, so every decoded model
//! satisfies the partition invariants. Chained sub-intervals (`x_min` of a
//! phase equal to `x_max` of the previous one) also keep peaks ordered.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{NlsigError, Result};
use crate::model::{NlsigModel, ParamKind, Partition, MIN_BASE, PARAMS_PER_PARTITION};

/// Which hyper-parameters the optimizer may move. Chaining in [`FitOptions`]
/// overrides the mask for `x_min` and `y_min` of every phase after the first.
///
/// [`FitOptions`]: super::FitOptions
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreeMask([bool; PARAMS_PER_PARTITION]);

impl FreeMask {
    pub fn all_free() -> Self {
        FreeMask([true; PARAMS_PER_PARTITION])
    }

    pub fn all_frozen() -> Self {
        FreeMask([false; PARAMS_PER_PARTITION])
    }

    pub fn with(mut self, kind: ParamKind, free: bool) -> Self {
        self.0[kind.index()] = free;
        self
    }

    #[inline]
    pub fn is_free(&self, kind: ParamKind) -> bool {
        self.0[kind.index()]
    }
}

impl Default for FreeMask {
    /// `λ, δ, x_max, y_max, y_min` free; `b` and the first `x_min` frozen.
    fn default() -> Self {
        FreeMask::all_free().with(ParamKind::Base, false).with(ParamKind::XMin, false)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Source {
    Free(usize),
    Frozen(f64),
    Chained,
}

// Decoding order: each parameter only depends on ones decoded before it.
const DECODE_ORDER: [ParamKind; PARAMS_PER_PARTITION] = [
    ParamKind::Base,
    ParamKind::Lambda,
    ParamKind::XMin,
    ParamKind::XMax,
    ParamKind::Delta,
    ParamKind::YMin,
    ParamKind::YMax,
];

/// Tangent of one decoded hyper-parameter: value plus gradient with respect
/// to the free vector.
#[derive(Debug, Clone)]
struct Tangent {
    value: f64,
    grad: Vec<f64>,
}

#[derive(Debug, Clone)]
pub(crate) struct Parameterization {
    sources: Vec<[Source; PARAMS_PER_PARTITION]>,
    free: usize,
    sign: crate::model::Sign,
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

fn floor_positive(v: f64, scale: f64) -> f64 {
    v.max(1e-9 * scale.max(1.0))
}

impl Parameterization {
    pub(crate) fn new(template: &NlsigModel, mask: FreeMask, chain_x: bool, chain_y: bool) -> Self {
        let mut free = 0;
        let sources = template
            .partitions()
            .iter()
            .enumerate()
            .map(|(i, p)| {
                ParamKind::ALL.map(|kind| {
                    let chained = i > 0
                        && ((kind == ParamKind::XMin && chain_x) || (kind == ParamKind::YMin && chain_y));
                    if chained {
                        Source::Chained
                    } else if mask.is_free(kind) {
                        free += 1;
                        Source::Free(free - 1)
                    } else {
                        Source::Frozen(p.get(kind))
                    }
                })
            })
            .collect();
        Parameterization { sources, free, sign: template.sign() }
    }

    pub(crate) fn free_count(&self) -> usize {
        self.free
    }

    /// Unconstrained coordinates reproducing `model` as closely as the
    /// transform allows (fractions and widths are nudged off their limits).
    pub(crate) fn encode(&self, model: &NlsigModel) -> Result<DVector<f64>> {
        if model.len() != self.sources.len() {
            return Err(NlsigError::DimensionMismatch { expected: self.sources.len(), actual: model.len() });
        }
        let mut theta = DVector::zeros(self.free);
        let mut prev: Option<Partition> = None;
        for (p, sources) in model.partitions().iter().zip(&self.sources) {
            let mut eff = *p;
            for kind in DECODE_ORDER {
                let src = sources[kind.index()];
                let target = p.get(kind);
                let value = match src {
                    Source::Frozen(v) => v,
                    Source::Chained => {
                        let prev = prev.expect("chained parameter on first partition");
                        match kind {
                            ParamKind::XMin => prev.x_max,
                            _ => prev.y_max,
                        }
                    }
                    Source::Free(col) => {
                        let (coord, value) = match kind {
                            ParamKind::Base => {
                                let excess = floor_positive(target - MIN_BASE, 1e-3);
                                (excess.ln(), MIN_BASE + excess)
                            }
                            ParamKind::Lambda => {
                                let l = floor_positive(target, 1e-3);
                                (l.ln(), l)
                            }
                            ParamKind::XMax => {
                                let w = floor_positive(target - eff.x_min, eff.x_min.abs());
                                (w.ln(), eff.x_min + w)
                            }
                            ParamKind::Delta => {
                                let frac =
                                    ((target - eff.x_min) / (eff.x_max - eff.x_min)).clamp(1e-9, 1.0 - 1e-9);
                                (logit(frac), eff.x_min + frac * (eff.x_max - eff.x_min))
                            }
                            ParamKind::YMax => {
                                let scale = eff.y_min.abs().max(target.abs());
                                let dy = floor_positive(target - eff.y_min, scale);
                                (dy.ln(), eff.y_min + dy)
                            }
                            ParamKind::XMin | ParamKind::YMin => (target, target),
                        };
                        theta[col] = coord;
                        value
                    }
                };
                eff.set(kind, value);
            }
            prev = Some(eff);
        }
        Ok(theta)
    }

    /// Model for `theta` and the `7n × k` derivative of its hyper-parameters
    /// with respect to `theta`. `None` when the decoded model is invalid.
    pub(crate) fn decode(&self, theta: &DVector<f64>) -> Option<(NlsigModel, DMatrix<f64>)> {
        let k = self.free;
        let n = self.sources.len();
        let mut tangents: Vec<[Tangent; PARAMS_PER_PARTITION]> = Vec::with_capacity(n);

        for (i, sources) in self.sources.iter().enumerate() {
            let mut slots: [Tangent; PARAMS_PER_PARTITION] =
                std::array::from_fn(|_| Tangent { value: 0.0, grad: vec![0.0; k] });
            for kind in DECODE_ORDER {
                let t = match sources[kind.index()] {
                    Source::Frozen(v) => Tangent { value: v, grad: vec![0.0; k] },
                    Source::Chained => {
                        let from = match kind {
                            ParamKind::XMin => ParamKind::XMax,
                            _ => ParamKind::YMax,
                        };
                        tangents[i - 1][from.index()].clone()
                    }
                    Source::Free(col) => {
                        let c = theta[col];
                        match kind {
                            ParamKind::Base | ParamKind::Lambda => {
                                let e = c.exp();
                                let offset = if kind == ParamKind::Base { MIN_BASE } else { 0.0 };
                                let mut grad = vec![0.0; k];
                                grad[col] = e;
                                Tangent { value: offset + e, grad }
                            }
                            ParamKind::XMin | ParamKind::YMin => {
                                let mut grad = vec![0.0; k];
                                grad[col] = 1.0;
                                Tangent { value: c, grad }
                            }
                            ParamKind::XMax | ParamKind::YMax => {
                                let lower = if kind == ParamKind::XMax {
                                    &slots[ParamKind::XMin.index()]
                                } else {
                                    &slots[ParamKind::YMin.index()]
                                };
                                let e = c.exp();
                                let mut grad = lower.grad.clone();
                                grad[col] += e;
                                Tangent { value: lower.value + e, grad }
                            }
                            ParamKind::Delta => {
                                let lo = &slots[ParamKind::XMin.index()];
                                let hi = &slots[ParamKind::XMax.index()];
                                let s = sigmoid(c);
                                let width = hi.value - lo.value;
                                let mut grad: Vec<f64> = lo
                                    .grad
                                    .iter()
                                    .zip(&hi.grad)
                                    .map(|(gl, gh)| gl * (1.0 - s) + gh * s)
                                    .collect();
                                grad[col] += width * s * (1.0 - s);
                                Tangent { value: lo.value + width * s, grad }
                            }
                        }
                    }
                };
                slots[kind.index()] = t;
            }
            tangents.push(slots);
        }

        let partitions: Vec<Partition> = tangents
            .iter()
            .map(|slots| Partition::from_array(std::array::from_fn(|j| slots[j].value)))
            .collect();
        let model = NlsigModel::new(partitions, self.sign).ok()?;

        let mut dp = DMatrix::zeros(n * PARAMS_PER_PARTITION, k);
        for (i, slots) in tangents.iter().enumerate() {
            for (j, t) in slots.iter().enumerate() {
                for (c, g) in t.grad.iter().enumerate() {
                    dp[(i * PARAMS_PER_PARTITION + j, c)] = *g;
                }
            }
        }
        Some((model, dp))
    }
}
