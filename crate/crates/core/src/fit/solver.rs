//! Damped Gauss-Newton (Levenberg-Marquardt) for small dense problems.

use nalgebra::{DMatrix, DVector};

/// Residual vector `f(θ)` and its Jacobian. Either may report `None` when `θ`
/// leaves the feasible region; the solver treats that as a rejected step.
pub(crate) trait LeastSquaresProblem {
    fn residuals(&self, theta: &DVector<f64>) -> Option<DVector<f64>>;
    fn jacobian(&self, theta: &DVector<f64>) -> Option<DMatrix<f64>>;
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct LmSettings {
    pub max_iterations: usize,
    pub initial_damping: f64,
    pub step_tolerance: f64,
    pub objective_tolerance: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct LmOutcome {
    pub theta: DVector<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// `½‖f‖²` at the start and after every accepted step.
    pub history: Vec<f64>,
}

const MAX_DAMPING: f64 = 1e32;

pub(crate) fn minimize<P: LeastSquaresProblem>(
    problem: &P,
    start: DVector<f64>,
    settings: LmSettings,
) -> Option<LmOutcome> {
    let mut theta = start;
    let mut f = problem.residuals(&theta)?;
    let mut cost = 0.5 * f.norm_squared();
    let mut mu = settings.initial_damping;
    let mut history = vec![cost];
    let mut converged = false;
    let mut iterations = 0;

    'outer: while iterations < settings.max_iterations {
        if cost == 0.0 {
            converged = true;
            break;
        }
        let Some(jac) = problem.jacobian(&theta) else { break };
        let jtj = jac.tr_mul(&jac);
        let grad = jac.tr_mul(&f);
        let max_diag = jtj.diagonal().max();
        let scale: Vec<f64> =
            jtj.diagonal().iter().map(|&d| d.max(1e-12 * max_diag).max(f64::MIN_POSITIVE)).collect();
        iterations += 1;

        loop {
            let mut lhs = jtj.clone();
            for (j, s) in scale.iter().enumerate() {
                lhs[(j, j)] += mu * s;
            }
            let Some(chol) = lhs.cholesky() else {
                mu *= 10.0;
                if mu > MAX_DAMPING {
                    break 'outer;
                }
                continue;
            };
            let step = -chol.solve(&grad);
            let small_step = step.norm() <= settings.step_tolerance * (1.0 + theta.norm());
            let candidate = &theta + &step;
            let trial = problem.residuals(&candidate).map(|r| {
                let c = 0.5 * r.norm_squared();
                (r, c)
            });
            match trial {
                Some((r, c)) if c < cost => {
                    let relative = (cost - c) / cost;
                    theta = candidate;
                    f = r;
                    cost = c;
                    history.push(cost);
                    mu = (mu / 10.0).max(1e-15);
                    if small_step || relative < settings.objective_tolerance {
                        converged = true;
                        break 'outer;
                    }
                    break;
                }
                _ => {
                    if small_step {
                        // No representable step improves the objective.
                        converged = true;
                        break 'outer;
                    }
                    mu *= 10.0;
                    if mu > MAX_DAMPING {
                        break 'outer;
                    }
                }
            }
        }
    }

    Some(LmOutcome { theta, iterations, converged, history })
}
