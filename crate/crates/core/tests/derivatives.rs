mod common;

use common::{central, close, grid, random_model, rng};
use nalgebra::DMatrix;
use nlsig::{
    calculus::model_partials, gauss_newton_hessian, param_partials, residual_jacobian, weight_partials,
    ClassicLogistic, LsqObjective, NlsigModel, ParamKind, Partition, Sign, WeightLayer, PARAMS_PER_PARTITION,
};
use proptest::prelude::*;
use rand::Rng;

#[test]
fn first_derivative_matches_finite_differences() {
    let mut r = rng(11);
    for trial in 0..100 {
        let n = 1 + trial % 3;
        let m = random_model(&mut r, n);
        let x = r.random_range(-2.0..12.0);
        let fd = central(|v| m.eval(v), x);
        assert!(close(m.eval_d1(x), fd, 1e-5, 1e-8), "trial {trial}: {} vs {fd}", m.eval_d1(x));
    }
}

#[test]
fn second_derivative_matches_finite_differences() {
    let mut r = rng(12);
    for trial in 0..100 {
        let n = 1 + trial % 3;
        let m = random_model(&mut r, n);
        let x = r.random_range(-2.0..12.0);
        let fd = central(|v| m.eval_d1(v), x);
        assert!(close(m.eval_d2(x), fd, 1e-4, 1e-8), "trial {trial}: {} vs {fd}", m.eval_d2(x));
    }
}

#[test]
fn eval_all_agrees_with_separate_calls() {
    let mut r = rng(13);
    for _ in 0..50 {
        let m = random_model(&mut r, 3);
        let x = r.random_range(-2.0..12.0);
        let (y, g, h) = m.eval_all(x);
        assert!((y - m.eval(x)).abs() < 1e-14);
        assert!((g - m.eval_d1(x)).abs() < 1e-14);
        assert!((h - m.eval_d2(x)).abs() < 1e-12);
    }
}

#[test]
fn saturated_tail_has_no_slope() {
    let mut r = rng(14);
    for _ in 0..20 {
        let m = random_model(&mut r, 2);
        let p = m.partitions()[0];
        let far = p.x_min - 10.0 * p.delta_x();
        let peak: f64 = m.partitions().iter().map(|q| q.rate() * q.delta_y() / 4.0).sum();
        if m.sign() == Sign::Increasing {
            assert!(m.eval_d1(far).abs() <= 1e-6 * peak);
        }
    }
}

#[test]
fn classic_form_is_the_single_phase_case() {
    for (p, sign) in [
        (Partition::new(6.0, 0.0, 10.0, 5.0, 0.0, 1.0), Sign::Increasing),
        (Partition::new(2.5, -3.0, 4.0, 1.0, -2.0, 7.5), Sign::Decreasing),
        (Partition::new(4.0, 10.0, 30.0, 22.0, 100.0, 250.0).with_base(10.0), Sign::Increasing),
    ] {
        let m = NlsigModel::single(p, sign).unwrap();
        // α = 2λ/Δx on the natural base, scaled by ln b otherwise
        let c =
            ClassicLogistic::new(p.y_min, p.y_max, 2.0 * p.lambda / p.delta_x() * p.base.ln(), p.delta, sign)
                .unwrap();
        let span = p.delta_x();
        let max = grid(p.x_min - span, p.x_max + span, 1000)
            .into_iter()
            .map(|x| (m.eval(x) - c.eval(x)).abs())
            .fold(0.0, f64::max);
        assert!(max < 1e-12, "{max}");
    }
}

fn perturbed_partition_eval(p: &Partition, sign: Sign, kind: ParamKind, value: f64, x: f64) -> f64 {
    let mut q = *p;
    q.set(kind, value);
    q.y_min + q.contribution(sign, x)
}

#[test]
fn partition_partials_match_finite_differences() {
    let mut r = rng(21);
    for trial in 0..100 {
        let m = random_model(&mut r, 1);
        let p = m.partitions()[0];
        let x = r.random_range(-2.0..12.0);
        let row = param_partials(&p, m.sign(), x).unwrap();
        for kind in ParamKind::ALL {
            let fd = central(|v| perturbed_partition_eval(&p, m.sign(), kind, v, x), p.get(kind));
            assert!(
                close(row.get(kind), fd, 1e-5, 1e-8),
                "trial {trial} {kind:?}: {} vs {fd}",
                row.get(kind)
            );
        }
    }
}

#[test]
fn model_partials_match_finite_differences() {
    let mut r = rng(22);
    for trial in 0..60 {
        let m = random_model(&mut r, 1 + trial % 3);
        let x = r.random_range(-2.0..12.0);
        let analytic = model_partials(&m, x);
        let params = m.parameters();
        for (c, &a) in analytic.iter().enumerate() {
            let fd = central(
                |v| {
                    let mut p = params.clone();
                    p[c] = v;
                    NlsigModel::from_parameters(&p, m.sign()).unwrap().eval(x)
                },
                params[c],
            );
            assert!(close(a, fd, 1e-5, 1e-8), "trial {trial} column {c}: {a} vs {fd}");
        }
    }
}

#[test]
fn jacobian_gradient_matches_objective_differences() {
    let mut r = rng(23);
    for trial in 0..20 {
        let m = random_model(&mut r, 1 + trial % 3);
        let x = grid(-1.0, 11.0, 40);
        let obs: Vec<f64> = x.iter().map(|&v| m.eval(v) + r.random_range(-0.3..0.3)).collect();
        let obj = LsqObjective::new(x.clone(), obs.clone(), m.clone()).unwrap();
        let grad = obj.gradient();
        let params = m.parameters();
        for c in 0..params.len() {
            let fd = central(
                |v| {
                    let mut p = params.clone();
                    p[c] = v;
                    let model = NlsigModel::from_parameters(&p, m.sign()).unwrap();
                    LsqObjective::new(x.clone(), obs.clone(), model).unwrap().objective()
                },
                params[c],
            );
            assert!(close(grad[c], fd, 1e-5, 1e-8), "trial {trial} column {c}: {} vs {fd}", grad[c]);
        }
    }
}

fn naive_gram(j: &DMatrix<f64>) -> DMatrix<f64> {
    let (rows, cols) = j.shape();
    let mut h = DMatrix::zeros(cols, cols);
    for a in 0..cols {
        for b in 0..cols {
            let mut s = 0.0;
            for d in 0..rows {
                s += j[(d, a)] * j[(d, b)];
            }
            h[(a, b)] = s;
        }
    }
    h
}

#[test]
fn gauss_newton_hessian_properties() {
    let mut r = rng(24);
    for trial in 0..10 {
        let m = random_model(&mut r, 1 + trial % 3);
        let x = grid(0.0, 10.0, 25);
        let obs: Vec<f64> = x.iter().map(|&v| m.eval(v)).collect();
        let jac = residual_jacobian(&LsqObjective::new(x, obs, m.clone()).unwrap());
        assert_eq!(jac.shape(), (25, m.len() * PARAMS_PER_PARTITION));
        let h = gauss_newton_hessian(&jac).unwrap();

        let naive = naive_gram(&jac);
        assert!((&h - &naive).abs().max() < 1e-12);
        assert!((&h - h.transpose()).abs().max() == 0.0);

        let sym = (&h + h.transpose()) * 0.5;
        let min_eig = sym.symmetric_eigen().eigenvalues.min();
        assert!(min_eig >= -1e-10, "{min_eig}");

        let mut permuted = jac.clone();
        for d in 0..jac.nrows() {
            permuted.set_row(d, &jac.row(jac.nrows() - 1 - d));
        }
        let hp = gauss_newton_hessian(&permuted).unwrap();
        assert!((&hp - &h).abs().max() < 1e-12);
    }
}

#[test]
fn weight_partials_match_finite_differences() {
    let mut r = rng(25);
    for trial in 0..100 {
        let m = random_model(&mut r, 1 + trial % 3);
        let q = 1 + trial % 4;
        let weights: Vec<f64> = (0..=q).map(|_| r.random_range(-1.0..1.5)).collect();
        let inputs: Vec<f64> = (0..q).map(|_| r.random_range(0.0..5.0)).collect();
        let layer = WeightLayer::new(weights.clone()).unwrap();
        let analytic = weight_partials(&layer, &inputs, &m).unwrap();
        for l in 0..=q {
            let fd = central(
                |v| {
                    let mut w = weights.clone();
                    w[l] = v;
                    m.eval(WeightLayer::new(w).unwrap().combine(&inputs).unwrap())
                },
                weights[l],
            );
            assert!(close(analytic[l], fd, 1e-5, 1e-8), "trial {trial} weight {l}");
        }
    }
}

fn arb_partition() -> impl Strategy<Value = Partition> {
    (
        prop_oneof![Just(std::f64::consts::E), 1.1f64..20.0],
        0.1f64..12.0,
        -50.0f64..50.0,
        0.5f64..40.0,
        0.0f64..1.0,
        -100.0f64..100.0,
        0.0f64..50.0,
    )
        .prop_map(|(base, lambda, x_min, width, frac, y_min, dy)| Partition {
            base,
            lambda,
            x_min,
            x_max: x_min + width,
            delta: x_min + frac * width,
            y_min,
            y_max: y_min + dy,
        })
}

fn arb_model() -> impl Strategy<Value = NlsigModel> {
    prop::collection::vec(arb_partition(), 1..4).prop_map(|mut ps| {
        // Shift phases so peaks are strictly increasing.
        let mut offset = 0.0;
        for p in &mut ps {
            let shift = offset - p.x_min;
            p.x_min += shift;
            p.x_max += shift;
            p.delta += shift;
            offset = p.x_max + 1.0;
        }
        NlsigModel::new(ps, Sign::Increasing).unwrap()
    })
}

proptest! {
    #[test]
    fn midpoint_identity(p in arb_partition()) {
        let v = p.contribution(Sign::Increasing, p.delta);
        prop_assert!((v - p.delta_y() / 2.0).abs() <= 1e-12 * p.delta_y().max(1.0));
    }

    #[test]
    fn output_stays_within_bounds(m in arb_model(), x in -500.0f64..500.0) {
        let y = m.eval(x);
        let slack = 1e-12 * m.ceiling().abs().max(1.0);
        prop_assert!(y >= m.floor() - slack && y <= m.ceiling() + slack);
    }

    #[test]
    fn increasing_models_are_monotone(m in arb_model()) {
        let last = m.partitions().last().unwrap().x_max;
        let xs = grid(-10.0, last + 10.0, 400);
        for w in xs.windows(2) {
            prop_assert!(m.eval(w[1]) >= m.eval(w[0]));
            prop_assert!(m.eval_d1(w[0]) >= 0.0);
        }
    }

    #[test]
    fn output_is_floor_plus_contributions(m in arb_model(), x in -100.0f64..200.0) {
        let sum: f64 = m.partitions().iter().map(|p| p.contribution(m.sign(), x)).sum();
        prop_assert!((m.eval(x) - (m.floor() + sum)).abs() <= 1e-12 * m.ceiling().abs().max(1.0));
    }

    #[test]
    fn pair_and_chain_rule_identities(p in arb_partition(), x in -100.0f64..100.0) {
        let row = param_partials(&p, Sign::Increasing, x).unwrap();
        prop_assert!((row.get(ParamKind::YMin) + row.get(ParamKind::YMax) - 1.0).abs() <= 1e-12);
        let d_alpha = row.get(ParamKind::Lambda) * p.delta_x() / 2.0;
        let tol = 1e-12 * d_alpha.abs().max(1.0) * p.alpha().max(1.0) / p.delta_x().min(1.0);
        prop_assert!((row.get(ParamKind::XMax) + p.alpha() / p.delta_x() * d_alpha).abs() <= tol);
        prop_assert!((row.get(ParamKind::XMax) + row.get(ParamKind::XMin)).abs() <= tol);
    }
}
