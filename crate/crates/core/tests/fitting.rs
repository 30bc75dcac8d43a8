mod common;

use std::time::Instant;

use common::{chained_model, grid, noisy_series};
use nlsig::fit::{detect_with_count, MIN_FIT_POINTS};
use nlsig::{
    bootstrap, detect_inflections, fit, r_squared, BootstrapOptions, FitOptions, InflectionGuess, NlsigError,
    NlsigModel, Partition, Sign, TimeSeries,
};

fn single_phase() -> NlsigModel {
    NlsigModel::single(Partition::new(6.0, 0.0, 100.0, 43.0, 10.0, 1010.0), Sign::Increasing).unwrap()
}

fn two_phase() -> NlsigModel {
    NlsigModel::new(
        vec![
            Partition::new(6.0, 0.0, 50.0, 24.0, 0.0, 600.0),
            Partition::new(5.0, 50.0, 100.0, 73.0, 600.0, 1000.0),
        ],
        Sign::Increasing,
    )
    .unwrap()
}

fn fit_auto(ts: &TimeSeries) -> nlsig::FitResult {
    let opts = FitOptions::default();
    let guess = detect_inflections(ts, opts.smooth_window).unwrap();
    fit(ts, &guess, &opts).unwrap()
}

#[test]
fn detection_finds_single_peak_near_truth() {
    let m = single_phase();
    let x = grid(0.0, 100.0, 200);
    let step = x[1] - x[0];
    let ts = TimeSeries::from_model(&m, x).unwrap();
    let guess = detect_inflections(&ts, 7).unwrap();
    assert_eq!(guess.n, 1);
    assert!((guess.peak_locations[0] - 43.0).abs() <= 2.0 * step, "{:?}", guess.peak_locations);
}

#[test]
fn detection_counts_separated_phases() {
    for n in 1..=3 {
        let m = chained_model(0.0, 100.0, n, 6.0);
        let ts = TimeSeries::from_model(&m, grid(0.0, 100.0, 300)).unwrap();
        let guess = detect_inflections(&ts, 7).unwrap();
        assert_eq!(guess.n, n, "n = {n}: {:?}", guess.peak_locations);
        for (found, p) in guess.peak_locations.iter().zip(m.partitions()) {
            assert!((found - p.delta).abs() < 2.0, "{found} vs {}", p.delta);
        }
    }
}

#[test]
fn detection_on_two_phase_fixture() {
    let ts = TimeSeries::from_model(&two_phase(), grid(0.0, 100.0, 200)).unwrap();
    assert_eq!(detect_inflections(&ts, 7).unwrap().n, 2);
}

#[test]
fn forced_count_is_honoured() {
    let ts = TimeSeries::from_model(&single_phase(), grid(0.0, 100.0, 200)).unwrap();
    for n in 1..=3 {
        let g = detect_with_count(&ts, 7, n).unwrap();
        assert_eq!(g.n, n);
        assert_eq!(g.peak_locations.len(), n);
        assert!(g.peak_locations.windows(2).all(|w| w[0] < w[1]));
    }
}

#[test]
fn noiseless_single_phase_recovery() {
    let truth = single_phase();
    let x = grid(0.0, 100.0, 200);
    let ts = TimeSeries::from_model(&truth, x.clone()).unwrap();
    let start = Instant::now();
    let res = fit_auto(&ts);
    assert!(start.elapsed().as_secs_f64() < 5.0);
    assert!(res.converged);
    assert!(res.r_squared >= 1.0 - 1e-10, "{}", res.r_squared);
    let p = res.model.partitions()[0];
    assert!((p.delta - 43.0).abs() <= 1e-3 * 100.0, "{}", p.delta);
    let worst = x.iter().map(|&v| (res.model.eval(v) - truth.eval(v)).abs()).fold(0.0, f64::max);
    assert!(worst < 1e-6 * 1000.0, "{worst}");
}

#[test]
fn noiseless_two_phase_recovery() {
    let truth = two_phase();
    let ts = TimeSeries::from_model(&truth, grid(0.0, 100.0, 200)).unwrap();
    let res = fit_auto(&ts);
    assert_eq!(res.model.len(), 2);
    assert!(res.r_squared >= 1.0 - 1e-10, "{}", res.r_squared);
}

#[test]
fn noisy_two_phase_recovery() {
    let truth = two_phase();
    let ts = noisy_series(&truth, grid(0.0, 100.0, 200), 0.005 * 1000.0, 7);
    let opts = FitOptions::default();
    let start = Instant::now();
    let guess = detect_with_count(&ts, opts.smooth_window, 2).unwrap();
    let res = fit(&ts, &guess, &opts).unwrap();
    assert!(start.elapsed().as_secs_f64() < 5.0);
    assert!(res.r_squared >= 0.999, "{}", res.r_squared);
    for (got, want) in res.model.partitions().iter().zip(truth.partitions()) {
        assert!((got.delta - want.delta).abs() <= 0.02 * 100.0, "{} vs {}", got.delta, want.delta);
    }
}

#[test]
fn objective_history_never_increases() {
    let ts = noisy_series(&two_phase(), grid(0.0, 100.0, 150), 10.0, 3);
    let res = fit_auto(&ts);
    assert!(!res.objective_history.is_empty());
    for w in res.objective_history.windows(2) {
        assert!(w[1] <= w[0], "{w:?}");
    }
    let last = *res.objective_history.last().unwrap();
    assert!((last - res.objective).abs() <= 1e-12 * res.objective);
}

#[test]
fn returned_models_satisfy_invariants() {
    for seed in 0..5 {
        let ts = noisy_series(&two_phase(), grid(0.0, 100.0, 120), 40.0, seed);
        let res = fit_auto(&ts);
        let m = &res.model;
        assert!(NlsigModel::new(m.partitions().to_vec(), m.sign()).is_ok());
        for w in m.partitions().windows(2) {
            assert_eq!(w[1].x_min, w[0].x_max);
            assert_eq!(w[1].y_min, w[0].y_max);
        }
        assert!(res.r_squared <= 1.0);
        assert_eq!(res.residuals.len(), ts.len());
    }
}

#[test]
fn fit_is_deterministic() {
    let ts = noisy_series(&two_phase(), grid(0.0, 100.0, 150), 5.0, 11);
    assert_eq!(fit_auto(&ts), fit_auto(&ts));
}

#[test]
fn degenerate_inputs_are_rejected() {
    let x = grid(0.0, 10.0, 20);
    let flat = TimeSeries::new(x.clone(), vec![3.0; 20]).unwrap();
    let guess = InflectionGuess::equal_partition(&flat, 1).unwrap();
    assert_eq!(fit(&flat, &guess, &FitOptions::default()).unwrap_err(), NlsigError::DegenerateData);

    let d = MIN_FIT_POINTS - 1;
    let short = TimeSeries::new(grid(0.0, 1.0, d), (0..d).map(|i| i as f64).collect()).unwrap();
    let guess = InflectionGuess::equal_partition(&short, 1).unwrap();
    assert!(matches!(fit(&short, &guess, &FitOptions::default()), Err(NlsigError::SeriesTooShort { .. })));
}

#[test]
fn r_squared_reference_values() {
    let r = [1.0, 2.0, 3.0, 4.0];
    assert_eq!(r_squared(&[0.0; 4], &r).unwrap(), 1.0);
    // two-pass: mean 2.5, SS_tot = 2.25 + 0.25 + 0.25 + 2.25 = 5, SS_res = 0.04
    let v = r_squared(&[0.1, -0.1, 0.1, -0.1], &r).unwrap();
    assert!((v - 0.992).abs() < 1e-12);
    let centered: Vec<f64> = r.iter().map(|v| v - 2.5).collect();
    assert!(r_squared(&centered, &r).unwrap().abs() < 1e-15);
    assert_eq!(r_squared(&[0.0; 3], &[2.0; 3]), Err(NlsigError::DegenerateData));
}

#[test]
fn bootstrap_on_noiseless_data_collapses() {
    let ts = TimeSeries::from_model(&single_phase(), grid(0.0, 100.0, 100)).unwrap();
    let res = fit_auto(&ts);
    let boot = bootstrap(&ts, &res, &BootstrapOptions { replicates: 2, ..Default::default() }).unwrap();
    assert_eq!(boot.replicates.len(), 2);
    let params = res.model.parameters();
    for (j, p) in params.iter().enumerate() {
        let width = boot.ci_upper[j] - boot.ci_lower[j];
        assert!(width >= 0.0 && width < 1e-6 * p.abs().max(1.0), "param {j}: {width}");
    }
}

#[test]
fn bootstrap_is_reproducible_and_order_independent() {
    let ts = noisy_series(&single_phase(), grid(0.0, 100.0, 80), 8.0, 5);
    let res = fit_auto(&ts);
    let opts = BootstrapOptions { replicates: 24, seed: 99, ..Default::default() };
    let a = bootstrap(&ts, &res, &opts).unwrap();
    let b = bootstrap(&ts, &res, &opts).unwrap();
    let serial = bootstrap(&ts, &res, &BootstrapOptions { parallel: false, ..opts }).unwrap();
    assert_eq!(a, b);
    assert_eq!(a, serial);
    for (lo, hi) in a.ci_lower.iter().zip(&a.ci_upper) {
        assert!(lo <= hi);
    }
    let other = bootstrap(&ts, &res, &BootstrapOptions { seed: 100, ..opts }).unwrap();
    assert_ne!(a.replicates, other.replicates);
}

#[test]
fn bootstrap_rejects_bad_requests() {
    let ts = TimeSeries::from_model(&single_phase(), grid(0.0, 100.0, 60)).unwrap();
    let mut res = fit_auto(&ts);
    assert!(bootstrap(&ts, &res, &BootstrapOptions { replicates: 1, ..Default::default() }).is_err());
    res.converged = false;
    assert!(bootstrap(&ts, &res, &BootstrapOptions::default()).is_err());
}

#[test]
fn bootstrap_delta_coverage() {
    let truth = single_phase();
    let start = Instant::now();
    let mut hits = 0;
    for trial in 0..20 {
        let ts = noisy_series(&truth, grid(0.0, 100.0, 100), 10.0, 1000 + trial);
        let res = fit_auto(&ts);
        let boot =
            bootstrap(&ts, &res, &BootstrapOptions { replicates: 200, seed: trial, ..Default::default() })
                .unwrap();
        let (lo, hi) = boot.interval(|m| m.partitions()[0].delta);
        if (lo..=hi).contains(&43.0) {
            hits += 1;
        }
    }
    assert!(hits >= 16, "{hits}/20");
    assert!(start.elapsed().as_secs() < 120);
}
