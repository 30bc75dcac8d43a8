//! Fixtures shared by the benchmarks.

use nlsig::{NlsigModel, Partition, Sign, TimeSeries};

/// `n` chained unit phases with evenly spaced peaks on `[0, 100]`.
pub fn chained(n: usize) -> NlsigModel {
    let w = 100.0 / n as f64;
    let parts = (0..n)
        .map(|i| {
            let a = w * i as f64;
            Partition::new(6.0, a, a + w, a + 0.5 * w, 1e3 * i as f64, 1e3 * (i + 1) as f64)
        })
        .collect();
    NlsigModel::new(parts, Sign::Increasing).expect("valid fixture")
}

pub fn grid(points: usize) -> Vec<f64> {
    (0..points).map(|i| 100.0 * i as f64 / (points - 1) as f64).collect()
}

/// `model` on a `points` grid plus a deterministic wobble of relative size `amp`.
pub fn series(model: &NlsigModel, points: usize, amp: f64) -> TimeSeries {
    let x = grid(points);
    let scale = model.ceiling() - model.floor();
    let r = x.iter().map(|&v| model.eval(v) + amp * scale * (1.7 * v).sin()).collect();
    TimeSeries::new(x, r).expect("valid fixture")
}
