#![allow(dead_code)]

use nlsig::{NlsigModel, Partition, Sign, TimeSeries};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random valid model on `[0, 10]` with `n` disjoint sub-intervals, independent
/// output ranges and a random sign.
pub fn random_model(rng: &mut ChaCha8Rng, n: usize) -> NlsigModel {
    let mut cuts: Vec<f64> = (0..n - 1).map(|_| rng.random_range(1.0..9.0)).collect();
    cuts.sort_by(f64::total_cmp);
    let mut edges = vec![0.0];
    for c in cuts {
        let last = *edges.last().unwrap();
        edges.push(c.max(last + 0.5));
    }
    edges.push(edges.last().unwrap().max(9.5) + 0.5);

    let partitions = (0..n)
        .map(|i| {
            let (lo, hi) = (edges[i], edges[i + 1]);
            let base = if rng.random_bool(0.5) { std::f64::consts::E } else { rng.random_range(1.5..6.0) };
            let y_min = rng.random_range(-2.0..2.0);
            Partition {
                base,
                lambda: rng.random_range(1.0..8.0),
                x_min: lo,
                x_max: hi,
                delta: lo + (hi - lo) * rng.random_range(0.2..0.8),
                y_min,
                y_max: y_min + rng.random_range(0.5..3.0),
            }
        })
        .collect();
    let sign = if rng.random_bool(0.5) { Sign::Increasing } else { Sign::Decreasing };
    NlsigModel::new(partitions, sign).unwrap()
}

/// Central difference with step `1e-6 · max(1, |x0|)`.
pub fn central<F: Fn(f64) -> f64>(f: F, x0: f64) -> f64 {
    let h = 1e-6 * x0.abs().max(1.0);
    (f(x0 + h) - f(x0 - h)) / (2.0 * h)
}

/// Relative error below `rel`, or absolute error below `floor`.
pub fn close(analytic: f64, reference: f64, rel: f64, floor: f64) -> bool {
    let err = (analytic - reference).abs();
    err <= floor || err <= rel * analytic.abs().max(reference.abs())
}

pub fn grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect()
}

/// Equal sub-intervals of `[lo, hi]`, peaks at the centres, unit phases chained
/// on top of each other.
pub fn chained_model(lo: f64, hi: f64, n: usize, lambda: f64) -> NlsigModel {
    let w = (hi - lo) / n as f64;
    let partitions = (0..n)
        .map(|i| {
            let a = lo + w * i as f64;
            Partition::new(lambda, a, a + w, a + 0.5 * w, i as f64, i as f64 + 1.0)
        })
        .collect();
    NlsigModel::new(partitions, Sign::Increasing).unwrap()
}

/// `model` sampled on `grid`, plus Gaussian noise with the given standard deviation.
pub fn noisy_series(model: &NlsigModel, x: Vec<f64>, sigma: f64, seed: u64) -> TimeSeries {
    let mut rng = rng(seed);
    let normal = Normal::new(0.0, sigma).unwrap();
    let r = x.iter().map(|&v| model.eval(v) + normal.sample(&mut rng)).collect();
    TimeSeries::new(x, r).unwrap()
}
