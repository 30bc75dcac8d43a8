#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use chrono::{Days, NaiveDate};
use nlsig::{NlsigModel, Partition, Sign};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub fn one_phase() -> NlsigModel {
    NlsigModel::single(Partition::new(6.0, 0.0, 120.0, 55.0, 0.0, 5.0e4), Sign::Increasing).unwrap()
}

pub fn two_phase() -> NlsigModel {
    NlsigModel::new(
        vec![
            Partition::new(6.0, 0.0, 60.0, 28.0, 0.0, 3.0e4),
            Partition::new(6.0, 60.0, 140.0, 98.0, 3.0e4, 8.0e4),
        ],
        Sign::Increasing,
    )
    .unwrap()
}

/// WHO daily-report CSV with `model` sampled once per day for country `XA`
/// (optionally with multiplicative noise) and a second, unrelated country.
pub fn who_fixture(dir: &Path, model: &NlsigModel, days: u64, noise: f64, seed: u64) -> PathBuf {
    let start = NaiveDate::from_ymd_opt(2020, 1, 3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, noise.max(f64::MIN_POSITIVE)).unwrap();
    let mut out = String::from(
        "Date_reported,Country_code,Country,WHO_region,New_cases,Cumulative_cases,New_deaths,Cumulative_deaths\n",
    );
    let mut prev = 0.0;
    for d in 0..days {
        let date = start.checked_add_days(Days::new(d)).unwrap();
        let mut v = model.eval(d as f64);
        if noise > 0.0 {
            v *= 1.0 + normal.sample(&mut rng);
        }
        let cum = v.round().max(prev);
        let deaths = (cum * 0.02).round();
        writeln!(out, "{date},XA,Example Land,EURO,{},{cum},0,{deaths}", cum - prev).unwrap();
        prev = cum;
    }
    for d in 0..days {
        let date = start.checked_add_days(Days::new(d)).unwrap();
        writeln!(out, "{date},XB,Other Land,AFRO,1,{},0,0", d + 1).unwrap();
    }
    let path = dir.join("who.csv");
    std::fs::write(&path, out).unwrap();
    path
}

pub fn generic_fixture(dir: &Path, model: &NlsigModel, points: usize, lo: f64, hi: f64) -> PathBuf {
    let mut out = String::from("x,y\n");
    for i in 0..points {
        let x = lo + (hi - lo) * i as f64 / (points - 1) as f64;
        writeln!(out, "{x},{}", model.eval(x)).unwrap();
    }
    let path = dir.join("xy.csv");
    std::fs::write(&path, out).unwrap();
    path
}
