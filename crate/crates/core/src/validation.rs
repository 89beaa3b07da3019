//! Monte-Carlo estimators used by the self-test and the test suites.
//!
//! Nothing here touches field construction; the estimators only call
//! [`SosField::evaluate`] and treat the field as a black box.

use std::f64::consts::PI;

use rand::Rng;

use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::Result;
use crate::geometry::Vec3;
use crate::rng;
use crate::sosfield::{AcfSpec, SosField};

/// `n` positions uniform in the cube `[0, side)³`.
pub fn uniform_positions(n: usize, side: f64, seed: u64) -> Vec<Vec3> {
    let mut r = rng::seeded(seed);
    (0..n)
        .map(|_| {
            Vec3::new(
                side * r.random::<f64>(),
                side * r.random::<f64>(),
                side * r.random::<f64>(),
            )
        })
        .collect()
}

fn unit_on_sphere(r: &mut rng::SimRng) -> Vec3 {
    let z: f64 = 2.0 * r.random::<f64>() - 1.0;
    let s = (1.0 - z * z).max(0.0).sqrt();
    let a = 2.0 * PI * r.random::<f64>();
    Vec3::new(s * a.cos(), s * a.sin(), z)
}

/// Lag direction used by [`empirical_acf_with`].
#[derive(Debug, Clone, Copy)]
pub enum LagDirection {
    Isotropic,
    Fixed(Vec3),
}

/// Empirical autocorrelation from `pairs` random position pairs with lags
/// uniform in `[0, max_lag)`, binned into `bins` equal bins. Returns
/// `(bin center, Pearson correlation)` per bin.
pub fn empirical_acf(
    field: &SosField,
    max_lag: f64,
    bins: usize,
    pairs: usize,
    region: f64,
    seed: u64,
) -> Vec<(f64, f64)> {
    empirical_acf_with(
        field,
        max_lag,
        bins,
        pairs,
        Vec3::ZERO,
        region,
        LagDirection::Isotropic,
        seed,
    )
}

#[allow(clippy::too_many_arguments)]
pub fn empirical_acf_with(
    field: &SosField,
    max_lag: f64,
    bins: usize,
    pairs: usize,
    origin: Vec3,
    region: f64,
    direction: LagDirection,
    seed: u64,
) -> Vec<(f64, f64)> {
    let mut r = rng::seeded(seed);
    let width = max_lag / bins as f64;
    let mut samples: Vec<(Vec<f64>, Vec<f64>)> = vec![(Vec::new(), Vec::new()); bins];
    for _ in 0..pairs {
        let p = origin
            + Vec3::new(
                region * r.random::<f64>(),
                region * r.random::<f64>(),
                region * r.random::<f64>(),
            );
        let lag = max_lag * r.random::<f64>();
        let dir = match direction {
            LagDirection::Isotropic => unit_on_sphere(&mut r),
            LagDirection::Fixed(d) => d,
        };
        let bin = ((lag / width) as usize).min(bins - 1);
        samples[bin].0.push(field.evaluate(p));
        samples[bin].1.push(field.evaluate(p + dir * lag));
    }
    samples
        .iter()
        .enumerate()
        .map(|(i, (a, b))| ((i as f64 + 0.5) * width, pearson(a, b)))
        .collect()
}

/// Root-mean-square deviation of binned ACF estimates from `target`.
pub fn acf_rmse(bins: &[(f64, f64)], target: impl Fn(f64) -> f64) -> f64 {
    (bins
        .iter()
        .map(|&(d, r)| (r - target(d)).powi(2))
        .sum::<f64>()
        / bins.len() as f64)
        .sqrt()
}

/// One-sample Kolmogorov–Smirnov statistic against `cdf`.
pub fn ks_statistic(values: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Pearson correlation coefficient. NaN for fewer than two samples or zero
/// variance.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    if a.len() < 2 {
        return f64::NAN;
    }
    let (ma, mb) = (mean(a), mean(b));
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    sab / (saa * sbb).sqrt()
}

fn ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut out = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for k in i..=j {
            out[idx[k]] = r;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation (average ranks for ties).
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    pearson(&ranks(a), &ranks(b))
}

/// Outcome of one self-test check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub passed: bool,
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(
            f,
            "{verdict} {}: {:.4} (limit {})",
            self.name, self.value, self.limit
        )
    }
}

pub const SELFTEST_DECORR_DISTANCES: [f64; 3] = [5.0, 15.0, 50.0];
pub const SELFTEST_ACF_PAIRS: usize = 100_000;
pub const SELFTEST_MARGINAL_SAMPLES: usize = 10_000;
pub const SELFTEST_ACF_RMSE_LIMIT: f64 = 0.05;
pub const SELFTEST_KS_LIMIT: f64 = 0.02;

/// ACF and marginal checks of freshly fitted fields: RMSE of the empirical
/// ACF against `exp(-d/d_λ)` over `[0, 3 d_λ]` and the KS distance of the
/// marginal from N(0, 1), for each of [`SELFTEST_DECORR_DISTANCES`].
pub fn sos_selftest(sinusoids: usize, seed: u64) -> Result<Vec<Check>> {
    let normal = Normal::standard();
    let per_distance = SELFTEST_DECORR_DISTANCES
        .par_iter()
        .enumerate()
        .map(|(i, &d_lambda)| {
            let s = rng::derive(seed, i as u64);
            let field =
                SosField::generate(AcfSpec::standard(d_lambda)?, sinusoids, rng::derive(s, 1))?;
            let bins = empirical_acf(
                &field,
                3.0 * d_lambda,
                30,
                SELFTEST_ACF_PAIRS,
                200.0 * d_lambda,
                rng::derive(s, 2),
            );
            let rmse = acf_rmse(&bins, |d| (-d / d_lambda).exp());
            let values: Vec<f64> = uniform_positions(
                SELFTEST_MARGINAL_SAMPLES,
                1000.0 * d_lambda,
                rng::derive(s, 3),
            )
            .into_iter()
            .map(|p| field.evaluate(p))
            .collect();
            let ks = ks_statistic(&values, |x| normal.cdf(x));
            Ok([
                Check {
                    name: format!("ACF RMSE, d_lambda = {d_lambda} m"),
                    value: rmse,
                    limit: SELFTEST_ACF_RMSE_LIMIT,
                    passed: rmse <= SELFTEST_ACF_RMSE_LIMIT,
                },
                Check {
                    name: format!("marginal KS, d_lambda = {d_lambda} m"),
                    value: ks,
                    limit: SELFTEST_KS_LIMIT,
                    passed: ks <= SELFTEST_KS_LIMIT,
                },
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_distance.into_iter().flatten().collect())
}
