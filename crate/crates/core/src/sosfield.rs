//! Sum-of-sinusoids generator for spatially correlated Gaussian fields.
//!
//! A field is
//!
//! ```text
//! k(p) = μ + Σ_n a_n cos(2π ⟨f_n, p⟩ + ψ_n),   a_n = σ √(2/N)
//! ```
//!
//! with frequency vectors drawn from the 3D spectral density of the
//! exponential autocorrelation `ρ(d) = exp(−d/d_λ)`. In three dimensions the
//! radial density of the frequency magnitude `f` is, with `u = 2π f d_λ`,
//!
//! ```text
//! p(u) = (4/π) u² / (1 + u²)²,   F(u) = (2/π) (atan u − u / (1 + u²))
//! ```
//!
//! and directions are uniform on the sphere, so the expected autocorrelation
//! `E[sin(2π f d) / (2π f d)]` equals `exp(−d/d_λ)`. The density has an
//! infinite second moment (the exponential ACF is not differentiable at 0),
//! so it is truncated at `u = MAX_NORMALIZED_FREQUENCY`. The truncated mass,
//! about `4/(π u_max)`, bounds the deviation from the target ACF; without the
//! cutoff a single far-tail draw can make a field vary on millimeter scales.
//!
//! Fields with `d_λ = 0` are spatially white: every position (quantized to
//! 1 mm) gets an independent Normal draw derived by hashing the position with
//! the field seed, so repeated queries at one position agree.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use rand::Rng;
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::rng::{self, SimRng};

/// Default number of sinusoids per field.
pub const DEFAULT_SINUSOIDS: usize = 2000;

/// Spectral cutoff in units of `1/(2π d_λ)` cycles per meter.
pub const MAX_NORMALIZED_FREQUENCY: f64 = 1000.0;

/// Position quantum used by spatially white fields, meters.
pub const WHITE_QUANTUM_M: f64 = 1e-3;

/// Target autocorrelation and marginal of a field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcfSpec {
    pub decorr_distance: f64,
    pub mean: f64,
    pub std: f64,
}

impl AcfSpec {
    pub fn new(decorr_distance: f64, mean: f64, std: f64) -> Result<Self> {
        if !(decorr_distance >= 0.0) || !decorr_distance.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "decorrelation distance must be >= 0, got {decorr_distance}"
            )));
        }
        if !(std >= 0.0) || !std.is_finite() || !mean.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "invalid marginal N({mean}, {std}^2)"
            )));
        }
        Ok(AcfSpec {
            decorr_distance,
            mean,
            std,
        })
    }

    /// Zero-mean, unit-variance field.
    pub fn standard(decorr_distance: f64) -> Result<Self> {
        Self::new(decorr_distance, 0.0, 1.0)
    }
}

/// Target autocorrelation at distance `d`.
pub fn target_acf(spec: &AcfSpec, d: f64) -> Result<f64> {
    if !(d >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "distance must be non-negative, got {d}"
        )));
    }
    if spec.decorr_distance == 0.0 {
        return Ok(if d == 0.0 { 1.0 } else { 0.0 });
    }
    Ok((-d / spec.decorr_distance).exp())
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Sinusoids {
        amplitudes: Vec<f64>,
        frequencies: Vec<[f64; 3]>,
        phases: Vec<f64>,
    },
    White {
        key: u64,
    },
}

/// One realization of a spatially correlated Gaussian field. Immutable;
/// [`SosField::evaluate`] is pure.
#[derive(Debug, Clone, PartialEq)]
pub struct SosField {
    spec: AcfSpec,
    kind: Kind,
}

/// Radial CDF of the normalized frequency magnitude `u = 2π f d_λ`.
fn radial_cdf(u: f64) -> f64 {
    (2.0 / PI) * (u.atan() - u / (1.0 + u * u))
}

/// Inverts [`radial_cdf`]. With `u = tan(s/2)` the CDF becomes
/// `(s − sin s)/π`, so this solves a Kepler-type equation by safeguarded
/// Newton iteration on `s ∈ [0, π)`.
fn radial_inverse_cdf(p: f64) -> f64 {
    let target = PI * p;
    let (mut lo, mut hi) = (0.0f64, PI);
    // s − sin s ≈ s³/6 near the origin.
    let mut s = (6.0 * target).cbrt().clamp(0.0, PI);
    for _ in 0..100 {
        let g = s - s.sin() - target;
        if g.abs() <= 4.0 * f64::EPSILON * target.max(f64::MIN_POSITIVE) {
            break;
        }
        if g < 0.0 {
            lo = s;
        } else {
            hi = s;
        }
        let next = s - g / (1.0 - s.cos());
        s = if next > lo && next < hi {
            next
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo < 1e-16 {
            break;
        }
    }
    (0.5 * s).tan()
}

fn draw_phase(rng: &mut SimRng) -> f64 {
    // random() is in [0, 1), so this is in (−π, π].
    PI - 2.0 * PI * rng.random::<f64>()
}

fn draw_phases(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng::seeded(seed);
    (0..n).map(|_| draw_phase(&mut rng)).collect()
}

/// Fits `n` sinusoids to the exponential autocorrelation in `spec`.
pub fn fit_frequencies(spec: AcfSpec, n: usize, seed: u64) -> Result<SosField> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "sinusoid count must be >= 1".into(),
        ));
    }
    if spec.decorr_distance == 0.0 {
        return Err(Error::InvalidParameter(
            "decorrelation distance 0 has no spectral fit; use SosField::white".into(),
        ));
    }
    let mut rng = rng::seeded(rng::derive(seed, 0x5f5f_f1e9));
    let scale = 1.0 / (2.0 * PI * spec.decorr_distance);
    let p_max = radial_cdf(MAX_NORMALIZED_FREQUENCY);
    let frequencies: Vec<[f64; 3]> = (0..n)
        .map(|_| {
            let p: f64 = p_max * rng.random::<f64>();
            let magnitude = radial_inverse_cdf(p) * scale;
            let cos_t: f64 = 2.0 * rng.random::<f64>() - 1.0;
            let sin_t = (1.0 - cos_t * cos_t).max(0.0).sqrt();
            let az = 2.0 * PI * rng.random::<f64>();
            [
                magnitude * sin_t * az.cos(),
                magnitude * sin_t * az.sin(),
                magnitude * cos_t,
            ]
        })
        .collect();
    let amplitude = spec.std * (2.0 / n as f64).sqrt();
    Ok(SosField {
        spec,
        kind: Kind::Sinusoids {
            amplitudes: vec![amplitude; n],
            frequencies,
            phases: draw_phases(n, rng::derive(seed, 0x9a5e)),
        },
    })
}

impl SosField {
    /// Spatially white field: independent draw per 1 mm position cell.
    pub fn white(spec: AcfSpec, seed: u64) -> Self {
        SosField {
            spec,
            kind: Kind::White {
                key: rng::derive(seed, 0x0ddc_0ffe),
            },
        }
    }

    /// Sinusoid fit for `d_λ > 0`, white field for `d_λ = 0`.
    pub fn generate(spec: AcfSpec, n: usize, seed: u64) -> Result<Self> {
        if spec.decorr_distance == 0.0 {
            Ok(Self::white(spec, seed))
        } else {
            fit_frequencies(spec, n, seed)
        }
    }

    pub fn spec(&self) -> &AcfSpec {
        &self.spec
    }

    pub fn is_white(&self) -> bool {
        matches!(self.kind, Kind::White { .. })
    }

    pub fn len(&self) -> usize {
        match &self.kind {
            Kind::Sinusoids { amplitudes, .. } => amplitudes.len(),
            Kind::White { .. } => 0,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn amplitudes(&self) -> &[f64] {
        match &self.kind {
            Kind::Sinusoids { amplitudes, .. } => amplitudes,
            Kind::White { .. } => &[],
        }
    }

    pub fn frequencies(&self) -> &[[f64; 3]] {
        match &self.kind {
            Kind::Sinusoids { frequencies, .. } => frequencies,
            Kind::White { .. } => &[],
        }
    }

    pub fn phases(&self) -> &[f64] {
        match &self.kind {
            Kind::Sinusoids { phases, .. } => phases,
            Kind::White { .. } => &[],
        }
    }

    pub fn evaluate(&self, p: Vec3) -> f64 {
        match &self.kind {
            Kind::Sinusoids {
                amplitudes,
                frequencies,
                phases,
            } => {
                let sum: f64 = amplitudes
                    .iter()
                    .zip(frequencies)
                    .zip(phases)
                    .map(|((a, f), psi)| {
                        a * (2.0 * PI * (f[0] * p.x + f[1] * p.y + f[2] * p.z) + psi).cos()
                    })
                    .sum();
                self.spec.mean + sum
            }
            Kind::White { key } => {
                let cell = |v: f64| (v / WHITE_QUANTUM_M).round() as i64 as u64;
                let mut h = *key;
                for c in [cell(p.x), cell(p.y), cell(p.z)] {
                    h = rng::mix64(h ^ c);
                }
                let u = rng::hash_to_open_unit(h);
                let z = Normal::standard().inverse_cdf(u);
                self.spec.mean + self.spec.std * z
            }
        }
    }

    /// Same amplitudes and frequencies, fresh uniform phases.
    pub fn reseed_phases(&self, seed: u64) -> SosField {
        let kind = match &self.kind {
            Kind::Sinusoids {
                amplitudes,
                frequencies,
                ..
            } => Kind::Sinusoids {
                amplitudes: amplitudes.clone(),
                frequencies: frequencies.clone(),
                phases: draw_phases(amplitudes.len(), rng::derive(seed, 0x9a5e)),
            },
            Kind::White { .. } => Kind::White {
                key: rng::derive(seed, 0x0ddc_0ffe),
            },
        };
        SosField {
            spec: self.spec,
            kind,
        }
    }

    /// Phase-averaged autocorrelation of this frequency set along isotropic
    /// lags: `(1/N) Σ sinc(2π |f_n| d)`. Converges to the target as N grows.
    pub fn model_acf(&self, d: f64) -> f64 {
        match &self.kind {
            Kind::Sinusoids { frequencies, .. } => {
                let n = frequencies.len() as f64;
                frequencies
                    .iter()
                    .map(|f| {
                        let x = 2.0 * PI * (f[0] * f[0] + f[1] * f[1] + f[2] * f[2]).sqrt() * d;
                        if x == 0.0 {
                            1.0
                        } else {
                            x.sin() / x
                        }
                    })
                    .sum::<f64>()
                    / n
            }
            Kind::White { .. } => {
                if d == 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Dumps `index,amplitude,fx,fy,fz,phase` rows for inspection.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("index,amplitude,fx,fy,fz,phase\n");
        for (i, ((a, f), psi)) in self
            .amplitudes()
            .iter()
            .zip(self.frequencies())
            .zip(self.phases())
            .enumerate()
        {
            out.push_str(&format!(
                "{i},{a:e},{:e},{:e},{:e},{psi:e}\n",
                f[0], f[1], f[2]
            ));
        }
        std::fs::File::create(path)
            .and_then(|mut f| f.write_all(out.as_bytes()))
            .map_err(|e| Error::io(path, e))
    }
}

/// Standard Normal CDF of the standardized value, in (0, 1) for finite input.
pub fn map_to_uniform(value: f64, spec: &AcfSpec) -> Result<f64> {
    if !(spec.std > 0.0) {
        return Err(Error::InvalidParameter(
            "uniform mapping needs a positive standard deviation".into(),
        ));
    }
    let z = (value - spec.mean) / spec.std;
    Ok(0.5 * erfc(-z / std::f64::consts::SQRT_2))
}
