//! Spatially consistent small-scale parameters.
//!
//! Every random draw behind a cluster (its delay, shadowing, angle signs and
//! offsets, XPR and polarization phases) is read from a spatially correlated
//! field at the receiver position. Two receivers close to each other therefore
//! read nearly the same values and see nearly the same clusters, while
//! receivers many decorrelation distances apart see independent clusters.
//!
//! Per cluster `l`, with `u` values obtained through [`map_to_uniform`]:
//!
//! ```text
//! τ'_l = −r_τ DS ln u_l,            τ_l = τ'_l − min_k τ'_k
//! P_l ∝ exp(−τ_l (r_τ − 1)/(r_τ DS)) 10^(−ζ z_l / 10),   Σ P_l = 1
//! g_l = √(−ln(P_l / max P))
//! φ_l = φ_LoS + s_l c_az σ_φ g_l + (σ_φ / 7) n_l
//! ```
//!
//! and the same form for departure azimuth and both elevations. Delays are
//! never re-sorted, so index `l` names the same cluster at every position.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{bearing, SphericalAngle, Vec3};
use crate::rng;
use crate::scenario::{Lsps, ScenarioTable};
use crate::sosfield::{map_to_uniform, AcfSpec, SosField};
use crate::SPEED_OF_LIGHT;

/// Cluster angle offset scale `c`, relative to the rms spread.
///
/// Calibrated once by Monte Carlo over independent five-cluster draws: with
/// `c = 1` the power-weighted rms spread of the generated set averages
/// 0.632 of the requested spread for any spread up to ~45°, and with
/// `c = 1.6` it averages 1.003. Above ~60° azimuth wrapping compresses the
/// measured spread (0.94 at 75°, 0.84 at 90°).
pub const SPREAD_SCALE: f64 = 1.6;

/// Smallest uniform value fed into the delay logarithm.
const UNIFORM_FLOOR: f64 = f64::EPSILON;

/// Random variables drawn per cluster.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SsfVar {
    Delay = 0,
    Shadow,
    Sign,
    AoaAzimuth,
    AoaElevation,
    AodAzimuth,
    AodElevation,
    Xpr,
    PhaseThetaTheta,
    PhaseThetaPhi,
    PhasePhiTheta,
    PhasePhiPhi,
}

/// Number of fields per cluster.
pub const VARS_PER_CLUSTER: usize = 12;

/// Polarization phases are stored in this order.
const PHASE_VARS: [SsfVar; 4] = [
    SsfVar::PhaseThetaTheta,
    SsfVar::PhaseThetaPhi,
    SsfVar::PhasePhiTheta,
    SsfVar::PhasePhiPhi,
];

/// One multipath component as seen from one receiver position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Path {
    /// Excess delay, seconds.
    pub delay: f64,
    /// Linear power; the set sums to one.
    pub power: f64,
    pub aoa: SphericalAngle,
    pub aod: SphericalAngle,
    /// Cross-polarization ratio, linear.
    pub xpr: f64,
    /// Arguments of Z_θθ, Z_θφ, Z_φθ, Z_φφ.
    pub pol_phases: [f64; 4],
    /// Path length, meters.
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathSet {
    pub paths: Vec<Path>,
    pub user_pos: Vec3,
}

impl PathSet {
    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }
}

/// All small-scale fields for `L` clusters, sharing one decorrelation
/// distance.
#[derive(Debug, Clone, PartialEq)]
pub struct SsfFieldBank {
    clusters: usize,
    decorr_distance: f64,
    fields: Vec<SosField>,
}

impl SsfFieldBank {
    pub fn clusters(&self) -> usize {
        self.clusters
    }

    pub fn decorr_distance(&self) -> f64 {
        self.decorr_distance
    }

    pub fn fields(&self) -> &[SosField] {
        &self.fields
    }

    pub fn field(&self, cluster: usize, var: SsfVar) -> &SosField {
        &self.fields[cluster * VARS_PER_CLUSTER + var as usize]
    }

    fn value(&self, cluster: usize, var: SsfVar, p: Vec3) -> f64 {
        self.field(cluster, var).evaluate(p)
    }
}

/// Builds `VARS_PER_CLUSTER · clusters` standard-Normal fields. The spectral
/// fit runs once; every field is a phase reseed of it.
pub fn build_ssf_bank(
    clusters: usize,
    decorr_distance: f64,
    sinusoids: usize,
    seed: u64,
) -> Result<SsfFieldBank> {
    if clusters == 0 {
        return Err(Error::InvalidParameter("cluster count must be >= 1".into()));
    }
    let spec = AcfSpec::standard(decorr_distance)?;
    let base = SosField::generate(spec, sinusoids, rng::derive(seed, 0x55f))?;
    let fields = (0..clusters * VARS_PER_CLUSTER)
        .map(|i| base.reseed_phases(rng::derive(seed, 0x1_0000 + i as u64)))
        .collect();
    Ok(SsfFieldBank {
        clusters,
        decorr_distance,
        fields,
    })
}

fn sign(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

pub fn generate_paths(
    bank: &SsfFieldBank,
    lsps: &Lsps,
    table: &ScenarioTable,
    tx: Vec3,
    rx: Vec3,
) -> Result<PathSet> {
    let los_arrival = bearing(rx, tx)?;
    let los_departure = bearing(tx, rx)?;
    let unit = AcfSpec::standard(bank.decorr_distance)?;
    let uniform =
        |l: usize, var: SsfVar| -> Result<f64> {
            Ok(map_to_uniform(bank.value(l, var, rx), &unit)?
                .clamp(UNIFORM_FLOOR, 1.0 - UNIFORM_FLOOR))
        };
    let n = bank.clusters;
    let r_tau = table.delay_scaling;

    let raw_delays = (0..n)
        .map(|l| Ok(-r_tau * lsps.ds * uniform(l, SsfVar::Delay)?.ln()))
        .collect::<Result<Vec<f64>>>()?;
    let min_delay = raw_delays.iter().cloned().fold(f64::INFINITY, f64::min);
    let delays: Vec<f64> = raw_delays.iter().map(|t| t - min_delay).collect();

    let mut powers: Vec<f64> = delays
        .iter()
        .enumerate()
        .map(|(l, &tau)| {
            let z = table.cluster_shadowing_db * bank.value(l, SsfVar::Shadow, rx);
            (-tau * (r_tau - 1.0) / (r_tau * lsps.ds)).exp() * 10f64.powf(-z / 10.0)
        })
        .collect();
    let total: f64 = powers.iter().sum();
    powers.iter_mut().for_each(|p| *p /= total);
    let max_power = powers.iter().cloned().fold(0.0, f64::max);

    let los_length = tx.distance(rx);
    let mut paths = Vec::with_capacity(n);
    for l in 0..n {
        let g = (-(powers[l] / max_power).ln()).max(0.0).sqrt();
        let s = sign(bank.value(l, SsfVar::Sign, rx));
        let offset = |spread: f64, var: SsfVar| {
            s * SPREAD_SCALE * spread * g + spread / 7.0 * bank.value(l, var, rx)
        };
        let aoa = SphericalAngle::clamped(
            los_arrival.azimuth() + offset(lsps.asa, SsfVar::AoaAzimuth),
            los_arrival.elevation() + offset(lsps.esa, SsfVar::AoaElevation),
        );
        let aod = SphericalAngle::clamped(
            los_departure.azimuth() + offset(lsps.asd, SsfVar::AodAzimuth),
            los_departure.elevation() + offset(lsps.esd, SsfVar::AodElevation),
        );
        let xpr_db = table.xpr_db_mean + table.xpr_db_std * bank.value(l, SsfVar::Xpr, rx);
        let mut pol_phases = [0.0; 4];
        for (slot, var) in pol_phases.iter_mut().zip(PHASE_VARS) {
            *slot = 2.0 * PI * uniform(l, var)? - PI;
        }
        paths.push(Path {
            delay: delays[l],
            power: powers[l],
            aoa,
            aod,
            xpr: 10f64.powf(xpr_db / 10.0),
            pol_phases,
            length: los_length + SPEED_OF_LIGHT * delays[l],
        });
    }
    Ok(PathSet {
        paths,
        user_pos: rx,
    })
}

/// Power-weighted rms spread of angles around their circular mean, radians.
pub fn rms_spread(angles: &[f64], powers: &[f64]) -> f64 {
    let (mut re, mut im, mut total) = (0.0, 0.0, 0.0);
    for (a, p) in angles.iter().zip(powers) {
        re += p * a.cos();
        im += p * a.sin();
        total += p;
    }
    let center = im.atan2(re);
    let var = angles
        .iter()
        .zip(powers)
        .map(|(a, p)| p * crate::geometry::wrap_angle(a - center).powi(2))
        .sum::<f64>()
        / total;
    var.sqrt()
}
