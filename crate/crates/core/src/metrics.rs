//! Similarity metrics between the channels of two users.
//!
//! Angular distances compare index-aligned clusters. The covariance metrics
//! compare transmit-side covariance matrices `R = E[Hᴴ H]`, where the
//! expectation is taken over the subcarrier grid.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::coeff::ChannelMatrix;
use crate::error::{Error, Result};
use crate::smallscale::PathSet;

/// Absolute azimuth difference, taking the short way around the circle.
pub fn azimuth_distance(phi_i: f64, phi_j: f64) -> f64 {
    let d = (phi_i - phi_j).abs();
    if d < PI {
        d
    } else {
        2.0 * PI - d
    }
}

pub fn elevation_distance(theta_i: f64, theta_j: f64) -> Result<f64> {
    for t in [theta_i, theta_j] {
        if !(-FRAC_PI_2..=FRAC_PI_2).contains(&t) {
            return Err(Error::InvalidAngle(format!(
                "elevation {t} outside [-pi/2, pi/2]"
            )));
        }
    }
    Ok((theta_i - theta_j).abs())
}

#[derive(Debug, Clone, PartialEq)]
pub struct AngularDistanceReport {
    pub per_path_azimuth: Vec<f64>,
    pub per_path_elevation: Vec<f64>,
    pub azimuth: f64,
    pub elevation: f64,
}

/// Mean arrival-angle distances over index-aligned clusters.
pub fn average_angular_distance(a: &PathSet, b: &PathSet) -> Result<AngularDistanceReport> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "path sets have {} and {} clusters",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::DimensionMismatch("empty path sets".into()));
    }
    let per_path_azimuth: Vec<f64> = a
        .paths
        .iter()
        .zip(&b.paths)
        .map(|(p, q)| azimuth_distance(p.aoa.azimuth(), q.aoa.azimuth()))
        .collect();
    let per_path_elevation = a
        .paths
        .iter()
        .zip(&b.paths)
        .map(|(p, q)| elevation_distance(p.aoa.elevation(), q.aoa.elevation()))
        .collect::<Result<Vec<f64>>>()?;
    let n = a.len() as f64;
    Ok(AngularDistanceReport {
        azimuth: per_path_azimuth.iter().sum::<f64>() / n,
        elevation: per_path_elevation.iter().sum::<f64>() / n,
        per_path_azimuth,
        per_path_elevation,
    })
}

/// Hermitian positive semidefinite `n_t × n_t` covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct Covariance(pub DMatrix<Complex64>);

impl Covariance {
    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }
}

/// `R = (1/n_f) Σ_n H_nᴴ H_n`.
pub fn covariance(h: &ChannelMatrix) -> Covariance {
    let n_t = h.n_tx();
    let mut r = DMatrix::<Complex64>::zeros(n_t, n_t);
    for slice in &h.slices {
        r += slice.adjoint() * slice;
    }
    r /= Complex64::new(h.n_freq() as f64, 0.0);
    // Exact Hermitian symmetry; the product is Hermitian up to rounding.
    let r = (&r + r.adjoint()) * Complex64::new(0.5, 0.0);
    Covariance(r)
}

fn check_dims(r1: &Covariance, r2: &Covariance) -> Result<()> {
    if r1.0.shape() != r2.0.shape() {
        return Err(Error::DimensionMismatch(format!(
            "covariances are {:?} and {:?}",
            r1.0.shape(),
            r2.0.shape()
        )));
    }
    Ok(())
}

/// `‖R1 R1ᴴ − R2 R2ᴴ‖²_F`.
pub fn chordal_distance(r1: &Covariance, r2: &Covariance) -> Result<f64> {
    check_dims(r1, r2)?;
    let a = &r1.0 * r1.0.adjoint();
    let b = &r2.0 * r2.0.adjoint();
    Ok((a - b).norm_squared())
}

/// `Tr(R1ᴴ R2) / (‖R1‖_F ‖R2‖_F)`: 1 for collinear, 0 for orthogonal
/// covariances.
pub fn cmd_similarity(r1: &Covariance, r2: &Covariance) -> Result<f64> {
    check_dims(r1, r2)?;
    let (s1, s2) = (r1.0.norm_squared(), r2.0.norm_squared());
    if s1 == 0.0 || s2 == 0.0 {
        return Err(Error::UndefinedSimilarity(
            "CMD similarity of a zero matrix".into(),
        ));
    }
    // Tr(AᴴB) = Σ_ij conj(A_ij) B_ij.
    let trace: Complex64 =
        r1.0.iter()
            .zip(r2.0.iter())
            .map(|(a, b)| a.conj() * b)
            .sum();
    // One square root keeps (R, R) and (R, αR) at exactly 1.
    let denom = (s1 * s2).sqrt();
    if trace.im.abs() > 1e-10 * denom {
        return Err(Error::UndefinedSimilarity(format!(
            "trace has imaginary part {} (non-Hermitian input)",
            trace.im
        )));
    }
    Ok(trace.re / denom)
}
