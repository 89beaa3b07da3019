//! Channel coefficient synthesis.
//!
//! Per path `l` and antenna pair `(r, t)`:
//!
//! ```text
//! g_{r,t,l} = √P_l · F_r(aoa)ᵀ · M_l · F_t(aod) · exp(−j 2π d_l / λ)
//!             · a_r(aoa) · a_t(aod)
//! ```
//!
//! where `a_*` are the plane-wave element phases of the two arrays. The
//! frequency response on subcarrier `n` is `H_n = Σ_l G_l exp(−j 2π f_n τ_l)`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix2, Vector2};
use num_complex::Complex64;

use crate::antenna::{Array, PolarimetricResponse};
use crate::error::{Error, Result};
use crate::smallscale::{Path, PathSet};

/// 2×2 polarization coupling matrix, rows/columns ordered (θ, φ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationMatrix(pub Matrix2<Complex64>);

pub fn polarization_matrix(path: &Path) -> Result<PolarizationMatrix> {
    if !(path.xpr > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "XPR must be positive, got {}",
            path.xpr
        )));
    }
    let cross = (1.0 / path.xpr).sqrt();
    let z = |i: usize| Complex64::from_polar(1.0, path.pol_phases[i]);
    Ok(PolarizationMatrix(Matrix2::new(
        z(0),
        z(1) * cross,
        z(2) * cross,
        z(3),
    )))
}

/// MIMO coefficients of one path with its delay.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientMatrix {
    /// `n_r × n_t`.
    pub g: DMatrix<Complex64>,
    pub delay: f64,
}

fn as_vector(r: PolarimetricResponse) -> Vector2<Complex64> {
    Vector2::new(r.f_theta, r.f_phi)
}

pub fn path_coefficient(
    path: &Path,
    tx_array: &Array,
    rx_array: &Array,
    wavelength: f64,
) -> Result<CoefficientMatrix> {
    if !(wavelength > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "wavelength must be positive, got {wavelength}"
        )));
    }
    let m = polarization_matrix(path)?.0;
    let f_r = as_vector(rx_array.response(path.aoa));
    let f_t = as_vector(tx_array.response(path.aod));
    let pol = (f_r.transpose() * m * f_t)[(0, 0)];
    let common = pol
        * path.power.sqrt()
        * Complex64::from_polar(1.0, -2.0 * PI * (path.length / wavelength).fract());
    let rx_phase = rx_array.steering(path.aoa);
    let tx_phase = tx_array.steering(path.aod);
    let g = DMatrix::from_fn(rx_phase.len(), tx_phase.len(), |r, t| {
        common * rx_phase[r] * tx_phase[t]
    });
    Ok(CoefficientMatrix {
        g,
        delay: path.delay,
    })
}

/// Subcarrier frequencies relative to the start of the band.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    freqs: Vec<f64>,
}

impl FrequencyGrid {
    /// `n` samples `f_k = k · B / (n − 1)`, `k = 0..n`. A single sample sits
    /// at 0 Hz.
    pub fn new(bandwidth: f64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter(
                "need at least one subcarrier".into(),
            ));
        }
        if !(bandwidth >= 0.0) || !bandwidth.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "bandwidth must be non-negative, got {bandwidth}"
            )));
        }
        let step = if n > 1 {
            bandwidth / (n - 1) as f64
        } else {
            0.0
        };
        Ok(FrequencyGrid {
            freqs: (0..n).map(|k| k as f64 * step).collect(),
        })
    }

    pub fn from_frequencies(freqs: Vec<f64>) -> Result<Self> {
        if freqs.is_empty() {
            return Err(Error::InvalidParameter(
                "need at least one subcarrier".into(),
            ));
        }
        Ok(FrequencyGrid { freqs })
    }

    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }
}

/// Frequency-domain channel: one `n_r × n_t` slice per subcarrier.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    pub slices: Vec<DMatrix<Complex64>>,
    pub freqs: Vec<f64>,
}

impl ChannelMatrix {
    pub fn n_rx(&self) -> usize {
        self.slices[0].nrows()
    }

    pub fn n_tx(&self) -> usize {
        self.slices[0].ncols()
    }

    pub fn n_freq(&self) -> usize {
        self.slices.len()
    }
}

pub fn assemble_frequency_response(
    coeffs: &[CoefficientMatrix],
    grid: &FrequencyGrid,
) -> Result<ChannelMatrix> {
    let first = coeffs
        .first()
        .ok_or_else(|| Error::InvalidParameter("no paths to assemble".into()))?;
    let (rows, cols) = first.g.shape();
    if coeffs.iter().any(|c| c.g.shape() != (rows, cols)) {
        return Err(Error::DimensionMismatch(
            "coefficient matrices differ in shape".into(),
        ));
    }
    let slices = grid
        .freqs()
        .iter()
        .map(|&f| {
            let mut h = DMatrix::<Complex64>::zeros(rows, cols);
            for c in coeffs {
                let rot = Complex64::from_polar(1.0, -2.0 * PI * f * c.delay);
                h.zip_apply(&c.g, |acc, g| *acc += g * rot);
            }
            h
        })
        .collect();
    Ok(ChannelMatrix {
        slices,
        freqs: grid.freqs().to_vec(),
    })
}

/// Frequency response of a whole path set.
pub fn synthesize(
    paths: &PathSet,
    tx_array: &Array,
    rx_array: &Array,
    wavelength: f64,
    grid: &FrequencyGrid,
) -> Result<ChannelMatrix> {
    let coeffs = paths
        .paths
        .iter()
        .map(|p| path_coefficient(p, tx_array, rx_array, wavelength))
        .collect::<Result<Vec<_>>>()?;
    assemble_frequency_response(&coeffs, grid)
}
