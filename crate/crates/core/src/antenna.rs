//! Antenna element patterns and planar arrays.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{spherical_basis, wrap_angle, SphericalAngle, Vec3};

/// Element radiation pattern. Every element is vertically polarized, so the
/// φ field component is always zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Pattern {
    Isotropic,
    /// Parabolic-in-dB sector pattern:
    /// `att = min(12 (φ/φ3dB)², A) + min(12 (θ/θ3dB)², A)`, capped at `A`.
    Sector {
        hpbw_az_deg: f64,
        hpbw_el_deg: f64,
        max_attenuation_db: f64,
    },
}

impl Pattern {
    /// Sector element with 65° half-power beamwidth in both planes and 30 dB
    /// floor.
    pub fn sector_65() -> Self {
        Pattern::Sector {
            hpbw_az_deg: 65.0,
            hpbw_el_deg: 65.0,
            max_attenuation_db: 30.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if let Pattern::Sector {
            hpbw_az_deg,
            hpbw_el_deg,
            max_attenuation_db,
        } = *self
        {
            if !(hpbw_az_deg > 0.0 && hpbw_el_deg > 0.0) {
                return Err(Error::InvalidParameter(
                    "sector beamwidths must be positive".into(),
                ));
            }
            if !(max_attenuation_db >= 0.0) {
                return Err(Error::InvalidParameter(
                    "maximum attenuation must be non-negative".into(),
                ));
            }
        }
        Ok(())
    }

    /// Attenuation in dB relative to boresight, angle in the element frame.
    pub fn attenuation_db(&self, angle: SphericalAngle) -> f64 {
        match *self {
            Pattern::Isotropic => 0.0,
            Pattern::Sector {
                hpbw_az_deg,
                hpbw_el_deg,
                max_attenuation_db,
            } => {
                let az = angle.azimuth() / hpbw_az_deg.to_radians();
                let el = angle.elevation() / hpbw_el_deg.to_radians();
                let horizontal = (12.0 * az * az).min(max_attenuation_db);
                let vertical = (12.0 * el * el).min(max_attenuation_db);
                (horizontal + vertical).min(max_attenuation_db)
            }
        }
    }
}

/// Far-field polarimetric response `(F_θ, F_φ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarimetricResponse {
    pub f_theta: Complex64,
    pub f_phi: Complex64,
}

pub fn element_response(pattern: &Pattern, angle: SphericalAngle) -> PolarimetricResponse {
    let amplitude = 10f64.powf(-pattern.attenuation_db(angle) / 20.0);
    PolarimetricResponse {
        f_theta: Complex64::new(amplitude, 0.0),
        f_phi: Complex64::new(0.0, 0.0),
    }
}

/// Plane-wave phase of an element located at `element_pos` (in wavelengths)
/// for a wave travelling along `angle`.
pub fn array_phase(element_pos: Vec3, angle: SphericalAngle) -> Complex64 {
    let (_, _, e_r) = spherical_basis(angle);
    Complex64::from_polar(1.0, 2.0 * PI * element_pos.dot(e_r))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    Single,
    Upa { rows: usize, cols: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Array {
    /// Element positions in wavelengths, relative to the phase center, in
    /// the global frame (orientation already applied).
    positions: Vec<Vec3>,
    pattern: Pattern,
    layout: Layout,
    spacing: f64,
    /// Azimuth of the array broadside, radians.
    orientation_az: f64,
}

impl Array {
    pub fn single(pattern: Pattern) -> Self {
        Array {
            positions: vec![Vec3::ZERO],
            pattern,
            layout: Layout::Single,
            spacing: 0.0,
            orientation_az: 0.0,
        }
    }

    /// Returns the array with its broadside turned to azimuth `az`.
    pub fn oriented(mut self, az: f64) -> Self {
        let delta = az - self.orientation_az;
        for p in &mut self.positions {
            *p = p.rotate_z(delta);
        }
        self.orientation_az = wrap_angle(az);
        self
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Vec3] {
        &self.positions
    }

    pub fn pattern(&self) -> &Pattern {
        &self.pattern
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn orientation_az(&self) -> f64 {
        self.orientation_az
    }

    /// Element pattern response for a global direction.
    pub fn response(&self, angle: SphericalAngle) -> PolarimetricResponse {
        let local =
            SphericalAngle::clamped(angle.azimuth() - self.orientation_az, angle.elevation());
        element_response(&self.pattern, local)
    }

    /// Per-element plane-wave phases for a global direction.
    pub fn steering(&self, angle: SphericalAngle) -> Vec<Complex64> {
        self.positions
            .iter()
            .map(|&p| array_phase(p, angle))
            .collect()
    }
}

/// Uniform planar array in the y–z plane with broadside along +x. Rows run
/// along z, columns along y; the centroid sits at the origin.
pub fn build_upa(rows: usize, cols: usize, spacing: f64, pattern: Pattern) -> Result<Array> {
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidParameter(format!(
            "array dimensions must be positive, got {rows}x{cols}"
        )));
    }
    if !(spacing > 0.0) || !spacing.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "element spacing must be positive, got {spacing}"
        )));
    }
    pattern.validate()?;
    let y0 = (cols as f64 - 1.0) / 2.0;
    let z0 = (rows as f64 - 1.0) / 2.0;
    let mut positions = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            positions.push(Vec3::new(
                0.0,
                (c as f64 - y0) * spacing,
                (r as f64 - z0) * spacing,
            ));
        }
    }
    Ok(Array {
        positions,
        pattern,
        layout: Layout::Upa { rows, cols },
        spacing,
        orientation_az: 0.0,
    })
}
