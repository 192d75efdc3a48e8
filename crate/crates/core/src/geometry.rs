//! Far-field geometry of the emitter pair.
//!
//! Atom A sits at the phase origin and atom B picks up the relative phase
//! `kd * sin(xi)` at a detector seen under the angle `xi`, measured from the
//! perpendicular bisector of the emitter axis.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

/// Two emitters separated by `d`, described by the dimensionless product `k * d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmitterPair {
    kd: f64,
}

impl EmitterPair {
    pub fn new(kd: f64) -> Result<Self> {
        if !kd.is_finite() || kd <= 0.0 {
            return Err(Error::InvalidSeparation(kd));
        }
        Ok(Self { kd })
    }

    /// Builds the pair from a separation and a transition wavelength in the same unit.
    pub fn from_separation(d: f64, wavelength: f64) -> Result<Self> {
        Self::new(2.0 * std::f64::consts::PI / wavelength * d)
    }

    pub fn kd(&self) -> f64 {
        self.kd
    }
}

/// A far-field detector position, given by its observation angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorSetting {
    xi: f64,
}

impl DetectorSetting {
    pub fn new(xi: f64) -> Result<Self> {
        if !xi.is_finite() || xi.abs() > FRAC_PI_2 {
            return Err(Error::InvalidAngle(xi));
        }
        Ok(Self { xi })
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }
}

/// Relative phase between the two emission paths at `det`.
pub fn phase_at(g: &EmitterPair, det: &DetectorSetting) -> f64 {
    g.kd * det.xi.sin()
}

/// `phase_at(g, det_b) - phase_at(g, det_a)`.
pub fn phase_difference(g: &EmitterPair, det_a: &DetectorSetting, det_b: &DetectorSetting) -> f64 {
    phase_at(g, det_b) - phase_at(g, det_a)
}

/// Detector angle at which the path phase equals `phase`.
pub fn angle_for_phase(g: &EmitterPair, phase: f64) -> Result<DetectorSetting> {
    if !phase.is_finite() {
        return Err(Error::NonFinite("phase"));
    }
    let s = phase / g.kd;
    if s.abs() > 1.0 {
        return Err(Error::UnreachablePhase { target: phase, kd: g.kd });
    }
    DetectorSetting::new(s.asin())
}
