//! Two-atom Hilbert space: product basis `{ee, eg, ge, gg}` (first letter is
//! atom A), lowering operators and the negative-frequency field operator.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::geometry::{phase_at, DetectorSetting, EmitterPair};
use crate::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

const NORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Atom {
    A,
    B,
}

/// State of the two atoms, possibly unnormalized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomicState {
    pub amp_ee: Complex64,
    pub amp_eg: Complex64,
    pub amp_ge: Complex64,
    pub amp_gg: Complex64,
    normalized: bool,
}

impl AtomicState {
    /// Unnormalized state from raw amplitudes; rejects non-finite input.
    pub fn new(ee: Complex64, eg: Complex64, ge: Complex64, gg: Complex64) -> Result<Self> {
        if [ee, eg, ge, gg].iter().any(|a| !a.is_finite()) {
            return Err(Error::NonFinite("atomic state"));
        }
        Ok(Self::raw(ee, eg, ge, gg))
    }

    fn raw(ee: Complex64, eg: Complex64, ge: Complex64, gg: Complex64) -> Self {
        Self { amp_ee: ee, amp_eg: eg, amp_ge: ge, amp_gg: gg, normalized: false }
    }

    fn basis(index: usize) -> Self {
        let mut amps = [ZERO; 4];
        amps[index] = ONE;
        Self { normalized: true, ..Self::from_array(amps) }
    }

    /// Both atoms excited.
    pub fn excited() -> Self {
        Self::basis(0)
    }

    pub fn eg() -> Self {
        Self::basis(1)
    }

    pub fn ge() -> Self {
        Self::basis(2)
    }

    pub fn ground() -> Self {
        Self::basis(3)
    }

    pub fn zero() -> Self {
        Self::raw(ZERO, ZERO, ZERO, ZERO)
    }

    fn from_array(a: [Complex64; 4]) -> Self {
        Self::raw(a[0], a[1], a[2], a[3])
    }

    pub fn amplitudes(&self) -> [Complex64; 4] {
        [self.amp_ee, self.amp_eg, self.amp_ge, self.amp_gg]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes().iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.amplitudes().iter().all(|a| a.is_finite())
    }

    /// True if the state was produced normalized and still has unit norm.
    pub fn is_normalized(&self) -> bool {
        self.normalized && (self.norm_sqr() - 1.0).abs() <= NORM_TOL
    }

    pub fn normalize(&self) -> Result<Self> {
        let n = self.norm_sqr().sqrt();
        if n == 0.0 {
            return Err(Error::ZeroState);
        }
        let mut out = Self::from_array(self.amplitudes().map(|a| a / n));
        out.normalized = true;
        Ok(out)
    }

    fn scaled(&self, c: Complex64) -> Self {
        Self::from_array(self.amplitudes().map(|a| a * c))
    }

    fn plus(&self, other: &Self) -> Self {
        let (a, b) = (self.amplitudes(), other.amplitudes());
        Self::from_array([a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]])
    }
}

/// `|g><e|` acting on the chosen atom.
pub fn lowering(atom: Atom, s: &AtomicState) -> Result<AtomicState> {
    check_finite(s)?;
    Ok(lower(atom, s))
}

fn lower(atom: Atom, s: &AtomicState) -> AtomicState {
    match atom {
        Atom::A => AtomicState::raw(ZERO, ZERO, s.amp_ee, s.amp_eg),
        Atom::B => AtomicState::raw(ZERO, s.amp_ee, ZERO, s.amp_ge),
    }
}

fn check_finite(s: &AtomicState) -> Result<()> {
    if s.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite("atomic state"))
    }
}

/// Amplitude of the radiated field, `E0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldParams {
    e0: f64,
}

impl FieldParams {
    pub const UNIT: FieldParams = FieldParams { e0: 1.0 };

    pub fn new(e0: f64) -> Result<Self> {
        if !e0.is_finite() || e0 <= 0.0 {
            return Err(Error::InvalidFieldAmplitude(e0));
        }
        Ok(Self { e0 })
    }

    pub fn e0(&self) -> f64 {
        self.e0
    }
}

/// `E(-)` with explicit per-atom path phases:
/// `(E0/sqrt2) (e^{-i phase_a} S_A + e^{-i phase_b} S_B)`.
pub fn apply_field_with_phases(
    phase_a: f64,
    phase_b: f64,
    p: &FieldParams,
    s: &AtomicState,
) -> Result<AtomicState> {
    check_finite(s)?;
    if !phase_a.is_finite() || !phase_b.is_finite() {
        return Err(Error::NonFinite("path phase"));
    }
    let pref = p.e0 * FRAC_1_SQRT_2;
    let wa = Complex64::from_polar(pref, -phase_a);
    let wb = Complex64::from_polar(pref, -phase_b);
    Ok(lower(Atom::A, s).scaled(wa).plus(&lower(Atom::B, s).scaled(wb)))
}

/// Negative-frequency field operator at detector `det`, in the gauge where
/// atom A carries no phase and atom B carries `phase_at(g, det)`.
pub fn apply_field_negative(
    g: &EmitterPair,
    det: &DetectorSetting,
    p: &FieldParams,
    s: &AtomicState,
) -> Result<AtomicState> {
    apply_field_with_phases(0.0, phase_at(g, det), p, s)
}

/// `<gg| E(-)(r2) E(-)(r1) |ee>`.
pub fn two_photon_amplitude(
    g: &EmitterPair,
    det1: &DetectorSetting,
    det2: &DetectorSetting,
    p: &FieldParams,
) -> Complex64 {
    let after_first = apply_field_negative(g, det1, p, &AtomicState::excited())
        .expect("basis state is finite");
    apply_field_negative(g, det2, p, &after_first)
        .expect("image of a finite state is finite")
        .amp_gg
}
