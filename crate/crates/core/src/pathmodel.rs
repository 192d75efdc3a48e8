//! Reduced four-mode description of the two quantum paths.
//!
//! After post-selecting one photon per detector, the emitted pair lives in
//! modes `k1..k4`: either `k1` and `k4` are occupied, or `k2` and `k3`.
//! Detector operators remove one photon each, tagging the `k2`/`k4` branch
//! with the detector phase, and the two paths interfere in the final vacuum
//! amplitude.
//!
//! Kets are stored in a 16-entry array indexed by the occupation bits
//! `n1 n2 n3 n4` read as a binary number, so `|1001>` is index 9.

use std::fmt;

use nalgebra::DMatrix;

use crate::correlations::Visibility;
use crate::error::{Error, Result};
use crate::quantum::FieldParams;
use crate::Complex64;

pub const DEFAULT_SCHMIDT_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const N_MODES: usize = 4;
const DIM: usize = 1 << N_MODES;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Mode {
    K1,
    K2,
    K3,
    K4,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::K1, Mode::K2, Mode::K3, Mode::K4];

    /// Bit position of this mode inside a ket index.
    fn bit(self) -> usize {
        N_MODES - 1 - self as usize
    }
}

/// Occupation-number ket `|n1 n2 n3 n4>` with `n_i` in `{0, 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ket(u8);

impl Ket {
    pub fn new(occupations: [u8; 4]) -> Result<Self> {
        if occupations.iter().any(|&n| n > 1) {
            return Err(Error::InvalidKet(format!(
                "occupations must be 0 or 1, got {occupations:?}"
            )));
        }
        Ok(Self(occupations.iter().fold(0, |acc, &n| (acc << 1) | n)))
    }

    /// Parses `"1001"` style labels.
    pub fn parse(label: &str) -> Result<Self> {
        let bytes = label.as_bytes();
        if bytes.len() != N_MODES || bytes.iter().any(|b| !matches!(b, b'0' | b'1')) {
            return Err(Error::InvalidKet(format!("bad ket label {label:?}")));
        }
        let mut occ = [0u8; 4];
        for (o, b) in occ.iter_mut().zip(bytes) {
            *o = b - b'0';
        }
        Self::new(occ)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn occupation(self, mode: Mode) -> u8 {
        (self.0 >> mode.bit()) & 1
    }

    pub fn photon_number(self) -> u32 {
        self.0.count_ones()
    }
}

impl fmt::Display for Ket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{:04b}>", self.0)
    }
}

fn ket(label: &str) -> usize {
    Ket::parse(label).expect("static ket label").index()
}

/// Pure state over the 16 occupation kets of modes `k1..k4`, unnormalized in general.
#[derive(Debug, Clone, PartialEq)]
pub struct FourModeState {
    amps: [Complex64; DIM],
}

impl FourModeState {
    pub fn zero() -> Self {
        Self { amps: [ZERO; DIM] }
    }

    pub fn from_amplitudes(amps: [Complex64; DIM]) -> Result<Self> {
        if amps.iter().any(|a| !a.is_finite()) {
            return Err(Error::NonFinite("four-mode state"));
        }
        Ok(Self { amps })
    }

    /// Superposition of the given kets with the given amplitudes.
    pub fn from_terms(terms: &[(Ket, Complex64)]) -> Result<Self> {
        let mut amps = [ZERO; DIM];
        for (k, a) in terms {
            amps[k.index()] += *a;
        }
        Self::from_amplitudes(amps)
    }

    pub fn basis(k: Ket) -> Self {
        let mut s = Self::zero();
        s.amps[k.index()] = Complex64::new(1.0, 0.0);
        s
    }

    pub fn amplitude(&self, k: Ket) -> Complex64 {
        self.amps[k.index()]
    }

    pub fn amplitudes(&self) -> &[Complex64; DIM] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.amps.iter().all(|a| *a == ZERO)
    }

    /// Nonzero components with their kets, in index order.
    pub fn support(&self) -> impl Iterator<Item = (Ket, Complex64)> + '_ {
        self.amps
            .iter()
            .enumerate()
            .filter(|(_, a)| **a != ZERO)
            .map(|(i, a)| (Ket(i as u8), *a))
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self { amps: self.amps.map(|a| a * c) }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut amps = self.amps;
        for (a, b) in amps.iter_mut().zip(other.amps.iter()) {
            *a += b;
        }
        Self { amps }
    }
}

/// The post-selected two-photon state `|1001> + |0110>`, optionally normalized.
pub fn postselected_state(normalized: bool) -> FourModeState {
    let c = if normalized { std::f64::consts::FRAC_1_SQRT_2 } else { 1.0 };
    let mut s = FourModeState::zero();
    s.amps[ket("1001")] = Complex64::new(c, 0.0);
    s.amps[ket("0110")] = Complex64::new(c, 0.0);
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectionStage {
    First,
    Second,
}

/// Applies the detector operator of the given stage.
///
/// First: `|0001><1001| + e^{i phase} |0010><0110|`.
/// Second: `|0000><0010| + e^{i phase} |0000><0001|`.
pub fn apply_detector(stage: DetectionStage, phase: f64, s: &FourModeState) -> Result<FourModeState> {
    if !phase.is_finite() {
        return Err(Error::NonFinite("detector phase"));
    }
    if s.amps.iter().any(|a| !a.is_finite()) {
        return Err(Error::NonFinite("four-mode state"));
    }
    let tag = Complex64::from_polar(1.0, phase);
    let mut out = FourModeState::zero();
    match stage {
        DetectionStage::First => {
            out.amps[ket("0001")] = s.amps[ket("1001")];
            out.amps[ket("0010")] = tag * s.amps[ket("0110")];
        }
        DetectionStage::Second => {
            out.amps[ket("0000")] = s.amps[ket("0010")] + tag * s.amps[ket("0001")];
        }
    }
    Ok(out)
}

/// Vacuum amplitude left after both detections, `e^{i phi2} + e^{i phi1}`.
pub fn final_amplitude(phi1: f64, phi2: f64) -> Complex64 {
    Complex64::from_polar(1.0, phi2) + Complex64::from_polar(1.0, phi1)
}

/// Path-model coincidence signal `1 + V cos(phi2 - phi1)`.
pub fn g2_path(phi1: f64, phi2: f64, v: Visibility) -> f64 {
    1.0 + v.get() * (phi2 - phi1).cos()
}

/// `G2` rebuilt from the path amplitude in field units: `(E0^4/4) |e^{i phi2} + e^{i phi1}|^2`.
///
/// With the unnormalized post-selected state and unnormalized detector
/// operators, this constant makes the path picture agree with the field
/// operator calculation.
pub fn g2_from_paths(phi1: f64, phi2: f64, p: &FieldParams) -> f64 {
    let e2 = p.e0() * p.e0();
    e2 * e2 / 4.0 * final_amplitude(phi1, phi2).norm_sqr()
}

/// Split of the four modes into two nonempty, complementary groups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bipartition {
    left: Vec<Mode>,
    right: Vec<Mode>,
}

impl Bipartition {
    pub fn new(left: &[Mode]) -> Result<Self> {
        let mut l = left.to_vec();
        l.sort();
        let before = l.len();
        l.dedup();
        if l.len() != before {
            return Err(Error::InvalidBipartition("duplicate mode on left side".into()));
        }
        if l.is_empty() || l.len() == N_MODES {
            return Err(Error::InvalidBipartition("both sides must be nonempty".into()));
        }
        let right = Mode::ALL.iter().copied().filter(|m| !l.contains(m)).collect();
        Ok(Self { left: l, right })
    }

    pub fn left(&self) -> &[Mode] {
        &self.left
    }

    pub fn right(&self) -> &[Mode] {
        &self.right
    }

    fn sub_index(modes: &[Mode], k: Ket) -> usize {
        modes.iter().fold(0, |acc, &m| (acc << 1) | k.occupation(m) as usize)
    }

    /// The state reshaped into a (left occupations) x (right occupations) matrix.
    pub fn reshape(&self, s: &FourModeState) -> DMatrix<Complex64> {
        let mut m = DMatrix::from_element(1 << self.left.len(), 1 << self.right.len(), ZERO);
        for (i, a) in s.amps.iter().enumerate() {
            let k = Ket(i as u8);
            m[(Self::sub_index(&self.left, k), Self::sub_index(&self.right, k))] = *a;
        }
        m
    }
}

/// Schmidt coefficients of the normalized state across `b`, largest first.
pub fn schmidt_coefficients(s: &FourModeState, b: &Bipartition) -> Result<Vec<f64>> {
    let norm = s.norm_sqr().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::ZeroState);
    }
    let m = b.reshape(s) / Complex64::new(norm, 0.0);
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(sv)
}

/// Number of singular values above `tol` times the largest one.
pub fn schmidt_rank(s: &FourModeState, b: &Bipartition, tol: f64) -> Result<usize> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidTolerance(tol));
    }
    let sv = schmidt_coefficients(s, b)?;
    let cutoff = tol * sv[0];
    Ok(sv.iter().filter(|&&x| x > cutoff).count())
}
