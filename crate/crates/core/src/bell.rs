//! Clauser-Horne (CH74) test with detector positions as settings.
//!
//! With joint probabilities `P12 = eta^2/2 (1 + V cos(dphi))` and the
//! fibre-coupled reference `P12(*, *) = eta^2`, the upper bound reads
//!
//! ```text
//! P(r1,r2) - P(r1,r2') + P(r1',r2) + P(r1',r2') - P(r1',*) - P(*,r2) <= 0
//! ```
//!
//! Everything here is reported in units of `P12(*, *)`, so at the Bell
//! angles the statistic is `V sqrt(2) - 1` independent of `eta`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};

use rayon::prelude::*;

use crate::correlations::{joint_probability_at_phase, Efficiency, Visibility};
use crate::error::{Error, Result};
use crate::geometry::{phase_at, DetectorSetting, EmitterPair};

/// Phases of the two settings per side plus the experimental imperfections.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChSettings {
    pub phi1: f64,
    pub phi1_prime: f64,
    pub phi2: f64,
    pub phi2_prime: f64,
    pub v: Visibility,
    pub eta: Efficiency,
}

impl ChSettings {
    pub fn new(phases: [f64; 4], v: Visibility, eta: Efficiency) -> Result<Self> {
        if phases.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("CH settings phase"));
        }
        let [phi1, phi1_prime, phi2, phi2_prime] = phases;
        Ok(Self { phi1, phi1_prime, phi2, phi2_prime, v, eta })
    }

    /// Settings from four detector positions `[r1, r1', r2, r2']`.
    pub fn from_detectors(
        g: &EmitterPair,
        dets: [DetectorSetting; 4],
        v: Visibility,
        eta: Efficiency,
    ) -> Result<Self> {
        Self::new(dets.map(|d| phase_at(g, &d)), v, eta)
    }

    pub fn phases(&self) -> [f64; 4] {
        [self.phi1, self.phi1_prime, self.phi2, self.phi2_prime]
    }

    pub fn with_visibility(self, v: Visibility) -> Self {
        Self { v, ..self }
    }

    /// Phase differences `phi_b - phi_a` of the four coincidence terms, in the
    /// order `(r1,r2), (r1,r2'), (r1',r2), (r1',r2')`.
    pub fn differences(&self) -> [f64; 4] {
        [
            self.phi2 - self.phi1,
            self.phi2_prime - self.phi1,
            self.phi2 - self.phi1_prime,
            self.phi2_prime - self.phi1_prime,
        ]
    }
}

/// Outcome of one CH evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChResult {
    /// Upper-bound margin; the inequality is violated when this is positive.
    pub statistic: f64,
    /// Distance above the lower bound `-P12(*,*)`; negative means the lower bound fails.
    pub lower_margin: f64,
    /// `[P(r1,r2), P(r1,r2'), P(r1',r2), P(r1',r2'), P(r1',*), P(*,r2)]`
    /// divided by `P12(*,*)`.
    pub terms: [f64; 6],
    /// `P12(*,*)`, the factor that turns `terms` into probabilities.
    pub star: f64,
}

impl ChResult {
    pub fn from_terms(terms: [f64; 6], star: f64) -> Self {
        let statistic = terms[0] - terms[1] + terms[2] + terms[3] - terms[4] - terms[5];
        Self { statistic, lower_margin: statistic + 1.0, terms, star }
    }

    pub fn violated(&self) -> bool {
        self.statistic > 0.0
    }

    /// The six terms as joint detection probabilities.
    pub fn probabilities(&self) -> [f64; 6] {
        self.terms.map(|t| t * self.star)
    }
}

/// Joint probability with one or both detectors fibre-coupled to a single atom.
pub fn star_probability(e: Efficiency) -> f64 {
    e.get() * e.get()
}

pub fn ch_statistic(s: &ChSettings) -> ChResult {
    let d = s.differences();
    // P12 / P12(*,*) is the joint probability at unit efficiency
    let unit = |dphi: f64| joint_probability_at_phase(dphi, s.v, Efficiency::ONE);
    let terms = [unit(d[0]), unit(d[1]), unit(d[2]), unit(d[3]), 1.0, 1.0];
    ChResult::from_terms(terms, star_probability(s.eta))
}

/// Phases `(0, pi/2, pi/4, 3pi/4)`; the coincidence differences are
/// `(pi/4, 3pi/4, -pi/4, pi/4)`.
pub fn bell_angle_settings(v: Visibility, e: Efficiency) -> ChSettings {
    ChSettings {
        phi1: 0.0,
        phi1_prime: FRAC_PI_2,
        phi2: FRAC_PI_4,
        phi2_prime: 3.0 * FRAC_PI_4,
        v,
        eta: e,
    }
}

/// Smallest visibility for which the Bell-angle statistic is positive.
pub fn critical_visibility() -> f64 {
    FRAC_1_SQRT_2
}

/// One row of a parameter scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRow {
    pub v: Visibility,
    pub settings: ChSettings,
    pub result: ChResult,
}

/// Evaluates every `(v, settings)` pair; rows ordered by visibility first,
/// then by settings. The visibility stored in each settings entry is replaced.
pub fn scan(v_grid: &[Visibility], settings_grid: &[ChSettings]) -> Result<Vec<ScanRow>> {
    if v_grid.is_empty() {
        return Err(Error::EmptyGrid("visibility"));
    }
    if settings_grid.is_empty() {
        return Err(Error::EmptyGrid("settings"));
    }
    let n = settings_grid.len();
    Ok((0..v_grid.len() * n)
        .into_par_iter()
        .map(|i| {
            let v = v_grid[i / n];
            let settings = settings_grid[i % n].with_visibility(v);
            ScanRow { v, settings, result: ch_statistic(&settings) }
        })
        .collect())
}
