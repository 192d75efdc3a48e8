//! First- and second-order correlation functions of the two-emitter field
//! and their reading as detection probabilities.
//!
//! `G1 = E0^2` is flat, `G2 = (E0^4/2)(1 + V cos(dphi))` carries the fringe.
//! Probabilities follow by scaling with the efficiency `eta`:
//! `P(r1) = eta G1 / E0^2`, `P12(r1, r2) = eta^2 G2 / E0^4`.

use crate::error::{Error, Result};
use crate::geometry::{phase_difference, DetectorSetting, EmitterPair};
use crate::quantum::FieldParams;

/// Fringe contrast of the two-photon interference pattern.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Visibility(f64);

impl Visibility {
    pub const ONE: Visibility = Visibility(1.0);
    pub const ZERO: Visibility = Visibility(0.0);

    pub fn new(v: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidVisibility(v));
        }
        Ok(Self(v))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// Overall detection efficiency, including solid angle and quantum efficiency.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Efficiency(f64);

impl Efficiency {
    pub const ONE: Efficiency = Efficiency(1.0);

    pub fn new(eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::InvalidEfficiency(eta));
        }
        Ok(Self(eta))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

pub fn g1(p: &FieldParams) -> f64 {
    p.e0() * p.e0()
}

/// `G2` as a function of the phase difference between the two detectors.
pub fn g2_at_phase(delta_phi: f64, p: &FieldParams, v: Visibility) -> f64 {
    let e2 = p.e0() * p.e0();
    e2 * e2 / 2.0 * (1.0 + v.0 * delta_phi.cos())
}

pub fn g2(
    g: &EmitterPair,
    det1: &DetectorSetting,
    det2: &DetectorSetting,
    p: &FieldParams,
    v: Visibility,
) -> f64 {
    g2_at_phase(phase_difference(g, det1, det2), p, v)
}

/// Single-detector probability `eta G1 / E0^2`. `G1` is exactly `E0^2`, so
/// this is `eta` at every detector position.
pub fn marginal_probability(e: Efficiency, _p: &FieldParams) -> f64 {
    e.0
}

/// `eta^2 / 2 * (1 + V cos(dphi))`.
pub fn joint_probability_at_phase(delta_phi: f64, v: Visibility, e: Efficiency) -> f64 {
    e.0 * e.0 / 2.0 * (1.0 + v.0 * delta_phi.cos())
}

pub fn joint_probability(
    g: &EmitterPair,
    det1: &DetectorSetting,
    det2: &DetectorSetting,
    v: Visibility,
    e: Efficiency,
) -> f64 {
    joint_probability_at_phase(phase_difference(g, det1, det2), v, e)
}

/// Probability of a click at `det2` given a click at `det1`.
pub fn conditional_probability(
    g: &EmitterPair,
    det2_given: &DetectorSetting,
    det1: &DetectorSetting,
    p: &FieldParams,
    v: Visibility,
    e: Efficiency,
) -> Result<f64> {
    let marginal = marginal_probability(e, p);
    if marginal <= 0.0 {
        return Err(Error::ZeroMarginal);
    }
    Ok(joint_probability(g, det1, det2_given, v, e) / marginal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::angle_for_phase;
    use crate::quantum::two_photon_amplitude;
    use std::f64::consts::{FRAC_PI_2, PI, TAU};

    fn v(x: f64) -> Visibility {
        Visibility::new(x).unwrap()
    }

    fn eta(x: f64) -> Efficiency {
        Efficiency::new(x).unwrap()
    }

    #[test]
    fn type_bounds() {
        assert!(Visibility::new(-0.1).is_err());
        assert!(Visibility::new(1.0 + 1e-15).is_err());
        assert!(Visibility::new(f64::NAN).is_err());
        assert!(Visibility::new(0.0).is_ok());
        assert!(Efficiency::new(0.0).is_err());
        assert!(Efficiency::new(f64::NAN).is_err());
        assert!(Efficiency::new(1.0).is_ok());
    }

    #[test]
    fn g1_values() {
        assert_eq!(g1(&FieldParams::UNIT), 1.0);
        assert_eq!(g1(&FieldParams::new(2.0).unwrap()), 4.0);
    }

    #[test]
    fn g2_values() {
        let p = FieldParams::UNIT;
        assert_eq!(g2_at_phase(0.0, &p, v(1.0)), 1.0);
        assert!(g2_at_phase(PI, &p, v(1.0)).abs() < 1e-16);
        assert!((g2_at_phase(FRAC_PI_2, &p, v(0.8)) - 0.5).abs() < 1e-16);
    }

    #[test]
    fn marginal_values() {
        assert_eq!(marginal_probability(eta(1.0), &FieldParams::UNIT), 1.0);
        assert!((marginal_probability(eta(0.3), &FieldParams::new(3.0).unwrap()) - 0.3).abs() < 1e-16);
    }

    #[test]
    fn joint_values() {
        assert_eq!(joint_probability_at_phase(0.0, v(1.0), eta(1.0)), 1.0);
        for vis in [0.0, 0.3, 1.0] {
            assert!((joint_probability_at_phase(FRAC_PI_2, v(vis), eta(0.5)) - 0.125).abs() < 1e-16);
        }
    }

    #[test]
    fn joint_mean_over_period_is_half_eta_squared() {
        // midpoint rule on a periodic integrand is exact up to rounding
        let n = 4096;
        for vis in [0.0, 0.25, 0.7, 1.0] {
            for e in [0.2, 1.0] {
                let mean = (0..n)
                    .map(|i| joint_probability_at_phase(TAU * (i as f64 + 0.5) / n as f64, v(vis), eta(e)))
                    .sum::<f64>()
                    / n as f64;
                assert!((mean - e * e / 2.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn conditional_examples() {
        let g = EmitterPair::new(2.0 * PI).unwrap();
        let d1 = DetectorSetting::new(0.0).unwrap();
        let d_pi = angle_for_phase(&g, PI).unwrap();
        let p = FieldParams::UNIT;
        let c = conditional_probability(&g, &d_pi, &d1, &p, v(1.0), eta(1.0)).unwrap();
        assert!(c.abs() < 1e-15);
        assert_eq!(conditional_probability(&g, &d1, &d1, &p, v(1.0), eta(1.0)).unwrap(), 1.0);
    }

    #[test]
    fn g2_matches_operator_algebra_on_grid() {
        let g = EmitterPair::new(11.0).unwrap();
        let p = FieldParams::new(1.7).unwrap();
        for i in 0..100 {
            for j in 0..100 {
                let d1 = DetectorSetting::new(-1.5 + 3.0 * i as f64 / 99.0).unwrap();
                let d2 = DetectorSetting::new(-1.5 + 3.0 * j as f64 / 99.0).unwrap();
                let ops = two_photon_amplitude(&g, &d1, &d2, &p).norm_sqr();
                let analytic = g2(&g, &d1, &d2, &p, Visibility::ONE);
                assert!((ops - analytic).abs() < 1e-12, "{ops} vs {analytic}");
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn bounds_and_symmetry(kd in 0.1f64..50.0, x1 in -1.5f64..1.5, x2 in -1.5f64..1.5,
                                   vis in 0.0f64..=1.0, e in 0.01f64..=1.0, e0 in 0.1f64..3.0) {
                let g = EmitterPair::new(kd).unwrap();
                let (d1, d2) = (DetectorSetting::new(x1).unwrap(), DetectorSetting::new(x2).unwrap());
                let p = FieldParams::new(e0).unwrap();
                let val = g2(&g, &d1, &d2, &p, v(vis));
                let e4 = e0.powi(4);
                prop_assert!(val >= 0.0 && val <= e4 * (1.0 + 1e-15));
                prop_assert_eq!(val, g2(&g, &d2, &d1, &p, v(vis)));
                let joint = joint_probability(&g, &d1, &d2, v(vis), eta(e));
                prop_assert!(joint >= 0.0 && joint <= e * e * (1.0 + 1e-15));
                let c = conditional_probability(&g, &d2, &d1, &p, v(vis), eta(e)).unwrap();
                prop_assert!((c * marginal_probability(eta(e), &p) - joint).abs() <= 1e-15);
            }

            #[test]
            fn affine_in_visibility(dphi in -20.0f64..20.0, a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
                let p = FieldParams::UNIT;
                let mid = g2_at_phase(dphi, &p, v((a + b) / 2.0));
                let avg = (g2_at_phase(dphi, &p, v(a)) + g2_at_phase(dphi, &p, v(b))) / 2.0;
                prop_assert!((mid - avg).abs() < 1e-15);
            }
        }
    }
}
