//! Seeded coincidence-counting runs for the CH test.
//!
//! Each trial is one excitation cycle of the emitter pair. For each of the
//! four coincidence settings, a trial registers a coincidence with the
//! joint detection probability `P12`. The star terms are exact constants.
//!
//! Trials are drawn in fixed-size batches; every `(term, batch)` pair owns a
//! separate ChaCha stream derived from the seed, so counts do not depend on
//! how rayon schedules the work.

use rand::distr::{Bernoulli, Distribution};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bell::{star_probability, ChSettings};
use crate::correlations::joint_probability_at_phase;
use crate::error::{Error, Result};

const BATCH: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub seed: u64,
    pub trials_per_setting: u64,
    pub settings: ChSettings,
}

impl McConfig {
    pub fn new(seed: u64, trials_per_setting: u64, settings: ChSettings) -> Result<Self> {
        let cfg = Self { seed, trials_per_setting, settings };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.trials_per_setting == 0 {
            return Err(Error::ZeroTrials);
        }
        if self.settings.phases().iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("CH settings phase"));
        }
        Ok(())
    }

    /// Coincidence probability per trial for the four terms.
    pub fn term_probabilities(&self) -> [f64; 4] {
        let s = &self.settings;
        s.differences()
            .map(|d| joint_probability_at_phase(d, s.v, s.eta).clamp(0.0, 1.0))
    }
}

/// Coincidence counts for `(r1,r2), (r1,r2'), (r1',r2), (r1',r2')`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Counts(pub [u64; 4]);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub statistic_hat: f64,
    pub std_error: f64,
    pub counts: Counts,
    pub trials: u64,
}

impl McEstimate {
    /// Distance of the estimate above zero in units of its standard error.
    pub fn sigma_violation(&self) -> f64 {
        self.statistic_hat / self.std_error
    }
}

fn batch_rng(seed: u64, term: usize, batch: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((term as u64) << 40) | batch);
    rng
}

fn count_term(seed: u64, term: usize, p: f64, trials: u64) -> u64 {
    let coin = Bernoulli::new(p).expect("probability clamped to [0, 1]");
    let batches = trials.div_ceil(BATCH);
    (0..batches)
        .into_par_iter()
        .map(|b| {
            let n = BATCH.min(trials - b * BATCH);
            let mut rng = batch_rng(seed, term, b);
            (0..n).filter(|_| coin.sample(&mut rng)).count() as u64
        })
        .sum()
}

pub fn simulate_counts(cfg: &McConfig) -> Result<Counts> {
    cfg.validate()?;
    let probs = cfg.term_probabilities();
    let counts: Vec<u64> = (0..4)
        .into_par_iter()
        .map(|t| count_term(cfg.seed, t, probs[t], cfg.trials_per_setting))
        .collect();
    Ok(Counts([counts[0], counts[1], counts[2], counts[3]]))
}

/// Plug-in estimate of the normalized CH statistic from a set of counts.
///
/// The standard error propagates independent binomial variances
/// `p(1-p)/n` of the four sampled terms.
pub fn estimate_from_counts(counts: Counts, trials: u64, settings: &ChSettings) -> McEstimate {
    let n = trials as f64;
    let star = star_probability(settings.eta);
    let p = counts.0.map(|c| c as f64 / n);
    let signed = p[0] - p[1] + p[2] + p[3];
    let statistic_hat = (signed - 2.0 * star) / star;
    let var: f64 = p.iter().map(|q| q * (1.0 - q) / n).sum();
    McEstimate { statistic_hat, std_error: var.sqrt() / star, counts, trials }
}

pub fn estimate_ch(cfg: &McConfig) -> Result<McEstimate> {
    let counts = simulate_counts(cfg)?;
    Ok(estimate_from_counts(counts, cfg.trials_per_setting, &cfg.settings))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::{bell_angle_settings, ch_statistic};
    use crate::correlations::{Efficiency, Visibility};
    use std::f64::consts::{PI, SQRT_2};

    fn v(x: f64) -> Visibility {
        Visibility::new(x).unwrap()
    }

    fn bell(vis: f64) -> ChSettings {
        bell_angle_settings(v(vis), Efficiency::ONE)
    }

    #[test]
    fn rejects_zero_trials() {
        assert_eq!(McConfig::new(1, 0, bell(1.0)), Err(Error::ZeroTrials));
    }

    #[test]
    fn certain_outcomes() {
        let dark = ChSettings::new([0.0, 0.0, PI, PI], v(1.0), Efficiency::ONE).unwrap();
        let cfg = McConfig::new(9, 10_000, dark).unwrap();
        assert_eq!(simulate_counts(&cfg).unwrap(), Counts([0; 4]));

        let bright = ChSettings::new([0.3; 4], v(1.0), Efficiency::ONE).unwrap();
        let cfg = McConfig::new(9, 70_001, bright).unwrap();
        assert_eq!(simulate_counts(&cfg).unwrap(), Counts([70_001; 4]));
    }

    #[test]
    fn counts_follow_binomial_law() {
        let cfg = McConfig::new(2024, 1_000_000, bell(0.9)).unwrap();
        let counts = simulate_counts(&cfg).unwrap();
        let n = cfg.trials_per_setting as f64;
        for (c, p) in counts.0.iter().zip(cfg.term_probabilities()) {
            let sd = (n * p * (1.0 - p)).sqrt();
            assert!((*c as f64 - n * p).abs() < 5.0 * sd, "count {c} vs mean {}", n * p);
        }
    }

    #[test]
    fn reproducible_across_thread_pools() {
        let cfg = McConfig::new(77, 300_000, bell(0.8)).unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| estimate_ch(&cfg).unwrap())
        };
        let one = run(1);
        let many = run(4);
        assert_eq!(one.counts, many.counts);
        assert_eq!(one.statistic_hat.to_bits(), many.statistic_hat.to_bits());
        assert_eq!(one.std_error.to_bits(), many.std_error.to_bits());
        assert_ne!(estimate_ch(&McConfig { seed: 78, ..cfg }).unwrap().counts, one.counts);
    }

    #[test]
    fn recovers_bell_value() {
        let est = estimate_ch(&McConfig::new(5, 1_000_000, bell(1.0)).unwrap()).unwrap();
        assert!((est.statistic_hat - (SQRT_2 - 1.0)).abs() < 5.0 * est.std_error);
        assert!(est.sigma_violation() > 5.0);
    }

    #[test]
    fn no_spurious_violation_below_threshold() {
        let est = estimate_ch(&McConfig::new(6, 1_000_000, bell(0.5)).unwrap()).unwrap();
        assert!(est.statistic_hat + 3.0 * est.std_error < 0.0);
    }

    #[test]
    fn single_trial_is_well_defined() {
        for seed in 0..20 {
            let est = estimate_ch(&McConfig::new(seed, 1, bell(0.9)).unwrap()).unwrap();
            assert!(est.std_error.is_finite() && est.std_error >= 0.0);
            // signed count sum in {-1, .., 3} minus 2
            let lattice = est.statistic_hat + 2.0;
            assert_eq!(lattice, lattice.round());
            assert!((-1.0..=3.0).contains(&lattice));
            assert!(est.counts.0.iter().all(|&c| c <= 1));
        }
    }

    #[test]
    fn error_shrinks_with_sample_size() {
        let exact = ch_statistic(&bell(0.9)).statistic;
        let mean_err = |trials| {
            (0..8)
                .map(|seed| {
                    let e = estimate_ch(&McConfig::new(seed, trials, bell(0.9)).unwrap()).unwrap();
                    (e.statistic_hat - exact).abs()
                })
                .sum::<f64>()
                / 8.0
        };
        let errs: Vec<f64> = [1_000, 10_000, 100_000, 1_000_000].into_iter().map(mean_err).collect();
        for w in errs.windows(2) {
            assert!(w[1] < w[0], "{errs:?}");
        }
    }

    #[test]
    fn two_sigma_coverage_is_calibrated() {
        let exact = ch_statistic(&bell(0.9)).statistic;
        let covered = (0..200u64)
            .filter(|&seed| {
                let e = estimate_ch(&McConfig::new(seed, 10_000, bell(0.9)).unwrap()).unwrap();
                (e.statistic_hat - exact).abs() <= 2.0 * e.std_error
            })
            .count();
        let frac = covered as f64 / 200.0;
        assert!((0.90..=0.99).contains(&frac), "coverage {frac}");
    }
}
