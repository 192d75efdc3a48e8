//! Photon correlations from two spontaneously emitting two-level atoms.
//!
//! The crate covers the analytic first- and second-order correlation
//! functions of the far-field emission pattern, a Clauser-Horne (CH74)
//! Bell test that uses detector positions as measurement settings, a
//! reduced four-mode description of the two quantum paths, and a seeded
//! Monte Carlo model of coincidence counting.
//!
//! ```
//! use emitter_bell::bell::{bell_angle_settings, ch_statistic};
//! use emitter_bell::correlations::{Efficiency, Visibility};
//!
//! let settings = bell_angle_settings(Visibility::new(1.0).unwrap(), Efficiency::ONE);
//! let result = ch_statistic(&settings);
//! assert!((result.statistic - (2f64.sqrt() - 1.0)).abs() < 1e-12);
//! ```

pub mod bell;
pub mod cli;
pub mod config;
pub mod correlations;
pub mod error;
pub mod geometry;
pub mod montecarlo;
pub mod pathmodel;
pub mod quantum;

pub use error::{Error, Result};

/// Complex amplitude type used throughout.
pub type Complex64 = num_complex::Complex<f64>;
