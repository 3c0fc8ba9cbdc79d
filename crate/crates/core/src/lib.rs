//! Time-hopping impulse-radio UWB physical layer simulator.
//!
//! The crate models a complete baseband link:
//!
//! - [`signal`]: Gaussian monocycle pulses, sampled waveforms and correlation.
//! - [`framing`]: time-hopping frame geometry, data rate and TH-code memory.
//! - [`transmitter`]: TH-OOK, TH-BPAM and TH-PPM pulse-train generation.
//! - [`channel`]: AWGN, clustered multipath and the ADC quantizer.
//! - [`receiver`]: matched-filter sync plus energy-detection, single- and
//!   double-correlation demodulators, in float or quantized datapath.
//! - [`reconfig`]: runtime PHY reconfiguration driven by MAC-level requests.
//! - [`harness`]: seeded Monte Carlo BER sweeps, presets and CSV output.

pub mod channel;
pub mod error;
pub mod framing;
pub mod harness;
pub mod receiver;
pub mod reconfig;
pub mod signal;
pub mod transmitter;

pub use error::{Error, Result};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// RNG used for every seeded operation in the crate.
pub type SimRng = ChaCha8Rng;

pub(crate) fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Converts a duration to a whole number of sample periods.
///
/// Fails unless `t * sample_rate` is an integer to within 1e-6 samples.
pub fn exact_samples(t: f64, sample_rate: f64) -> Option<usize> {
    if !(t.is_finite() && sample_rate.is_finite()) || t < 0.0 || sample_rate <= 0.0 {
        return None;
    }
    let n = t * sample_rate;
    let rounded = n.round();
    if (n - rounded).abs() <= 1e-6 {
        Some(rounded as usize)
    } else {
        None
    }
}
