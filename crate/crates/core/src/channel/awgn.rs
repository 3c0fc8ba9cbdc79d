use rand::Rng;
use rand_distr::StandardNormal;

use crate::rng_from_seed;
use crate::signal::SampledSignal;

/// Per-sample noise standard deviation for the given Eb/N0.
///
/// `N0 = energy_per_bit / 10^(ebn0_db / 10)` and the per-sample variance is
/// `(N0 / 2) * sample_rate`, so that a correlation against a unit-energy
/// template sees noise of variance `N0 / 2`. Returns 0 for `+inf` dB.
pub fn noise_sigma(ebn0_db: f64, energy_per_bit: f64, sample_rate: f64) -> f64 {
    if ebn0_db == f64::INFINITY {
        return 0.0;
    }
    let n0 = energy_per_bit / 10f64.powf(ebn0_db / 10.0);
    (n0 / 2.0 * sample_rate).sqrt()
}

pub fn add_awgn_in_place<R: Rng + ?Sized>(samples: &mut [f64], sigma: f64, rng: &mut R) {
    if sigma == 0.0 {
        return;
    }
    for s in samples {
        let n: f64 = rng.sample(StandardNormal);
        *s += sigma * n;
    }
}

/// Adds seeded white Gaussian noise. `ebn0_db = f64::INFINITY` returns the
/// input unchanged.
pub fn add_awgn(signal: &SampledSignal, ebn0_db: f64, energy_per_bit: f64, rng_seed: u64) -> SampledSignal {
    let mut out = signal.clone();
    let sigma = noise_sigma(ebn0_db, energy_per_bit, signal.sample_rate);
    add_awgn_in_place(&mut out.samples, sigma, &mut rng_from_seed(rng_seed));
    out
}
