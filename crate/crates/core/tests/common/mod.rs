//! Independent reference values for the statistical tests.
#![allow(dead_code)]

use statrs::distribution::{ChiSquared, ContinuousCDF, Discrete, DiscreteCDF, Gamma, Poisson};
use statrs::function::erf::erfc;

use uwb_core::channel::SvProfile;

/// Gaussian tail probability.
pub fn q(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

pub fn db(x: f64) -> f64 {
    10f64.powf(x / 10.0)
}

/// Antipodal signaling in AWGN.
pub fn bpam_ber(ebn0_db: f64) -> f64 {
    q((2.0 * db(ebn0_db)).sqrt())
}

/// Orthogonal binary signaling in AWGN.
pub fn ppm_ber(ebn0_db: f64) -> f64 {
    q(db(ebn0_db).sqrt())
}

/// CDF of the noncentral chi-square as a Poisson mixture of central ones.
pub fn ncx2_cdf(x: f64, dof: f64, lambda: f64) -> f64 {
    if lambda == 0.0 {
        return ChiSquared::new(dof).unwrap().cdf(x);
    }
    let mix = Poisson::new(lambda / 2.0).unwrap();
    let terms = (lambda + 20.0 * lambda.sqrt() + 50.0) as u64;
    (0..terms)
        .map(|j| mix.pmf(j) * ChiSquared::new(dof + 2.0 * j as f64).unwrap().cdf(x))
        .sum()
}

/// Energy detector over `window` samples of real white noise, unit pulse
/// energy fully inside the window, equiprobable bits with `Eb = 1/2`.
/// Returns the error probability at `threshold` (window-energy units).
pub fn ook_ber(ebn0_db: f64, window: usize, threshold: f64) -> f64 {
    let n0 = 0.5 / db(ebn0_db);
    let scaled = threshold / (n0 / 2.0);
    let dof = window as f64;
    let false_alarm = 1.0 - ncx2_cdf(scaled, dof, 0.0);
    let miss = ncx2_cdf(scaled, dof, 2.0 / n0);
    0.5 * (false_alarm + miss)
}

/// Threshold minimizing [`ook_ber`], by golden-section search over a
/// bracket around the two conditional means.
pub fn ook_optimal(ebn0_db: f64, window: usize) -> (f64, f64) {
    let n0 = 0.5 / db(ebn0_db);
    let (mut a, mut b) = (window as f64 * n0 / 2.0, window as f64 * n0 / 2.0 + 1.0);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let c = b - phi * (b - a);
        let d = a + phi * (b - a);
        if ook_ber(ebn0_db, window, c) < ook_ber(ebn0_db, window, d) {
            b = d;
        } else {
            a = c;
        }
    }
    let t = 0.5 * (a + b);
    (t, ook_ber(ebn0_db, window, t))
}

/// Expected number of taps from the clustered generator: every cluster that
/// starts before the horizon contributes its first ray plus a Poisson count
/// of later rays over the remaining span. Delays and rates in ns.
pub fn sv_mean_taps(p: &SvProfile) -> f64 {
    let d = p.max_excess_delay;
    let lambda = p.ray_arrival_rate;
    let clusters = Poisson::new(p.mean_clusters).unwrap();
    let mut total = 1.0 + lambda * d;
    let max_clusters = (p.mean_clusters + 20.0 * p.mean_clusters.sqrt() + 50.0) as u64;
    for l in 1..max_clusters {
        // P(L > l) with L = max(1, Poisson).
        let survive = clusters.sf(l);
        let arrival = Gamma::new(l as f64, p.cluster_arrival_rate).unwrap();
        let before = arrival.cdf(d);
        let mean_before =
            l as f64 / p.cluster_arrival_rate * Gamma::new(l as f64 + 1.0, p.cluster_arrival_rate).unwrap().cdf(d);
        total += survive * ((1.0 + lambda * d) * before - lambda * mean_before);
    }
    total
}

pub fn binomial_sigma(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// `|observed - p| <= k * sigma(p, n)`, with a floor of one count for
/// vanishing probabilities.
pub fn within_sigma(errors: u64, n: u64, p: f64, k: f64) -> bool {
    let observed = errors as f64 / n as f64;
    let sigma = binomial_sigma(p, n).max(1.0 / n as f64);
    (observed - p).abs() <= k * sigma
}
