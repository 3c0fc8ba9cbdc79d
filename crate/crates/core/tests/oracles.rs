mod common;

use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use uwb_core::channel::SvProfile;

#[test]
fn q_function_reference_values() {
    assert!((q(0.0) - 0.5).abs() < 1e-15);
    assert!((q(1.0) - 0.158_655_253_931_457).abs() < 1e-10);
    assert!((q(3.0) - 1.349_898_031_630_1e-3).abs() < 1e-12);
    assert!((bpam_ber(6.0) - 2.39e-3).abs() < 0.01e-3);
    assert!((ppm_ber(8.0) - 6.004e-3).abs() < 0.001e-3);
}

#[test]
fn noncentral_cdf_moments() {
    // Numerically integrate the survival function for the mean: E[X] = k + lambda.
    let (k, lambda) = (6.0, 4.0);
    let h = 0.01;
    let mean: f64 = (0..20_000)
        .map(|i| (1.0 - ncx2_cdf((i as f64 + 0.5) * h, k, lambda)) * h)
        .sum();
    assert!((mean - (k + lambda)).abs() < 1e-3, "{mean}");
}

#[test]
fn ook_oracle_matches_direct_simulation() {
    let (ebn0, window, trials) = (6.0, 20, 200_000);
    let n0 = 0.5 / db(ebn0);
    let sigma = (n0 / 2.0).sqrt();
    let amp = (1.0 / window as f64).sqrt();
    let threshold = window as f64 * n0 / 2.0 + 0.5;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut errors = 0u64;
    for t in 0..trials {
        let one = t % 2 == 1;
        let e: f64 = (0..window)
            .map(|_| {
                let n: f64 = rng.sample(StandardNormal);
                (if one { amp } else { 0.0 } + sigma * n).powi(2)
            })
            .sum();
        if (e > threshold) != one {
            errors += 1;
        }
    }
    let p = ook_ber(ebn0, window, threshold);
    assert!(within_sigma(errors, trials as u64, p, 4.0), "{errors} vs {p}");
}

#[test]
fn optimal_threshold_is_a_minimum() {
    let (t, p) = ook_optimal(10.0, 200);
    for dt in [-0.05, 0.05] {
        assert!(ook_ber(10.0, 200, t + dt) >= p);
    }
}

#[test]
fn sv_tap_count_single_cluster_limit() {
    let mut p = SvProfile::cm1_like();
    p.mean_clusters = 1e-9;
    let expect = 1.0 + p.ray_arrival_rate * p.max_excess_delay;
    assert!((sv_mean_taps(&p) - expect).abs() < 1e-6);
}
