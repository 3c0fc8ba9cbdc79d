use crate::signal::SampledSignal;
use crate::{Error, Result};

/// Uniform mid-rise ADC: `2^bits` levels over `[-full_scale, +full_scale]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantizerConfig {
    bits: u32,
    full_scale: f64,
    step: f64,
    top_level: f64,
}

// From here on the lattice step is at or below f64 resolution near full scale.
const CLIP_ONLY_BITS: u32 = 52;

impl QuantizerConfig {
    pub fn new(bits: u32, full_scale: f64) -> Result<Self> {
        if !(1..=64).contains(&bits) {
            return Err(Error::InvalidParams(format!(
                "quantizer width must be 1..=64 bits, got {bits}"
            )));
        }
        if !(full_scale > 0.0 && full_scale.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "full scale must be positive, got {full_scale}"
            )));
        }
        let step = 2.0 * full_scale / 2f64.powi(bits as i32);
        let top_level = 2f64.powi(bits as i32 - 1) - 1.0;
        Ok(Self {
            bits,
            full_scale,
            step,
            top_level,
        })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn full_scale(&self) -> f64 {
        self.full_scale
    }

    /// Lattice spacing `2 * full_scale / 2^bits`.
    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn quantize_sample(&self, x: f64) -> f64 {
        let fs = self.full_scale;
        if self.bits >= CLIP_ONLY_BITS {
            return x.clamp(-fs, fs);
        }
        let k = (x / self.step).floor().clamp(-self.top_level - 1.0, self.top_level);
        (k + 0.5) * self.step
    }
}

pub fn quantize(signal: &SampledSignal, q: &QuantizerConfig) -> SampledSignal {
    SampledSignal {
        samples: signal.samples.iter().map(|&x| q.quantize_sample(x)).collect(),
        sample_rate: signal.sample_rate,
        t0: signal.t0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn high_resolution_is_near_identity() {
        let q = QuantizerConfig::new(64, 3.0).unwrap();
        for x in [-2.9, -1e-3, 0.0, 0.7, 2.999] {
            assert!((q.quantize_sample(x) - x).abs() < 1e-15 * 3.0);
        }
    }

    #[test]
    fn one_bit_has_two_levels() {
        let q = QuantizerConfig::new(1, 2.0).unwrap();
        for x in [-5.0, -1.0, -1e-9, 0.0, 1e-9, 1.5, 9.0] {
            let y = q.quantize_sample(x);
            assert!(y == -1.0 || y == 1.0);
            assert_eq!(y > 0.0, x >= 0.0);
        }
    }

    #[test]
    fn clips_out_of_range() {
        let q = QuantizerConfig::new(3, 1.0).unwrap();
        assert_eq!(q.quantize_sample(10.0), 1.0 - 0.125);
        assert_eq!(q.quantize_sample(-10.0), -1.0 + 0.125);
    }

    #[test]
    fn rejects_bad_config() {
        assert!(QuantizerConfig::new(0, 1.0).is_err());
        assert!(QuantizerConfig::new(65, 1.0).is_err());
        assert!(QuantizerConfig::new(8, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn error_bounded_by_half_step(bits in 1u32..=64, fs in 1e-3f64..1e6, u in -1.0f64..1.0) {
            let q = QuantizerConfig::new(bits, fs).unwrap();
            let x = u * fs;
            // Allow a few ulps of rounding in the lattice arithmetic.
            let bound = fs / 2f64.powi(bits as i32) + 4.0 * f64::EPSILON * fs;
            prop_assert!((q.quantize_sample(x) - x).abs() <= bound);
        }

        #[test]
        fn idempotent(bits in 1u32..=64, fs in 1e-3f64..1e6, u in -2.0f64..2.0) {
            let q = QuantizerConfig::new(bits, fs).unwrap();
            let y = q.quantize_sample(u * fs);
            prop_assert_eq!(q.quantize_sample(y), y);
        }
    }
}
