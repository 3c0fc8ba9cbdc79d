//! Pulse shapes, sampled waveforms and the correlation primitive.
//!
//! Sampled signals carry amplitudes normalized so that a transmitted pulse
//! has unit discrete energy, `sum(s[k]^2) / sample_rate == 1`. All energies
//! and inner products include the `1 / sample_rate` factor, so they are
//! independent of the sampling density.

use std::f64::consts::PI;

use crate::{Error, Result};

/// Default pulse shape parameter, seconds.
pub const DEFAULT_TAU: f64 = 0.5e-9;
/// Default pulse truncation (total support), seconds.
pub const DEFAULT_PULSE_DURATION: f64 = 4e-9;
/// Default sample rate, samples per second (50 GS/s, 20 ps period).
pub const DEFAULT_SAMPLE_RATE: f64 = 50e9;

/// Minimum number of samples per `tau` required by [`PulseShape::sample`].
pub const MIN_SAMPLES_PER_TAU: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PulseKind {
    /// Second derivative of a Gaussian (the Gaussian doublet / monocycle).
    GaussianSecondDerivative,
}

/// A continuous-time UWB pulse truncated to `[-duration/2, +duration/2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseShape {
    kind: PulseKind,
    tau: f64,
    duration: f64,
}

impl Default for PulseShape {
    fn default() -> Self {
        Self {
            kind: PulseKind::GaussianSecondDerivative,
            tau: DEFAULT_TAU,
            duration: DEFAULT_PULSE_DURATION,
        }
    }
}

impl PulseShape {
    /// Gaussian second-derivative pulse. Requires `tau > 0` and
    /// `duration >= 6 * tau`.
    pub fn gaussian_doublet(tau: f64, duration: f64) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidParams(format!("pulse tau must be positive, got {tau}")));
        }
        // Allow for rounding when duration is computed as an exact 6 * tau.
        if !(duration.is_finite() && duration >= 6.0 * tau * (1.0 - 1e-12)) {
            return Err(Error::InvalidParams(format!(
                "pulse duration {duration} s is shorter than 6 * tau = {} s",
                6.0 * tau
            )));
        }
        Ok(Self {
            kind: PulseKind::GaussianSecondDerivative,
            tau,
            duration,
        })
    }

    pub fn kind(&self) -> PulseKind {
        self.kind
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    /// Pulse amplitude at time `t` (seconds), peak 1 at `t = 0`, zero outside
    /// the truncation window.
    pub fn value(&self, t: f64) -> f64 {
        if t.abs() > self.duration / 2.0 {
            return 0.0;
        }
        match self.kind {
            PulseKind::GaussianSecondDerivative => {
                let x = (t / self.tau).powi(2);
                (1.0 - 4.0 * PI * x) * (-2.0 * PI * x).exp()
            }
        }
    }

    /// Number of samples covering the pulse support at `sample_rate`.
    pub fn len_samples(&self, sample_rate: f64) -> usize {
        (self.duration * sample_rate).round() as usize
    }

    /// Uniformly samples the pulse over its support and rescales it to unit
    /// discrete energy. The first sample sits at the start of the support.
    pub fn sample(&self, sample_rate: f64) -> Result<SampledSignal> {
        let required = MIN_SAMPLES_PER_TAU / self.tau;
        if !(sample_rate.is_finite() && sample_rate >= required * (1.0 - 1e-12)) {
            return Err(Error::UndersampledPulse { sample_rate, required });
        }
        let n = self.len_samples(sample_rate);
        let half = n as f64 / 2.0;
        let mut samples: Vec<f64> = (0..n).map(|k| self.value((k as f64 - half) / sample_rate)).collect();
        let energy = samples.iter().map(|s| s * s).sum::<f64>() / sample_rate;
        let scale = energy.sqrt().recip();
        samples.iter_mut().for_each(|s| *s *= scale);
        Ok(SampledSignal {
            samples,
            sample_rate,
            t0: -half / sample_rate,
        })
    }
}

/// Free-function form of [`PulseShape::value`].
pub fn pulse_value(shape: &PulseShape, t: f64) -> f64 {
    shape.value(t)
}

/// Free-function form of [`PulseShape::sample`].
pub fn sample_pulse(shape: &PulseShape, sample_rate: f64) -> Result<SampledSignal> {
    shape.sample(sample_rate)
}

/// A uniformly sampled real waveform.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    pub samples: Vec<f64>,
    pub sample_rate: f64,
    /// Time of the first sample, seconds.
    pub t0: f64,
}

impl SampledSignal {
    pub fn new(samples: Vec<f64>, sample_rate: f64) -> Result<Self> {
        if !(sample_rate > 0.0 && sample_rate.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "sample rate must be positive, got {sample_rate}"
            )));
        }
        Ok(Self {
            samples,
            sample_rate,
            t0: 0.0,
        })
    }

    pub fn zeros(len: usize, sample_rate: f64) -> Result<Self> {
        Self::new(vec![0.0; len], sample_rate)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn period(&self) -> f64 {
        self.sample_rate.recip()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }

    /// Discrete energy `sum(s^2) / sample_rate`.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s * s).sum::<f64>() / self.sample_rate
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, s| m.max(s.abs()))
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            samples: self.samples.iter().map(|s| alpha * s).collect(),
            sample_rate: self.sample_rate,
            t0: self.t0,
        }
    }

    pub(crate) fn same_rate(&self, other: &SampledSignal) -> Result<()> {
        let (a, b) = (self.sample_rate, other.sample_rate);
        if (a - b).abs() > 1e-12 * a.abs().max(b.abs()) {
            return Err(Error::RateMismatch(a, b));
        }
        Ok(())
    }
}

/// `sum_k a[k] * b[k - lag] / sample_rate` over the overlap of the two
/// sequences; zero when they do not overlap.
pub fn inner_product(a: &SampledSignal, b: &SampledSignal, lag: isize) -> Result<f64> {
    a.same_rate(b)?;
    Ok(correlate(&a.samples, &b.samples, lag) / a.sample_rate)
}

/// Unscaled `sum_k a[k] * b[k - lag]` over the overlap.
pub(crate) fn correlate(a: &[f64], b: &[f64], lag: isize) -> f64 {
    let start = lag.max(0);
    let end = (a.len() as isize).min(b.len() as isize + lag);
    if end <= start {
        return 0.0;
    }
    let (start, end) = (start as usize, end as usize);
    let b_start = (start as isize - lag) as usize;
    a[start..end]
        .iter()
        .zip(&b[b_start..b_start + (end - start)])
        .map(|(x, y)| x * y)
        .sum()
}
