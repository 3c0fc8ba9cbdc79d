//! Matched-filter synchronization and the three demodulators.
//!
//! - TH-BPAM: one correlation against the template at the hopped chip,
//!   decided on its sign.
//! - TH-PPM: two correlations, at the nominal position and shifted by the PPM
//!   delta, compared directly.
//! - TH-OOK: non-coherent energy detection over a window at the hopped chip,
//!   compared with a threshold.
//!
//! Every comparison tie decodes as bit 1. In quantized mode the received
//! samples and the template both pass through the same ADC model before
//! correlation; accumulation stays in f64.

use std::borrow::Cow;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::channel::{noise_sigma, QuantizerConfig};
use crate::framing::{ThCode, ThParams};
use crate::signal::{correlate, PulseShape, SampledSignal};
use crate::transmitter::{ModulationConfig, PulseLayout, Scheme};
use crate::{exact_samples, rng_from_seed, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Datapath {
    Float,
    Quantized(QuantizerConfig),
}

#[derive(Debug, Clone)]
pub struct ReceiverConfig {
    modulation: ModulationConfig,
    params: ThParams,
    code: ThCode,
    template: SampledSignal,
    integration_window: f64,
    threshold: Option<f64>,
    datapath: Datapath,
    layout: PulseLayout,
    window_len: usize,
}

impl ReceiverConfig {
    /// Receiver matched to `pulse` at `sample_rate`: unit-energy sampled
    /// template, OOK integration window equal to the pulse duration, float
    /// datapath, no threshold.
    pub fn new(
        modulation: ModulationConfig,
        params: ThParams,
        code: ThCode,
        pulse: &PulseShape,
        sample_rate: f64,
    ) -> Result<Self> {
        let layout = modulation.layout(&params, pulse, sample_rate)?;
        let template = pulse.sample(sample_rate)?;
        Ok(Self {
            modulation,
            params,
            code,
            template,
            integration_window: pulse.duration(),
            threshold: None,
            datapath: Datapath::Float,
            window_len: layout.pulse_len,
            layout,
        })
    }

    pub fn with_threshold(mut self, threshold: f64) -> Result<Self> {
        if !(threshold >= 0.0 && threshold.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "threshold must be nonnegative, got {threshold}"
            )));
        }
        self.threshold = Some(threshold);
        Ok(self)
    }

    pub fn with_datapath(mut self, datapath: Datapath) -> Self {
        self.datapath = datapath;
        self
    }

    /// Replaces the code, keeping everything else.
    pub fn with_code(mut self, code: ThCode) -> Self {
        self.code = code;
        self
    }

    pub fn with_integration_window(mut self, window: f64) -> Result<Self> {
        let rate = self.template.sample_rate;
        let len = exact_samples(window, rate).filter(|&n| n > 0).ok_or_else(|| {
            Error::ConfigConflict(format!(
                "integration window {window} s is not a positive multiple of the sample period"
            ))
        })?;
        if len > self.layout.frame.chip {
            return Err(Error::ConfigConflict(format!(
                "integration window {window} s exceeds the chip duration {} s",
                self.params.t_c()
            )));
        }
        self.integration_window = window;
        self.window_len = len;
        Ok(self)
    }

    pub fn modulation(&self) -> &ModulationConfig {
        &self.modulation
    }

    pub fn params(&self) -> &ThParams {
        &self.params
    }

    pub fn code(&self) -> &ThCode {
        &self.code
    }

    pub fn template(&self) -> &SampledSignal {
        &self.template
    }

    pub fn integration_window(&self) -> f64 {
        self.integration_window
    }

    pub fn threshold(&self) -> Option<f64> {
        self.threshold
    }

    pub fn datapath(&self) -> Datapath {
        self.datapath
    }

    pub fn layout(&self) -> &PulseLayout {
        &self.layout
    }

    pub fn sample_rate(&self) -> f64 {
        self.template.sample_rate
    }

    /// Template as seen by the datapath.
    fn front_end_template(&self) -> Cow<'_, [f64]> {
        match self.datapath {
            Datapath::Float => Cow::Borrowed(&self.template.samples),
            Datapath::Quantized(q) => Cow::Owned(self.template.samples.iter().map(|&x| q.quantize_sample(x)).collect()),
        }
    }

    /// Received samples `[start, start + len)` as seen by the datapath,
    /// clipped to the signal.
    fn window<'a>(&self, rx: &'a [f64], start: isize, len: usize) -> (isize, Cow<'a, [f64]>) {
        let lo = start.clamp(0, rx.len() as isize);
        let hi = (start + len as isize).clamp(lo, rx.len() as isize);
        let slice = &rx[lo as usize..hi as usize];
        let samples = match self.datapath {
            Datapath::Float => Cow::Borrowed(slice),
            Datapath::Quantized(q) => Cow::Owned(slice.iter().map(|&x| q.quantize_sample(x)).collect()),
        };
        (lo, samples)
    }

    /// Unscaled correlation of the received signal with the template placed
    /// at sample `pos`.
    fn correlate_at(&self, rx: &[f64], template: &[f64], pos: isize) -> f64 {
        let (lo, win) = self.window(rx, pos, template.len());
        correlate(&win, template, pos - lo)
    }

    fn frames_in(&self, rx_len: usize, offset: usize) -> usize {
        rx_len.saturating_sub(offset) / self.layout.frame.frame()
    }

    fn chip_start(&self, frame: usize, offset: usize) -> isize {
        (self.layout.frame.chip_start(frame as u64, &self.code) + offset) as isize
    }

    fn expect(&self, expected: Scheme) -> Result<()> {
        let actual = self.modulation.scheme();
        if actual != expected {
            return Err(Error::SchemeMismatch {
                expected: expected.name(),
                actual: actual.name(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyncEstimate {
    /// Timing offset, samples.
    pub offset: usize,
    pub peak_metric: f64,
}

impl SyncEstimate {
    /// Known timing, e.g. from a genie.
    pub fn at(offset: usize) -> Self {
        Self {
            offset,
            peak_metric: f64::NAN,
        }
    }
}

/// Matched-filter timing acquisition on an all-ones preamble occupying the
/// first `n_sync_frames` frames. Searches lags `0..=search_window` samples
/// and returns the one maximizing the summed template correlation at the
/// code-predicted pulse positions; ties go to the smallest lag.
pub fn synchronize(
    rx: &SampledSignal,
    cfg: &ReceiverConfig,
    search_window: usize,
    n_sync_frames: usize,
) -> Result<SyncEstimate> {
    if search_window == 0 {
        return Err(Error::WindowTooSmall);
    }
    if n_sync_frames == 0 {
        return Err(Error::InvalidParams(
            "synchronization needs at least one preamble frame".into(),
        ));
    }
    rx.same_rate(&cfg.template)?;
    let template = cfg.front_end_template();
    let shift = match cfg.modulation.scheme() {
        Scheme::Ppm => cfg.layout.delta,
        Scheme::Ook | Scheme::Bpam => 0,
    };
    let mut best = SyncEstimate {
        offset: 0,
        peak_metric: f64::NEG_INFINITY,
    };
    for lag in 0..=search_window {
        let metric: f64 = (0..n_sync_frames)
            .map(|j| cfg.correlate_at(&rx.samples, &template, cfg.chip_start(j, lag) + shift as isize))
            .sum::<f64>()
            / cfg.sample_rate();
        if metric > best.peak_metric {
            best = SyncEstimate {
                offset: lag,
                peak_metric: metric,
            };
        }
    }
    Ok(best)
}

pub fn demod_bpam(rx: &SampledSignal, cfg: &ReceiverConfig, sync: &SyncEstimate) -> Result<Vec<u8>> {
    cfg.expect(Scheme::Bpam)?;
    rx.same_rate(&cfg.template)?;
    let template = cfg.front_end_template();
    Ok((0..cfg.frames_in(rx.len(), sync.offset))
        .map(|j| {
            let r = cfg.correlate_at(&rx.samples, &template, cfg.chip_start(j, sync.offset));
            u8::from(r >= 0.0)
        })
        .collect())
}

pub fn demod_ppm(rx: &SampledSignal, cfg: &ReceiverConfig, sync: &SyncEstimate) -> Result<Vec<u8>> {
    cfg.expect(Scheme::Ppm)?;
    rx.same_rate(&cfg.template)?;
    let template = cfg.front_end_template();
    let delta = cfg.layout.delta as isize;
    Ok((0..cfg.frames_in(rx.len(), sync.offset))
        .map(|j| {
            let pos = cfg.chip_start(j, sync.offset);
            let r0 = cfg.correlate_at(&rx.samples, &template, pos);
            let r1 = cfg.correlate_at(&rx.samples, &template, pos + delta);
            u8::from(r1 >= r0)
        })
        .collect())
}

pub fn demod_ook(rx: &SampledSignal, cfg: &ReceiverConfig, sync: &SyncEstimate) -> Result<Vec<u8>> {
    cfg.expect(Scheme::Ook)?;
    let threshold = cfg.threshold.ok_or(Error::UncalibratedThreshold)?;
    Ok(ook_energies(rx, cfg, sync)?
        .into_iter()
        .map(|e| u8::from(e > threshold))
        .collect())
}

/// Per-frame integrated energy `sum(rx^2) / rate` over the integration
/// window at each hopped chip.
pub fn ook_energies(rx: &SampledSignal, cfg: &ReceiverConfig, sync: &SyncEstimate) -> Result<Vec<f64>> {
    rx.same_rate(&cfg.template)?;
    let scale = cfg.sample_rate().recip();
    Ok((0..cfg.frames_in(rx.len(), sync.offset))
        .map(|j| {
            let (_, win) = cfg.window(&rx.samples, cfg.chip_start(j, sync.offset), cfg.window_len);
            win.iter().map(|x| x * x).sum::<f64>() * scale
        })
        .collect())
}

/// Dispatches to the demodulator matching the configured scheme.
pub fn demodulate(rx: &SampledSignal, cfg: &ReceiverConfig, sync: &SyncEstimate) -> Result<Vec<u8>> {
    match cfg.modulation.scheme() {
        Scheme::Ook => demod_ook(rx, cfg, sync),
        Scheme::Bpam => demod_bpam(rx, cfg, sync),
        Scheme::Ppm => demod_ppm(rx, cfg, sync),
    }
}

/// Energy-detector threshold: midpoint between the mean window energies of
/// simulated noise-only and pulse-plus-noise frames at the given noise level.
pub fn calibrate_ook_threshold(
    cfg: &ReceiverConfig,
    ebn0_db: f64,
    energy_per_bit: f64,
    n_calibration_frames: usize,
    rng_seed: u64,
) -> Result<f64> {
    if n_calibration_frames < 100 {
        return Err(Error::InvalidParams(format!(
            "threshold calibration needs at least 100 frames, got {n_calibration_frames}"
        )));
    }
    let rate = cfg.sample_rate();
    let sigma = noise_sigma(ebn0_db, energy_per_bit, rate);
    let mut pulse = cfg.template.samples.clone();
    pulse.resize(cfg.window_len, 0.0);
    let mut rng = rng_from_seed(rng_seed);
    let (mut off, mut on) = (0.0, 0.0);
    for _ in 0..n_calibration_frames {
        for p in &pulse {
            let n0: f64 = rng.sample(StandardNormal);
            let n1: f64 = rng.sample(StandardNormal);
            off += (sigma * n0).powi(2);
            on += (p + sigma * n1).powi(2);
        }
    }
    let frames = n_calibration_frames as f64;
    Ok((off + on) / (2.0 * frames * rate))
}
