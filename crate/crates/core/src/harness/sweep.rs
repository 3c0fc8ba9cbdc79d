use rand::{Rng, RngCore};
use rayon::prelude::*;

use crate::channel::{add_awgn_in_place, apply_channel, draw_channel, noise_sigma, QuantizerConfig, SvProfile};
use crate::framing::{generate_code, ThParams};
use crate::receiver::{calibrate_ook_threshold, demodulate, synchronize, Datapath, ReceiverConfig, SyncEstimate};
use crate::signal::{PulseShape, DEFAULT_SAMPLE_RATE};
use crate::transmitter::{ModulationConfig, Modulator, Scheme};
use crate::{rng_from_seed, Error, Result};

use super::presets::Preset;
use super::BerPoint;

/// Bits simulated per independent trial block. Multipath sweeps draw a fresh
/// channel for every block.
pub const BLOCK_BITS: usize = 1000;

const CALIBRATION_SALT: u64 = 0x0c41_1b7a_7e00_0000;

#[derive(Debug, Clone, PartialEq)]
pub enum SweepChannel {
    Awgn,
    Multipath(SvProfile),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepDatapath {
    Float,
    /// ADC word width; full scale tracks the peak of each received block.
    Quantized {
        bits: u32,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyncMode {
    /// Receiver timing taken from the channel (first tap).
    Genie,
    /// Matched-filter acquisition on an all-ones preamble prepended to every
    /// block.
    MatchedFilter {
        preamble_frames: usize,
        search_window: usize,
    },
}

/// Pulse and frame geometry shared by transmitter and receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkConfig {
    pub pulse: PulseShape,
    pub sample_rate: f64,
    pub params: ThParams,
    pub code_length: usize,
    /// PPM shift, seconds; `None` uses the pulse duration.
    pub ppm_delta: Option<f64>,
}

impl Default for LinkConfig {
    fn default() -> Self {
        Self {
            pulse: PulseShape::default(),
            sample_rate: DEFAULT_SAMPLE_RATE,
            params: ThParams::default(),
            code_length: 8,
            ppm_delta: None,
        }
    }
}

impl LinkConfig {
    pub fn modulation(&self, scheme: Scheme) -> Result<ModulationConfig> {
        match (scheme, self.ppm_delta) {
            (Scheme::Ppm, Some(delta)) => ModulationConfig::ppm(delta),
            _ => Ok(ModulationConfig::for_scheme(scheme, &self.pulse)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub scheme: Scheme,
    pub ebn0_grid: Vec<f64>,
    pub n_bits_per_point: usize,
    pub channel: SweepChannel,
    pub datapath: SweepDatapath,
    pub base_seed: u64,
    pub preset: Option<Preset>,
    pub link: LinkConfig,
    pub sync: SyncMode,
    pub ook_calibration_frames: usize,
}

impl SweepConfig {
    /// AWGN, float datapath, genie sync, 1e5 bits per point over 0..=16 dB in
    /// 2 dB steps.
    pub fn new(scheme: Scheme) -> Self {
        Self {
            scheme,
            ebn0_grid: (0..=8).map(|i| 2.0 * i as f64).collect(),
            n_bits_per_point: 100_000,
            channel: SweepChannel::Awgn,
            datapath: SweepDatapath::Float,
            base_seed: 0,
            preset: None,
            link: LinkConfig::default(),
            sync: SyncMode::Genie,
            ook_calibration_frames: 2000,
        }
    }

    pub fn preset_id(&self) -> Option<&'static str> {
        self.preset.map(|p| p.id)
    }

    /// Short label: the preset id, else the scheme plus any quantization.
    pub fn label(&self) -> String {
        if let Some(id) = self.preset_id() {
            return id.to_string();
        }
        let mut label = format!("th-{}", self.scheme);
        if let SweepDatapath::Quantized { bits } = self.datapath {
            label.push_str(&format!("-q{bits}"));
        }
        if matches!(self.channel, SweepChannel::Multipath(_)) {
            label.push_str("-mp");
        }
        label
    }

    pub fn validate(&self) -> Result<()> {
        if self.ebn0_grid.is_empty() {
            return Err(Error::InvalidParams("Eb/N0 grid is empty".into()));
        }
        if self.ebn0_grid.iter().any(|x| x.is_nan() || *x == f64::NEG_INFINITY) {
            return Err(Error::InvalidParams("Eb/N0 grid contains NaN or -inf".into()));
        }
        if self.ebn0_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParams("Eb/N0 grid must be strictly increasing".into()));
        }
        if self.n_bits_per_point < BLOCK_BITS {
            return Err(Error::InvalidParams(format!(
                "at least {BLOCK_BITS} bits per point required, got {}",
                self.n_bits_per_point
            )));
        }
        if let SweepDatapath::Quantized { bits } = self.datapath {
            QuantizerConfig::new(bits, 1.0)?;
        }
        if let SweepChannel::Multipath(profile) = &self.channel {
            profile.validate()?;
        }
        if let SyncMode::MatchedFilter {
            preamble_frames,
            search_window,
        } = self.sync
        {
            if preamble_frames == 0 {
                return Err(Error::InvalidParams("matched-filter sync needs a preamble".into()));
            }
            if search_window == 0 {
                return Err(Error::WindowTooSmall);
            }
        }
        self.link
            .modulation(self.scheme)?
            .layout(&self.link.params, &self.link.pulse, self.link.sample_rate)?;
        Ok(())
    }

    fn n_blocks(&self) -> usize {
        self.n_bits_per_point.div_ceil(BLOCK_BITS)
    }

    fn receiver(&self) -> Result<(Modulator, ReceiverConfig)> {
        let link = &self.link;
        let modulation = link.modulation(self.scheme)?;
        let code = generate_code(self.base_seed, link.code_length, &link.params);
        let tx = Modulator::new(modulation, &link.params, &code, &link.pulse, link.sample_rate)?;
        let rx = ReceiverConfig::new(modulation, link.params, code, &link.pulse, link.sample_rate)?;
        Ok((tx, rx))
    }
}

/// Parses an Eb/N0 grid: comma-separated values (`inf` allowed) or an
/// inclusive range `start:stop:step`.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let bad = |what: &str| Error::InvalidParams(format!("bad Eb/N0 grid `{text}`: {what}"));
    let parts: Vec<&str> = text.split(':').map(str::trim).collect();
    if parts.len() == 3 {
        let nums = parts
            .iter()
            .map(|p| p.parse::<f64>().map_err(|_| bad("expected start:stop:step")))
            .collect::<Result<Vec<_>>>()?;
        let (start, stop, step) = (nums[0], nums[1], nums[2]);
        if step.is_nan() || step <= 0.0 || stop < start {
            return Err(bad("range must have step > 0 and stop >= start"));
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        return Ok((0..=n).map(|i| start + i as f64 * step).collect());
    }
    text.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| bad(&format!("`{}` is not a number", v.trim())))
        })
        .collect()
}

/// Energy-detector threshold used at grid point `index`; deterministic in
/// the configuration.
pub fn ook_threshold(cfg: &SweepConfig, index: usize) -> Result<f64> {
    let (_, rx) = cfg.receiver()?;
    calibrate_ook_threshold(
        &rx,
        cfg.ebn0_grid[index],
        cfg.scheme.energy_per_bit(),
        cfg.ook_calibration_frames,
        cfg.base_seed ^ CALIBRATION_SALT ^ index as u64,
    )
}

/// Simulates every grid point. Output is a pure function of `cfg`.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<BerPoint>> {
    cfg.validate()?;
    (0..cfg.ebn0_grid.len()).map(|i| run_point(cfg, i)).collect()
}

/// Simulates grid point `index`. Block `b` of this point is trial
/// `index * n_blocks + b` and draws its randomness from `base_seed ^ trial`.
pub fn run_point(cfg: &SweepConfig, index: usize) -> Result<BerPoint> {
    let ebn0_db = cfg.ebn0_grid[index];
    let annotate = |e: Error| Error::AtGridPoint {
        ebn0_db,
        source: Box::new(e),
    };
    let (tx, mut rx) = cfg.receiver().map_err(annotate)?;
    if cfg.scheme == Scheme::Ook {
        rx = rx
            .with_threshold(ook_threshold(cfg, index).map_err(annotate)?)
            .map_err(annotate)?;
    }
    let n_blocks = cfg.n_blocks();
    let errors = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let trial = (index * n_blocks + b) as u64;
            let n_bits = BLOCK_BITS.min(cfg.n_bits_per_point - b * BLOCK_BITS);
            run_block(cfg, &tx, &rx, ebn0_db, cfg.base_seed ^ trial, n_bits)
        })
        .collect::<Result<Vec<u64>>>()
        .map_err(annotate)?
        .into_iter()
        .sum();
    Ok(BerPoint::new(ebn0_db, errors, cfg.n_bits_per_point as u64))
}

fn run_block(
    cfg: &SweepConfig,
    tx: &Modulator,
    rx: &ReceiverConfig,
    ebn0_db: f64,
    seed: u64,
    n_bits: usize,
) -> Result<u64> {
    let mut rng = rng_from_seed(seed);
    let preamble = match cfg.sync {
        SyncMode::Genie => 0,
        SyncMode::MatchedFilter { preamble_frames, .. } => preamble_frames,
    };
    let bits: Vec<u8> = (0..n_bits).map(|_| u8::from(rng.random::<bool>())).collect();
    let mut framed = vec![1u8; preamble];
    framed.extend_from_slice(&bits);
    let channel_seed = rng.next_u64();
    let noise_seed = rng.next_u64();

    let mut signal = tx.modulate(&framed);
    let mut true_offset = 0;
    if let SweepChannel::Multipath(profile) = &cfg.channel {
        let ch = draw_channel(profile, channel_seed)?;
        true_offset = (ch.first_delay() * signal.sample_rate).round() as usize;
        signal = apply_channel(&signal, &ch);
    }
    let sigma = noise_sigma(ebn0_db, cfg.scheme.energy_per_bit(), signal.sample_rate);
    add_awgn_in_place(&mut signal.samples, sigma, &mut rng_from_seed(noise_seed));

    let rx = match cfg.datapath {
        SweepDatapath::Float => rx.clone(),
        SweepDatapath::Quantized { bits } => {
            let peak = signal.max_abs();
            let q = QuantizerConfig::new(bits, if peak > 0.0 { peak } else { 1.0 })?;
            rx.clone().with_datapath(Datapath::Quantized(q))
        }
    };
    let sync = match cfg.sync {
        SyncMode::Genie => SyncEstimate::at(true_offset),
        SyncMode::MatchedFilter {
            preamble_frames,
            search_window,
        } => synchronize(&signal, &rx, search_window, preamble_frames)?,
    };
    let decoded = demodulate(&signal, &rx, &sync)?;
    let payload = decoded.get(preamble..).unwrap_or(&[]);
    let mismatches = payload.iter().zip(&bits).filter(|(d, b)| d != b).count();
    let missing = n_bits.saturating_sub(payload.len());
    Ok((mismatches + missing) as u64)
}
