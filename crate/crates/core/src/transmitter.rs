//! Time-hopped pulse train generation for TH-OOK, TH-BPAM and TH-PPM.

use std::fmt;
use std::str::FromStr;

use crate::framing::{FrameLayout, ThCode, ThParams};
use crate::signal::{PulseShape, SampledSignal};
use crate::{exact_samples, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// On-off keying: pulse present for 1, absent for 0.
    Ook,
    /// Binary PAM: +pulse for 1, -pulse for 0.
    Bpam,
    /// Binary PPM: nominal position for 0, shifted by delta for 1.
    Ppm,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Ook, Scheme::Bpam, Scheme::Ppm];

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Ook => "ook",
            Scheme::Bpam => "bpam",
            Scheme::Ppm => "ppm",
        }
    }

    /// Average energy per bit for unit-energy pulses and equiprobable bits.
    pub fn energy_per_bit(&self) -> f64 {
        match self {
            Scheme::Ook => 0.5,
            Scheme::Bpam | Scheme::Ppm => 1.0,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().trim_start_matches("th-") {
            "ook" => Ok(Scheme::Ook),
            "bpam" | "pam" => Ok(Scheme::Bpam),
            "ppm" => Ok(Scheme::Ppm),
            other => Err(Error::InvalidParams(format!("unknown modulation scheme `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulationConfig {
    scheme: Scheme,
    delta: f64,
}

impl ModulationConfig {
    pub fn ook() -> Self {
        Self {
            scheme: Scheme::Ook,
            delta: 0.0,
        }
    }

    pub fn bpam() -> Self {
        Self {
            scheme: Scheme::Bpam,
            delta: 0.0,
        }
    }

    /// PPM with time shift `delta` seconds for bit 1.
    pub fn ppm(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidParams(format!("PPM shift must be positive, got {delta}")));
        }
        Ok(Self {
            scheme: Scheme::Ppm,
            delta,
        })
    }

    /// Default configuration for `scheme`; PPM uses `delta = pulse duration`
    /// so the two positions do not overlap.
    pub fn for_scheme(scheme: Scheme, pulse: &PulseShape) -> Self {
        match scheme {
            Scheme::Ook => Self::ook(),
            Scheme::Bpam => Self::bpam(),
            Scheme::Ppm => Self {
                scheme,
                delta: pulse.duration(),
            },
        }
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    /// PPM shift in seconds; zero for OOK and BPAM.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Checks that a pulse plus the PPM shift fits in one chip and that all
    /// times fall on the sample grid.
    pub fn layout(&self, params: &ThParams, pulse: &PulseShape, sample_rate: f64) -> Result<PulseLayout> {
        let frame = params.layout(sample_rate)?;
        let delta = exact_samples(self.delta, sample_rate).ok_or_else(|| {
            Error::ConfigConflict(format!(
                "PPM shift {} s is not a multiple of the sample period",
                self.delta
            ))
        })?;
        let pulse_len = pulse.len_samples(sample_rate);
        if pulse_len + delta > frame.chip {
            return Err(Error::ConfigConflict(format!(
                "pulse ({pulse_len} samples) plus shift ({delta} samples) exceeds the {}-sample chip",
                frame.chip
            )));
        }
        Ok(PulseLayout {
            frame,
            delta,
            pulse_len,
        })
    }
}

/// Combined frame and pulse geometry in samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PulseLayout {
    pub frame: FrameLayout,
    pub delta: usize,
    pub pulse_len: usize,
}

/// Reusable transmitter for one fixed configuration.
#[derive(Debug, Clone)]
pub struct Modulator {
    modulation: ModulationConfig,
    code: ThCode,
    layout: PulseLayout,
    pulse: Vec<f64>,
    sample_rate: f64,
}

impl Modulator {
    pub fn new(
        modulation: ModulationConfig,
        params: &ThParams,
        code: &ThCode,
        pulse: &PulseShape,
        sample_rate: f64,
    ) -> Result<Self> {
        let layout = modulation.layout(params, pulse, sample_rate)?;
        let pulse = pulse.sample(sample_rate)?.samples;
        Ok(Self {
            modulation,
            code: code.clone(),
            layout,
            pulse,
            sample_rate,
        })
    }

    pub fn layout(&self) -> &PulseLayout {
        &self.layout
    }

    /// Pulse train for `bits`, one frame per bit. Nonzero entries are 1s.
    pub fn modulate(&self, bits: &[u8]) -> SampledSignal {
        let frame = self.layout.frame;
        let mut samples = vec![0.0; bits.len() * frame.frame()];
        for (j, &bit) in bits.iter().enumerate() {
            let one = bit != 0;
            let start = frame.chip_start(j as u64, &self.code);
            let (start, sign) = match self.modulation.scheme {
                Scheme::Ook if !one => continue,
                Scheme::Ook => (start, 1.0),
                Scheme::Bpam => (start, if one { 1.0 } else { -1.0 }),
                Scheme::Ppm => (start + if one { self.layout.delta } else { 0 }, 1.0),
            };
            for (dst, p) in samples[start..start + self.pulse.len()].iter_mut().zip(&self.pulse) {
                *dst = sign * p;
            }
        }
        SampledSignal {
            samples,
            sample_rate: self.sample_rate,
            t0: 0.0,
        }
    }
}

/// Maps `bits` to a time-hopped pulse train, one bit per frame starting at
/// frame 0.
pub fn modulate(
    bits: &[u8],
    modulation: &ModulationConfig,
    params: &ThParams,
    code: &ThCode,
    pulse: &PulseShape,
    sample_rate: f64,
) -> Result<SampledSignal> {
    Ok(Modulator::new(*modulation, params, code, pulse, sample_rate)?.modulate(bits))
}
