use crate::transmitter::Scheme;

use super::sweep::{SweepConfig, SweepDatapath};

/// One receiver implementation row: principle, datapath word width, number
/// of receive channels, ranging and runtime reconfigurability.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Preset {
    pub id: &'static str,
    pub principle: &'static str,
    pub scheme: Scheme,
    pub sample_size_bits: u32,
    pub channels: u8,
    /// Ranging support. Recorded only; the simulator has no ranging path.
    pub ranging: bool,
    pub reconfigurable: bool,
}

const fn row(
    id: &'static str,
    scheme: Scheme,
    sample_size_bits: u32,
    channels: u8,
    ranging: bool,
    reconfigurable: bool,
) -> Preset {
    let principle = match scheme {
        Scheme::Ook => "energy detection",
        Scheme::Bpam => "simple correlation",
        Scheme::Ppm => "double correlation",
    };
    Preset {
        id,
        principle,
        scheme,
        sample_size_bits,
        channels,
        ranging,
        reconfigurable,
    }
}

pub const PRESETS: [Preset; 8] = [
    row("th-ook-v1", Scheme::Ook, 64, 1, false, false),
    row("th-ook-v2", Scheme::Ook, 32, 1, false, false),
    row("th-bpam-v1", Scheme::Bpam, 32, 1, false, false),
    row("th-bpam-v2", Scheme::Bpam, 32, 1, false, false),
    row("th-ppm-v1", Scheme::Ppm, 32, 1, false, false),
    row("th-ppm-v2", Scheme::Ppm, 32, 1, true, false),
    row("th-ppm-v3", Scheme::Ppm, 64, 1, false, true),
    row("th-ppm-v4", Scheme::Ppm, 64, 2, false, true),
];

pub fn preset(id: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.id.eq_ignore_ascii_case(id))
}

impl Preset {
    /// Sweep of this receiver with its datapath width.
    pub fn sweep_config(&self) -> SweepConfig {
        let mut cfg = SweepConfig::new(self.scheme);
        cfg.datapath = SweepDatapath::Quantized {
            bits: self.sample_size_bits,
        };
        cfg.preset = Some(*self);
        cfg
    }
}
