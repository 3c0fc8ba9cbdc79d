//! Runtime PHY reconfiguration.
//!
//! The PHY exposes its chip duration, chips per frame and active TH code as
//! inputs. A MAC-issued [`ReconfigRequest`] places new values on those inputs
//! and raises a reconfiguration signal; the new values take effect atomically
//! at the requested frame boundary. With the signal low, the inputs are
//! ignored.

use std::fmt::Write as _;
use std::path::Path;

use crate::channel::{add_awgn, apply_channel, draw_channel, SvProfile};
use crate::framing::{validate_code, CodeBank, ThCode, ThParams};
use crate::receiver::{calibrate_ook_threshold, demodulate, ReceiverConfig, SyncEstimate};
use crate::signal::PulseShape;
use crate::transmitter::{ModulationConfig, Modulator, PulseLayout};
use crate::{Error, Result};

/// Live PHY parameter set.
#[derive(Debug, Clone, PartialEq)]
pub struct PhyState {
    params: ThParams,
    code_bank: CodeBank,
    modulation: ModulationConfig,
    pulse: PulseShape,
    sample_rate: f64,
    epoch: u64,
}

impl PhyState {
    pub fn new(
        params: ThParams,
        code_bank: CodeBank,
        modulation: ModulationConfig,
        pulse: PulseShape,
        sample_rate: f64,
    ) -> Result<Self> {
        let state = Self {
            params,
            code_bank,
            modulation,
            pulse,
            sample_rate,
            epoch: 0,
        };
        state.validate()?;
        Ok(state)
    }

    /// Checks the joint framing and modulation invariants.
    pub fn validate(&self) -> Result<PulseLayout> {
        let layout = self.modulation.layout(&self.params, &self.pulse, self.sample_rate)?;
        validate_code(self.code_bank.active(), &self.params).map_err(|v| Error::InvalidParams(v.to_string()))?;
        Ok(layout)
    }

    pub fn params(&self) -> &ThParams {
        &self.params
    }

    pub fn code_bank(&self) -> &CodeBank {
        &self.code_bank
    }

    pub fn active_code(&self) -> &ThCode {
        self.code_bank.active()
    }

    pub fn modulation(&self) -> &ModulationConfig {
        &self.modulation
    }

    pub fn pulse(&self) -> &PulseShape {
        &self.pulse
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    /// Frame at which this state became active.
    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    pub fn data_rate(&self) -> f64 {
        self.params.data_rate()
    }
}

/// A MAC-level order to change PHY properties at a frame boundary.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReconfigRequest {
    pub effective_frame: u64,
    /// New chip duration, seconds.
    pub new_t_c: Option<f64>,
    pub new_n_c: Option<usize>,
    pub new_code_id: Option<String>,
    pub reconfig_signal: bool,
}

impl ReconfigRequest {
    pub fn at(effective_frame: u64) -> Self {
        Self {
            effective_frame,
            reconfig_signal: true,
            ..Default::default()
        }
    }

    pub fn t_c(mut self, t_c: f64) -> Self {
        self.new_t_c = Some(t_c);
        self
    }

    pub fn n_c(mut self, n_c: usize) -> Self {
        self.new_n_c = Some(n_c);
        self
    }

    pub fn code(mut self, id: impl Into<String>) -> Self {
        self.new_code_id = Some(id.into());
        self
    }

    pub fn signal(mut self, on: bool) -> Self {
        self.reconfig_signal = on;
        self
    }

    fn has_payload(&self) -> bool {
        self.new_t_c.is_some() || self.new_n_c.is_some() || self.new_code_id.is_some()
    }
}

/// Applies `req` to `state`. Returns the state unchanged when the signal is
/// low; otherwise the merged state, active from `req.effective_frame`, or an
/// error with `state` untouched.
pub fn apply_reconfiguration(state: &PhyState, req: &ReconfigRequest, current_frame: u64) -> Result<PhyState> {
    if !req.reconfig_signal {
        return Ok(state.clone());
    }
    // A state may already be scheduled ahead of the current frame.
    let current_frame = current_frame.max(state.epoch);
    if req.effective_frame <= current_frame {
        return Err(Error::StaleRequest {
            effective_frame: req.effective_frame,
            current_frame,
        });
    }
    if !req.has_payload() {
        return Err(Error::InvalidParams(
            "reconfiguration signal raised with no new values".into(),
        ));
    }
    let params = ThParams::new(
        req.new_t_c.unwrap_or(state.params.t_c()),
        req.new_n_c.unwrap_or(state.params.n_c()),
    )?;
    let mut code_bank = state.code_bank.clone();
    if let Some(id) = &req.new_code_id {
        code_bank.select(id)?;
    }
    let next = PhyState {
        params,
        code_bank,
        modulation: state.modulation,
        pulse: state.pulse,
        sample_rate: state.sample_rate,
        epoch: req.effective_frame,
    };
    next.validate().map_err(|e| match e {
        Error::ConfigConflict(msg) => Error::InvalidParams(msg),
        other => other,
    })?;
    Ok(next)
}

#[derive(Debug, Clone, PartialEq)]
pub enum SessionChannel {
    Noiseless,
    Awgn { ebn0_db: f64 },
    Multipath { profile: SvProfile, ebn0_db: f64 },
}

#[derive(Debug, Clone)]
pub struct SessionConfig {
    pub tx: PhyState,
    pub rx: PhyState,
    pub channel: SessionChannel,
    /// Apply the schedule at the transmitter only.
    pub fault_injection: bool,
    pub ook_calibration_frames: usize,
}

impl SessionConfig {
    /// Both link ends start from `initial`.
    pub fn symmetric(initial: PhyState, channel: SessionChannel) -> Self {
        Self {
            tx: initial.clone(),
            rx: initial,
            channel,
            fault_injection: false,
            ook_calibration_frames: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentReport {
    pub index: usize,
    /// First frame (bit) of the segment.
    pub start_frame: u64,
    /// One past the last frame of the segment.
    pub end_frame: u64,
    pub t_c: f64,
    pub n_c: usize,
    pub tx_code: String,
    pub rx_code: String,
    pub decoded: Vec<u8>,
    pub errors: u64,
    pub bits: u64,
    pub ber: f64,
    /// Transmitted segment length, seconds.
    pub duration: f64,
    /// Link bit rate measured over the segment, bits/s.
    pub throughput_bps: f64,
    /// Measured rate summed over the `n_c` hopping slots, bits/s.
    pub aggregate_rate_bps: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionReport {
    pub segments: Vec<SegmentReport>,
}

impl SessionReport {
    pub fn decoded(&self) -> Vec<u8> {
        self.segments.iter().flat_map(|s| s.decoded.iter().copied()).collect()
    }

    pub fn total_errors(&self) -> u64 {
        self.segments.iter().map(|s| s.errors).sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "segment,start_frame,end_frame,t_c_ns,n_c,tx_code,rx_code,errors,bits,ber,throughput_bps,aggregate_rate_bps\n",
        );
        for s in &self.segments {
            let _ = writeln!(
                out,
                "{},{},{},{:?},{},{},{},{},{},{:e},{:e},{:e}",
                s.index,
                s.start_frame,
                s.end_frame,
                s.t_c * 1e9,
                s.n_c,
                s.tx_code,
                s.rx_code,
                s.errors,
                s.bits,
                s.ber,
                s.throughput_bps,
                s.aggregate_rate_bps
            );
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

/// Runs TX -> channel -> RX segment by segment, each segment using the PHY
/// state active over its frame range. Requests must be sorted by effective
/// frame. Segment `k` draws its randomness from `rng_seed ^ k`.
pub fn run_session(
    bits: &[u8],
    schedule: &[ReconfigRequest],
    cfg: &SessionConfig,
    rng_seed: u64,
) -> Result<SessionReport> {
    cfg.tx.validate()?;
    cfg.rx.validate()?;
    let mut tx = cfg.tx.clone();
    let mut rx = cfg.rx.clone();
    let mut phases = vec![(0u64, tx.clone(), rx.clone())];
    for (index, req) in schedule.iter().enumerate() {
        let annotate = |e: Error| Error::AtRequest {
            index,
            source: Box::new(e),
        };
        let next_tx = apply_reconfiguration(&tx, req, tx.epoch).map_err(annotate)?;
        let next_rx = if cfg.fault_injection {
            rx.clone()
        } else {
            apply_reconfiguration(&rx, req, rx.epoch).map_err(annotate)?
        };
        if req.reconfig_signal {
            phases.push((req.effective_frame, next_tx.clone(), next_rx.clone()));
        }
        tx = next_tx;
        rx = next_rx;
    }

    let n_bits = bits.len() as u64;
    let mut segments = Vec::new();
    for (k, (start, tx, rx)) in phases.iter().enumerate() {
        let end = phases.get(k + 1).map_or(n_bits, |p| p.0).min(n_bits);
        if *start >= end {
            continue;
        }
        let seed = rng_seed ^ k as u64;
        segments.push(run_segment(
            segments.len(),
            &bits[*start as usize..end as usize],
            *start,
            tx,
            rx,
            cfg,
            seed,
        )?);
    }
    Ok(SessionReport { segments })
}

fn run_segment(
    index: usize,
    bits: &[u8],
    start_frame: u64,
    tx: &PhyState,
    rx: &PhyState,
    cfg: &SessionConfig,
    seed: u64,
) -> Result<SegmentReport> {
    let tx_code = tx.active_code().rotated(start_frame);
    let modulator = Modulator::new(tx.modulation, &tx.params, &tx_code, &tx.pulse, tx.sample_rate)?;
    let sent = modulator.modulate(bits);
    let eb = tx.modulation.scheme().energy_per_bit();

    let (received, offset, ebn0_db) = match &cfg.channel {
        SessionChannel::Noiseless => (sent.clone(), 0, f64::INFINITY),
        SessionChannel::Awgn { ebn0_db } => (add_awgn(&sent, *ebn0_db, eb, seed), 0, *ebn0_db),
        SessionChannel::Multipath { profile, ebn0_db } => {
            let ch = draw_channel(profile, seed)?;
            let faded = apply_channel(&sent, &ch);
            let offset = (ch.first_delay() * sent.sample_rate).round() as usize;
            (add_awgn(&faded, *ebn0_db, eb, seed.rotate_left(17)), offset, *ebn0_db)
        }
    };

    let rx_code = rx.active_code().rotated(start_frame);
    let mut receiver = ReceiverConfig::new(rx.modulation, rx.params, rx_code, &rx.pulse, rx.sample_rate)?;
    if rx.modulation.scheme() == crate::transmitter::Scheme::Ook {
        let t = calibrate_ook_threshold(
            &receiver,
            ebn0_db,
            rx.modulation.scheme().energy_per_bit(),
            cfg.ook_calibration_frames,
            seed.rotate_left(33),
        )?;
        receiver = receiver.with_threshold(t)?;
    }
    let mut decoded = demodulate(&received, &receiver, &SyncEstimate::at(offset))?;
    decoded.truncate(bits.len());
    let mismatches = decoded
        .iter()
        .zip(bits)
        .filter(|(d, b)| (**d != 0) != (**b != 0))
        .count();
    let errors = (mismatches + bits.len() - decoded.len()) as u64;

    let n = bits.len() as u64;
    let duration = sent.duration();
    let throughput_bps = n as f64 / duration;
    Ok(SegmentReport {
        index,
        start_frame,
        end_frame: start_frame + n,
        t_c: tx.params.t_c(),
        n_c: tx.params.n_c(),
        tx_code: tx.active_code().id().to_string(),
        rx_code: rx.active_code().id().to_string(),
        decoded,
        errors,
        bits: n,
        ber: errors as f64 / n as f64,
        duration,
        throughput_bps,
        aggregate_rate_bps: throughput_bps * tx.params.n_c() as f64,
    })
}

/// Parses a reconfiguration script, one request per line:
/// `@<frame> set tc=<ns> nc=<int> code=<id> signal=<0|1>`. Only the frame
/// and `signal` are mandatory. Blank lines and `#` comments are skipped.
pub fn parse_script(text: &str) -> Result<Vec<ReconfigRequest>> {
    let mut requests = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let frame = tokens
            .next()
            .and_then(|t| t.strip_prefix('@'))
            .ok_or_else(|| Error::parse(line_no, "request must start with `@<frame>`"))?;
        let effective_frame = frame
            .parse()
            .map_err(|e| Error::parse(line_no, format!("bad frame `{frame}`: {e}")))?;
        if tokens.next() != Some("set") {
            return Err(Error::parse(line_no, "expected `set` after the frame"));
        }
        let mut req = ReconfigRequest {
            effective_frame,
            ..Default::default()
        };
        let mut signal = None;
        for token in tokens {
            let (key, value) = token
                .split_once('=')
                .ok_or_else(|| Error::parse(line_no, format!("expected key=value, got `{token}`")))?;
            let bad = |e: &dyn std::fmt::Display| Error::parse(line_no, format!("bad value for `{key}`: {e}"));
            match key {
                "tc" => {
                    let ns: f64 = value.parse().map_err(|e| bad(&e))?;
                    req.new_t_c = Some(ns * 1e-9);
                }
                "nc" => req.new_n_c = Some(value.parse().map_err(|e| bad(&e))?),
                "code" => req.new_code_id = Some(value.to_string()),
                "signal" => {
                    signal = Some(match value {
                        "0" => false,
                        "1" => true,
                        _ => return Err(bad(&"expected 0 or 1")),
                    })
                }
                _ => return Err(Error::parse(line_no, format!("unknown field `{key}`"))),
            }
        }
        req.reconfig_signal = signal.ok_or_else(|| Error::parse(line_no, "missing `signal=<0|1>`"))?;
        requests.push(req);
    }
    Ok(requests)
}

pub fn load_script(path: impl AsRef<Path>) -> Result<Vec<ReconfigRequest>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_script(&text)
}
