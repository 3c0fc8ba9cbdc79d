use std::path::Path;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Exp, Poisson};
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::signal::SampledSignal;
use crate::{rng_from_seed, Error, Result};

/// Clustered (Saleh-Valenzuela) multipath statistics. Rates are per ns and
/// times are in ns.
#[derive(Debug, Clone, PartialEq)]
pub struct SvProfile {
    pub name: String,
    /// Cluster arrival rate, 1/ns.
    pub cluster_arrival_rate: f64,
    /// Ray arrival rate within a cluster, 1/ns.
    pub ray_arrival_rate: f64,
    /// Cluster power decay constant, ns.
    pub cluster_decay: f64,
    /// Ray power decay constant, ns.
    pub ray_decay: f64,
    /// Mean number of clusters.
    pub mean_clusters: f64,
    /// Truncation of the impulse response, ns.
    pub max_excess_delay: f64,
}

impl SvProfile {
    /// Residential line-of-sight parameter set.
    pub fn cm1_like() -> Self {
        Self {
            name: "cm1-like".to_string(),
            cluster_arrival_rate: 0.047,
            ray_arrival_rate: 1.54,
            cluster_decay: 22.61,
            ray_decay: 12.53,
            mean_clusters: 3.0,
            max_excess_delay: 200.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("cluster_arrival_rate", self.cluster_arrival_rate),
            ("ray_arrival_rate", self.ray_arrival_rate),
            ("cluster_decay", self.cluster_decay),
            ("ray_decay", self.ray_decay),
            ("num_clusters", self.mean_clusters),
            ("max_excess_delay", self.max_excess_delay),
        ];
        for (key, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParams(format!("profile {key} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

impl Default for SvProfile {
    fn default() -> Self {
        Self::cm1_like()
    }
}

/// Parses `key = value` lines. Missing keys keep the [`SvProfile::cm1_like`]
/// values; unknown keys are an error.
pub fn parse_profile(text: &str) -> Result<SvProfile> {
    let mut p = SvProfile::cm1_like();
    p.name = "custom".to_string();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::parse(line_no, "expected `key = value`"))?;
        let (key, value) = (key.trim(), value.trim());
        if key == "name" {
            p.name = value.to_string();
            continue;
        }
        let slot = match key {
            "cluster_arrival_rate" => &mut p.cluster_arrival_rate,
            "ray_arrival_rate" => &mut p.ray_arrival_rate,
            "cluster_decay" => &mut p.cluster_decay,
            "ray_decay" => &mut p.ray_decay,
            "num_clusters" | "mean_clusters" => &mut p.mean_clusters,
            "max_excess_delay" => &mut p.max_excess_delay,
            _ => return Err(Error::parse(line_no, format!("unknown profile key `{key}`"))),
        };
        *slot = value
            .parse()
            .map_err(|e| Error::parse(line_no, format!("bad value for `{key}`: {e}")))?;
    }
    p.validate()?;
    Ok(p)
}

pub fn load_profile(path: impl AsRef<Path>) -> Result<SvProfile> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_profile(&text)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tap {
    /// Seconds.
    pub delay: f64,
    pub gain: f64,
}

/// A discrete multipath impulse response.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    taps: Vec<Tap>,
    profile_id: String,
}

impl ChannelRealization {
    /// Taps must have nonnegative, strictly increasing delays. Gains are kept
    /// as given; see [`ChannelRealization::normalized`].
    pub fn new(taps: Vec<Tap>, profile_id: impl Into<String>) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::InvalidParams("channel needs at least one tap".into()));
        }
        if taps
            .iter()
            .any(|t| !(t.delay >= 0.0 && t.delay.is_finite() && t.gain.is_finite()))
        {
            return Err(Error::InvalidParams("tap delays must be finite and nonnegative".into()));
        }
        if taps.windows(2).any(|w| w[1].delay <= w[0].delay) {
            return Err(Error::InvalidParams("tap delays must be strictly increasing".into()));
        }
        Ok(Self {
            taps,
            profile_id: profile_id.into(),
        })
    }

    /// Single unit tap at zero delay.
    pub fn identity() -> Self {
        Self {
            taps: vec![Tap { delay: 0.0, gain: 1.0 }],
            profile_id: "awgn".to_string(),
        }
    }

    /// Rescales the gains to unit total energy.
    pub fn normalized(mut self) -> Self {
        let energy = self.energy();
        if energy > 0.0 {
            let k = energy.sqrt().recip();
            self.taps.iter_mut().for_each(|t| t.gain *= k);
        }
        self
    }

    pub fn taps(&self) -> &[Tap] {
        &self.taps
    }

    pub fn profile_id(&self) -> &str {
        &self.profile_id
    }

    /// `sum(gain^2)`.
    pub fn energy(&self) -> f64 {
        self.taps.iter().map(|t| t.gain * t.gain).sum()
    }

    pub fn first_delay(&self) -> f64 {
        self.taps[0].delay
    }

    /// Taps on the sample grid: delays rounded to the nearest sample,
    /// coincident taps summed.
    pub fn discretize(&self, sample_rate: f64) -> Vec<(usize, f64)> {
        let mut out: Vec<(usize, f64)> = Vec::with_capacity(self.taps.len());
        for t in &self.taps {
            let shift = (t.delay * sample_rate).round() as usize;
            match out.last_mut() {
                Some(last) if last.0 == shift => last.1 += t.gain,
                _ => out.push((shift, t.gain)),
            }
        }
        out
    }
}

/// Draws one realization: `max(1, Poisson(mean_clusters))` clusters with
/// exponential inter-arrival times, rays within each cluster likewise,
/// amplitudes `sqrt(exp(-T/Gamma) * exp(-tau/gamma))` with random sign, all
/// truncated at the maximum excess delay and normalized to unit energy.
pub fn draw_channel(profile: &SvProfile, rng_seed: u64) -> Result<ChannelRealization> {
    profile.validate()?;
    let mut rng = rng_from_seed(rng_seed);
    let n_clusters = Poisson::new(profile.mean_clusters)
        .map_err(|e| Error::InvalidParams(e.to_string()))?
        .sample(&mut rng)
        .max(1.0) as usize;
    let cluster_gap = Exp::new(profile.cluster_arrival_rate).map_err(|e| Error::InvalidParams(e.to_string()))?;
    let ray_gap = Exp::new(profile.ray_arrival_rate).map_err(|e| Error::InvalidParams(e.to_string()))?;
    let horizon = profile.max_excess_delay;

    let mut taps = Vec::new();
    let mut cluster_time = 0.0;
    for l in 0..n_clusters {
        if l > 0 {
            cluster_time += cluster_gap.sample(&mut rng);
        }
        if cluster_time >= horizon {
            break;
        }
        let cluster_power = (-cluster_time / profile.cluster_decay).exp();
        let mut ray_time = 0.0;
        while cluster_time + ray_time < horizon {
            let power = cluster_power * (-ray_time / profile.ray_decay).exp();
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            taps.push(Tap {
                delay: (cluster_time + ray_time) * 1e-9,
                gain: sign * power.sqrt(),
            });
            ray_time += ray_gap.sample(&mut rng);
        }
    }
    taps.sort_by(|a, b| a.delay.total_cmp(&b.delay));
    taps.dedup_by(|b, a| {
        if a.delay == b.delay {
            a.gain += b.gain;
            true
        } else {
            false
        }
    });
    Ok(ChannelRealization::new(taps, profile.name.clone())?.normalized())
}

const DIRECT_TAP_LIMIT: usize = 64;

/// `sum_i gain_i * shift(signal, delay_i)`, output extended by the largest
/// delay. Delays are rounded to the nearest sample.
pub fn apply_channel(signal: &SampledSignal, ch: &ChannelRealization) -> SampledSignal {
    let taps = ch.discretize(signal.sample_rate);
    let max_shift = taps.last().map_or(0, |t| t.0);
    let samples = if taps.len() <= DIRECT_TAP_LIMIT {
        convolve_direct(&signal.samples, &taps, max_shift)
    } else {
        convolve_fft(&signal.samples, &taps, max_shift)
    };
    SampledSignal {
        samples,
        sample_rate: signal.sample_rate,
        t0: signal.t0,
    }
}

fn convolve_direct(x: &[f64], taps: &[(usize, f64)], max_shift: usize) -> Vec<f64> {
    let mut out = vec![0.0; x.len() + max_shift];
    for &(shift, gain) in taps {
        for (o, v) in out[shift..shift + x.len()].iter_mut().zip(x) {
            *o += gain * v;
        }
    }
    out
}

// Overlap-add with a dense impulse response.
fn convolve_fft(x: &[f64], taps: &[(usize, f64)], max_shift: usize) -> Vec<f64> {
    let h_len = max_shift + 1;
    let n = (2 * h_len).next_power_of_two().max(4096);
    let seg = n - h_len + 1;
    let mut planner = FftPlanner::<f64>::new();
    let fwd: Arc<dyn Fft<f64>> = planner.plan_fft_forward(n);
    let inv: Arc<dyn Fft<f64>> = planner.plan_fft_inverse(n);

    let mut h = vec![Complex::new(0.0, 0.0); n];
    for &(shift, gain) in taps {
        h[shift].re += gain;
    }
    fwd.process(&mut h);

    let out_len = x.len() + max_shift;
    let mut out = vec![0.0; out_len];
    let mut buf = vec![Complex::new(0.0, 0.0); n];
    let scale = (n as f64).recip();
    for start in (0..x.len()).step_by(seg) {
        let chunk = &x[start..(start + seg).min(x.len())];
        if chunk.iter().all(|&v| v == 0.0) {
            continue;
        }
        buf.iter_mut().for_each(|c| *c = Complex::new(0.0, 0.0));
        for (b, &v) in buf.iter_mut().zip(chunk) {
            b.re = v;
        }
        fwd.process(&mut buf);
        for (b, hv) in buf.iter_mut().zip(&h) {
            *b *= hv;
        }
        inv.process(&mut buf);
        let end = (start + n).min(out_len);
        for (o, b) in out[start..end].iter_mut().zip(&buf) {
            *o += b.re * scale;
        }
    }
    out
}
