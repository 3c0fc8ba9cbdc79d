//! Time-hopping frame geometry and TH-code memory.
//!
//! A frame of duration `t_f = n_c * t_c` is split into `n_c` chips. Frame `j`
//! carries one pulse in chip `c_j`, where `c` is the active TH code repeated
//! cyclically. The aggregate rate over the `n_c` hopping slots is
//! `n_c / t_f = 1 / t_c`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use rand::Rng;

use crate::{exact_samples, rng_from_seed, Error, Result};

/// Upper bound on chips per frame (width of the hardware `n_c` input).
pub const MAX_CHIPS_PER_FRAME: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThParams {
    t_c: f64,
    n_c: usize,
}

impl ThParams {
    pub fn new(t_c: f64, n_c: usize) -> Result<Self> {
        if !(t_c > 0.0 && t_c.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "chip duration must be positive, got {t_c}"
            )));
        }
        if !(2..=MAX_CHIPS_PER_FRAME).contains(&n_c) {
            return Err(Error::InvalidParams(format!(
                "chips per frame must be in [2, {MAX_CHIPS_PER_FRAME}], got {n_c}"
            )));
        }
        Ok(Self { t_c, n_c })
    }

    /// Chip (slot) duration, seconds.
    pub fn t_c(&self) -> f64 {
        self.t_c
    }

    /// Chips per frame.
    pub fn n_c(&self) -> usize {
        self.n_c
    }

    /// Frame duration `n_c * t_c`, seconds.
    pub fn t_f(&self) -> f64 {
        self.n_c as f64 * self.t_c
    }

    pub fn data_rate(&self) -> f64 {
        data_rate(self)
    }

    /// Sample-domain geometry at `sample_rate`. Fails unless `t_c` is an
    /// exact multiple of the sample period.
    pub fn layout(&self, sample_rate: f64) -> Result<FrameLayout> {
        let chip = exact_samples(self.t_c, sample_rate).filter(|&n| n > 0).ok_or_else(|| {
            Error::ConfigConflict(format!(
                "chip duration {} s is not a multiple of the {} s sample period",
                self.t_c,
                sample_rate.recip()
            ))
        })?;
        Ok(FrameLayout { chip, n_c: self.n_c })
    }
}

impl Default for ThParams {
    fn default() -> Self {
        Self { t_c: 10e-9, n_c: 8 }
    }
}

/// Aggregate data rate `n_c / t_f = 1 / t_c`, bits per second.
pub fn data_rate(params: &ThParams) -> f64 {
    params.t_c.recip()
}

/// Frame geometry in samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameLayout {
    pub chip: usize,
    pub n_c: usize,
}

impl FrameLayout {
    pub fn frame(&self) -> usize {
        self.chip * self.n_c
    }

    /// First sample of the hopped chip of `frame`.
    pub fn chip_start(&self, frame: u64, code: &ThCode) -> usize {
        frame as usize * self.frame() + code.offset(frame) * self.chip
    }
}

/// A time-hopping code: per-frame chip offsets, repeated cyclically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThCode {
    id: String,
    offsets: Vec<usize>,
}

impl ThCode {
    pub fn new(id: impl Into<String>, offsets: Vec<usize>) -> Result<Self> {
        let id = id.into();
        if offsets.is_empty() {
            return Err(Error::InvalidParams(format!("TH code `{id}` is empty")));
        }
        if id.is_empty() || id.contains(|c: char| c.is_whitespace() || c == ':') {
            return Err(Error::InvalidParams(format!("invalid TH code id `{id}`")));
        }
        Ok(Self { id, offsets })
    }

    /// All-zero code of length 1.
    pub fn zeros(id: impl Into<String>) -> Self {
        Self::new(id, vec![0]).expect("non-empty code")
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Chip offset used by `frame`.
    pub fn offset(&self, frame: u64) -> usize {
        self.offsets[(frame % self.offsets.len() as u64) as usize]
    }

    /// The same code read starting at `phase`, so that frame 0 of the
    /// result uses `offset(phase)`.
    pub fn rotated(&self, phase: u64) -> Self {
        let k = (phase % self.offsets.len() as u64) as usize;
        let mut offsets = self.offsets.clone();
        offsets.rotate_left(k);
        Self {
            id: self.id.clone(),
            offsets,
        }
    }
}

/// Offsets of a TH code that fall outside `[0, n_c - 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeViolations {
    pub code_id: String,
    pub n_c: usize,
    /// `(index, offset)` of every offending entry.
    pub entries: Vec<(usize, usize)>,
}

impl fmt::Display for CodeViolations {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "code `{}` has offsets >= n_c = {}:", self.code_id, self.n_c)?;
        for (i, c) in &self.entries {
            write!(f, " [{i}]={c}")?;
        }
        Ok(())
    }
}

pub fn validate_code(code: &ThCode, params: &ThParams) -> std::result::Result<(), CodeViolations> {
    let entries: Vec<_> = code
        .offsets
        .iter()
        .copied()
        .enumerate()
        .filter(|&(_, c)| c >= params.n_c)
        .collect();
    if entries.is_empty() {
        Ok(())
    } else {
        Err(CodeViolations {
            code_id: code.id.clone(),
            n_c: params.n_c,
            entries,
        })
    }
}

/// Seeded pseudo-random code, offsets uniform over `[0, n_c - 1]`.
pub fn generate_code(seed: u64, length: usize, params: &ThParams) -> ThCode {
    generate_code_with_id(format!("gen{seed}"), seed, length, params)
}

pub fn generate_code_with_id(id: impl Into<String>, seed: u64, length: usize, params: &ThParams) -> ThCode {
    let mut rng = rng_from_seed(seed);
    let offsets = (0..length.max(1)).map(|_| rng.random_range(0..params.n_c)).collect();
    ThCode::new(id, offsets).expect("generated code is non-empty with a valid id")
}

/// Start time of the hopped chip of `frame`: `frame * t_f + c_frame * t_c`.
pub fn chip_start_time(frame: u64, code: &ThCode, params: &ThParams) -> f64 {
    frame as f64 * params.t_f() + code.offset(frame) as f64 * params.t_c
}

/// TH-code memory with one active entry.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeBank {
    entries: BTreeMap<String, ThCode>,
    active: String,
}

impl CodeBank {
    pub fn new(initial: ThCode) -> Self {
        let active = initial.id.clone();
        let mut entries = BTreeMap::new();
        entries.insert(active.clone(), initial);
        Self { entries, active }
    }

    /// Builds a bank from `codes`, the first one active.
    pub fn from_codes(codes: impl IntoIterator<Item = ThCode>) -> Result<Self> {
        let mut codes = codes.into_iter();
        let first = codes
            .next()
            .ok_or_else(|| Error::InvalidParams("code bank needs at least one code".into()))?;
        let mut bank = Self::new(first);
        for code in codes {
            bank.insert(code);
        }
        Ok(bank)
    }

    /// Stores `code`, replacing any entry with the same id.
    pub fn insert(&mut self, code: ThCode) {
        self.entries.insert(code.id.clone(), code);
    }

    pub fn select(&mut self, id: &str) -> Result<()> {
        if !self.entries.contains_key(id) {
            return Err(Error::UnknownCode(id.to_string()));
        }
        self.active = id.to_string();
        Ok(())
    }

    pub fn active(&self) -> &ThCode {
        &self.entries[&self.active]
    }

    pub fn active_id(&self) -> &str {
        &self.active
    }

    pub fn get(&self, id: &str) -> Option<&ThCode> {
        self.entries.get(id)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.entries.contains_key(id)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn codes(&self) -> impl Iterator<Item = &ThCode> {
        self.entries.values()
    }
}

/// Parses a code file: `code <id>: c0,c1,...` per line. Blank lines and
/// lines starting with `#` are skipped. Offsets `>= n_c` are rejected.
pub fn parse_code_file(text: &str, params: &ThParams) -> Result<Vec<ThCode>> {
    let mut codes = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let rest = line
            .strip_prefix("code ")
            .ok_or_else(|| Error::parse(line_no, "expected `code <id>: <offsets>`"))?;
        let (id, offsets) = rest
            .split_once(':')
            .ok_or_else(|| Error::parse(line_no, "missing `:` after code id"))?;
        let offsets = offsets
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|e| Error::parse(line_no, format!("bad offset `{}`: {e}", s.trim())))
            })
            .collect::<Result<Vec<_>>>()?;
        let code = ThCode::new(id.trim(), offsets).map_err(|e| Error::parse(line_no, e.to_string()))?;
        validate_code(&code, params).map_err(|v| Error::parse(line_no, v.to_string()))?;
        codes.push(code);
    }
    Ok(codes)
}

pub fn format_code_file<'a>(codes: impl IntoIterator<Item = &'a ThCode>) -> String {
    let mut out = String::new();
    for code in codes {
        let offsets: Vec<String> = code.offsets.iter().map(|c| c.to_string()).collect();
        out.push_str(&format!("code {}: {}\n", code.id, offsets.join(",")));
    }
    out
}

pub fn load_code_file(path: impl AsRef<Path>, params: &ThParams) -> Result<Vec<ThCode>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_code_file(&text, params)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(t_c: f64, n_c: usize) -> ThParams {
        ThParams::new(t_c, n_c).unwrap()
    }

    #[test]
    fn data_rate_is_inverse_chip_duration() {
        assert!((data_rate(&params(10e-9, 8)) - 100e6).abs() < 1e-3);
        assert!((data_rate(&params(10e-9, 1000)) - 100e6).abs() < 1e-3);
        assert!((data_rate(&params(2e-9, 4)) - 500e6).abs() < 1e-3);
    }

    #[test]
    fn data_rate_equals_chips_over_frame() {
        for t_c in [1e-9, 2.5e-9, 10e-9, 37e-9] {
            for n_c in [2, 3, 8, 1024] {
                let p = params(t_c, n_c);
                let lhs = data_rate(&p);
                let rhs = n_c as f64 / p.t_f();
                assert!((lhs - rhs).abs() <= 1e-12 * lhs);
            }
        }
    }

    #[test]
    fn rejects_bad_params() {
        assert!(ThParams::new(0.0, 8).is_err());
        assert!(ThParams::new(10e-9, 1).is_err());
        assert!(ThParams::new(10e-9, MAX_CHIPS_PER_FRAME + 1).is_err());
    }

    #[test]
    fn layout_requires_integer_chip() {
        assert_eq!(params(10e-9, 8).layout(50e9).unwrap().chip, 500);
        assert!(params(10.01e-9, 8).layout(50e9).is_err());
    }

    #[test]
    fn validate_code_examples() {
        let p = params(10e-9, 4);
        assert!(validate_code(&ThCode::new("a", vec![0, 0, 0]).unwrap(), &p).is_ok());
        assert!(validate_code(&ThCode::new("b", vec![2, 0, 3, 1]).unwrap(), &p).is_ok());
        let v = validate_code(&ThCode::new("c", vec![2, 5]).unwrap(), &p).unwrap_err();
        assert_eq!(v.entries, vec![(1, 5)]);
    }

    #[test]
    fn generated_codes_are_deterministic_and_valid() {
        let p = params(10e-9, 4);
        let a = generate_code(7, 8, &p);
        assert_eq!(a, generate_code(7, 8, &p));
        assert_ne!(a.offsets(), generate_code(8, 8, &p).offsets());
        assert!(validate_code(&a, &p).is_ok());
    }

    #[test]
    fn generated_offsets_are_uniform() {
        let p = params(10e-9, 4);
        let n = 10_000;
        let code = generate_code(12345, n, &p);
        let mut counts = [0usize; 4];
        for &c in code.offsets() {
            counts[c] += 1;
        }
        // Each count is Binomial(n, 1/4).
        let expected = n as f64 / 4.0;
        let sigma = (n as f64 * 0.25 * 0.75).sqrt();
        for c in counts {
            assert!((c as f64 - expected).abs() < 5.0 * sigma, "{counts:?}");
        }
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        // 3 degrees of freedom, 99.9th percentile is 16.27.
        assert!(chi2 < 16.27, "chi2 = {chi2}");
    }

    #[test]
    fn chip_start_examples() {
        let p = params(10e-9, 4);
        let zeros = ThCode::new("z", vec![0, 0, 0]).unwrap();
        assert_eq!(chip_start_time(0, &zeros, &p), 0.0);
        let code = ThCode::new("c", vec![2, 0, 3, 1]).unwrap();
        assert!((chip_start_time(3, &code, &p) - 130e-9).abs() < 1e-18);
        for j in 0..4u64 {
            for k in 1..5u64 {
                let d = chip_start_time(4 * k + j, &code, &p) - chip_start_time(j, &code, &p);
                assert!((d - (4 * k) as f64 * p.t_f()).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn chip_starts_strictly_increase() {
        let p = params(10e-9, 8);
        let code = generate_code(99, 13, &p);
        let layout = p.layout(50e9).unwrap();
        let mut last = None;
        for j in 0..1000u64 {
            let s = layout.chip_start(j, &code);
            if let Some(prev) = last {
                assert!(s > prev);
            }
            last = Some(s);
        }
    }

    #[test]
    fn rotation_shifts_phase() {
        let code = ThCode::new("c", vec![2, 0, 3, 1]).unwrap();
        let r = code.rotated(5);
        for j in 0..8 {
            assert_eq!(r.offset(j), code.offset(j + 5));
        }
    }

    #[test]
    fn bank_selection() {
        let p = ThParams::default();
        let mut bank = CodeBank::new(generate_code_with_id("a", 1, 8, &p));
        bank.insert(generate_code_with_id("b", 2, 8, &p));
        assert_eq!(bank.active_id(), "a");
        bank.select("b").unwrap();
        assert_eq!(bank.active_id(), "b");
        assert!(matches!(bank.select("zz"), Err(Error::UnknownCode(_))));
        assert_eq!(bank.active_id(), "b");
    }

    #[test]
    fn code_file_parsing() {
        let p = params(10e-9, 4);
        let text = "# bank\ncode a: 0,1,2,3\n\ncode b:3, 3 ,0\n";
        let codes = parse_code_file(text, &p).unwrap();
        assert_eq!(codes.len(), 2);
        assert_eq!(codes[1].offsets(), &[3, 3, 0]);
        assert_eq!(parse_code_file(&format_code_file(&codes), &p).unwrap(), codes);

        let err = parse_code_file("code a: 0,1\ncode b: 0,4\n", &p).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        assert!(parse_code_file("codes a: 1", &p).is_err());
        assert!(parse_code_file("code a 1,2", &p).is_err());
        assert!(parse_code_file("code a: 1,x", &p).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn active_code_always_in_bank(ops in prop::collection::vec((any::<bool>(), 0u8..6), 0..40)) {
                let p = ThParams::default();
                let mut bank = CodeBank::new(generate_code_with_id("k0", 0, 4, &p));
                for (insert, k) in ops {
                    let id = format!("k{k}");
                    if insert {
                        bank.insert(generate_code_with_id(id, k as u64, 4, &p));
                    } else {
                        let _ = bank.select(&id);
                    }
                    prop_assert!(bank.contains(bank.active_id()));
                }
            }
        }
    }
}
