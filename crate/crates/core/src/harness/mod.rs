//! Monte Carlo BER-vs-Eb/N0 evaluation: sweeps, hardware-style presets, CSV
//! output and side-by-side comparison of receiver architectures.

mod compare;
mod csv;
mod presets;
mod sweep;

pub use compare::{compare_architectures, Comparison, PointRanking};
pub use csv::{emit_csv, emit_csv_annotated, format_csv, parse_csv, CSV_HEADER};
pub use presets::{preset, Preset, PRESETS};
pub use sweep::{
    ook_threshold, parse_grid, run_point, run_sweep, LinkConfig, SweepChannel, SweepConfig, SweepDatapath, SyncMode,
    BLOCK_BITS,
};

/// z-value of the two-sided 95% normal interval.
pub const Z95: f64 = 1.96;

/// One point of a BER curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerPoint {
    pub ebn0_db: f64,
    pub errors: u64,
    pub bits: u64,
    pub ber: f64,
    /// Half-width of the normal-approximation binomial 95% interval.
    pub ci95_halfwidth: f64,
}

impl BerPoint {
    pub fn new(ebn0_db: f64, errors: u64, bits: u64) -> Self {
        assert!(errors <= bits, "more errors than bits");
        let ber = if bits == 0 { 0.0 } else { errors as f64 / bits as f64 };
        let mut point = Self {
            ebn0_db,
            errors,
            bits,
            ber,
            ci95_halfwidth: 0.0,
        };
        point.ci95_halfwidth = Z95 * point.sigma();
        point
    }

    /// Binomial standard error `sqrt(p (1 - p) / n)` at the measured BER.
    pub fn sigma(&self) -> f64 {
        if self.bits == 0 {
            return 0.0;
        }
        (self.ber * (1.0 - self.ber) / self.bits as f64).sqrt()
    }

    /// `ber -/+ 3 sigma`.
    pub fn interval3(&self) -> (f64, f64) {
        let s = 3.0 * self.sigma();
        (self.ber - s, self.ber + s)
    }

    /// True when this point's 3-sigma interval lies entirely below `other`'s.
    pub fn significantly_below(&self, other: &BerPoint) -> bool {
        self.interval3().1 < other.interval3().0
    }
}
