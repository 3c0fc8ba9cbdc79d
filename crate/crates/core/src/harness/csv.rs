use std::fmt::Write as _;
use std::path::Path;

use crate::{Error, Result};

use super::BerPoint;

pub const CSV_HEADER: &str = "ebn0_db,errors,bits,ber,ci95";

/// Header plus one row per point. Floats use Rust's shortest round-trip
/// formatting, so parsing the output recovers the exact values.
pub fn format_csv(points: &[BerPoint]) -> String {
    let mut out = String::with_capacity(32 * (points.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for p in points {
        let _ = writeln!(
            out,
            "{:?},{},{},{:e},{:e}",
            p.ebn0_db, p.errors, p.bits, p.ber, p.ci95_halfwidth
        );
    }
    out
}

pub fn emit_csv(points: &[BerPoint], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_csv(points)).map_err(|e| Error::io(path, e))
}

/// Like [`emit_csv`], preceded by `# `-prefixed metadata lines.
pub fn emit_csv_annotated(points: &[BerPoint], comments: &[String], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = String::new();
    for c in comments {
        let _ = writeln!(text, "# {c}");
    }
    text.push_str(&format_csv(points));
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Parses the output of [`format_csv`]; `#` lines are skipped.
pub fn parse_csv(text: &str) -> Result<Vec<BerPoint>> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'));
    match lines.next() {
        Some((_, header)) if header.trim() == CSV_HEADER => {}
        Some((i, _)) => return Err(Error::parse(i + 1, format!("expected header `{CSV_HEADER}`"))),
        None => return Err(Error::parse(1, "missing header")),
    }
    lines
        .map(|(i, line)| {
            let line_no = i + 1;
            let fields: Vec<&str> = line.trim().split(',').collect();
            if fields.len() != 5 {
                return Err(Error::parse(
                    line_no,
                    format!("expected 5 fields, got {}", fields.len()),
                ));
            }
            let float = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| Error::parse(line_no, format!("`{s}`: {e}")))
            };
            let int = |s: &str| {
                s.parse::<u64>()
                    .map_err(|e| Error::parse(line_no, format!("`{s}`: {e}")))
            };
            Ok(BerPoint {
                ebn0_db: float(fields[0])?,
                errors: int(fields[1])?,
                bits: int(fields[2])?,
                ber: float(fields[3])?,
                ci95_halfwidth: float(fields[4])?,
            })
        })
        .collect()
}
