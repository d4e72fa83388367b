//! Empirical-CDF datasets: `(income, cumulative probability)` pairs.
//!
//! The on-disk format is a two-column CSV with the header `x,F`, one
//! `<decimal>,<decimal>` row per point, LF or CRLF line endings.

use std::fmt::Write as _;
use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};

pub const HEADER: &str = "x,F";

/// Smallest number of points a dataset may hold.
pub const MIN_POINTS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EcdfPoint {
    pub x: f64,
    pub f: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EcdfDataset {
    name: String,
    currency: String,
    points: Vec<EcdfPoint>,
}

impl EcdfDataset {
    /// Validates and wraps `points`. Requires at least [`MIN_POINTS`] points,
    /// `x > 0` non-decreasing, and `0 < f < 1` strictly increasing.
    pub fn new(
        name: impl Into<String>,
        currency: impl Into<String>,
        points: Vec<EcdfPoint>,
    ) -> Result<Self> {
        validate_points(&points)?;
        if points.len() < MIN_POINTS {
            return Err(Error::invalid(
                None,
                format!("need at least {MIN_POINTS} points, got {}", points.len()),
            ));
        }
        Ok(EcdfDataset {
            name: name.into(),
            currency: currency.into(),
            points,
        })
    }

    /// Synthetic ECDF from raw draws: sorted ascending, point `i` (1-based)
    /// gets `f = i / (n + 1)`.
    ///
    /// Unlike [`new`](Self::new) this accepts fewer than [`MIN_POINTS`]
    /// draws.
    pub fn from_samples(draws: &[f64], name: impl Into<String>) -> Result<Self> {
        if draws.is_empty() {
            return Err(Error::domain("from_samples needs at least one draw"));
        }
        if let Some(bad) = draws.iter().find(|x| !x.is_finite()) {
            return Err(Error::domain(format!("non-finite draw {bad}")));
        }
        let mut xs = draws.to_vec();
        xs.sort_by(f64::total_cmp);
        let denom = (xs.len() + 1) as f64;
        let points = xs
            .into_iter()
            .enumerate()
            .map(|(i, x)| EcdfPoint {
                x,
                f: (i + 1) as f64 / denom,
            })
            .collect();
        Ok(EcdfDataset {
            name: name.into(),
            currency: String::new(),
            points,
        })
    }

    /// Parses the `x,F` CSV format.
    pub fn parse(name: impl Into<String>, source: &str) -> Result<Self> {
        let mut lines = source.split('\n');
        let header = lines.next().map(strip_cr).unwrap_or("");
        if header.is_empty() && source.trim().is_empty() {
            return Err(Error::invalid(None, "empty input"));
        }
        if header.trim_start_matches('\u{feff}') != HEADER {
            return Err(Error::invalid(
                None,
                format!("header must be exactly `{HEADER}`, got `{header}`"),
            ));
        }

        let mut points = Vec::new();
        let mut row = 0;
        let mut trailing = false;
        for line in lines {
            let line = strip_cr(line);
            if line.is_empty() {
                trailing = true;
                continue;
            }
            row += 1;
            if trailing {
                return Err(Error::invalid(Some(row), "blank line inside data"));
            }
            let mut fields = line.split(',');
            let (xs, fs) = match (fields.next(), fields.next(), fields.next()) {
                (Some(x), Some(f), None) => (x, f),
                _ => {
                    return Err(Error::invalid(
                        Some(row),
                        format!("expected two comma-separated fields, got `{line}`"),
                    ))
                }
            };
            let point = EcdfPoint {
                x: parse_decimal(xs, row, "x")?,
                f: parse_decimal(fs, row, "F")?,
            };
            check_point(&point, row)?;
            if let Some(prev) = points.last() {
                check_order(prev, &point, row)?;
            }
            points.push(point);
        }
        if points.is_empty() {
            return Err(Error::invalid(None, "no data rows"));
        }
        Self::new(name, "", points)
    }

    pub fn from_reader<R: Read>(name: impl Into<String>, mut reader: R) -> Result<Self> {
        let mut buf = String::new();
        reader
            .read_to_string(&mut buf)
            .map_err(|e| Error::invalid(None, format!("unreadable input: {e}")))?;
        Self::parse(name, &buf)
    }

    /// Loads a CSV file, naming the dataset after the file stem.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let text = std::fs::read_to_string(path)?;
        Self::parse(name, &text)
    }

    /// Writes the CSV format with LF line endings.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(16 * (self.points.len() + 1));
        out.push_str(HEADER);
        out.push('\n');
        for p in &self.points {
            let _ = writeln!(out, "{},{}", p.x, p.f);
        }
        out
    }

    pub fn with_currency(mut self, currency: impl Into<String>) -> Self {
        self.currency = currency.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn currency(&self) -> &str {
        &self.currency
    }

    pub fn points(&self) -> &[EcdfPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Smallest income (the first point, since `x` is sorted).
    pub fn x_min(&self) -> f64 {
        self.points[0].x
    }

    pub fn x_max(&self) -> f64 {
        self.points[self.points.len() - 1].x
    }

    pub fn mean_x(&self) -> f64 {
        self.points.iter().map(|p| p.x).sum::<f64>() / self.points.len() as f64
    }

    /// Copy with every income multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::domain(format!("scale factor must be positive, got {c}")));
        }
        let points = self
            .points
            .iter()
            .map(|p| EcdfPoint { x: p.x * c, f: p.f })
            .collect();
        Ok(EcdfDataset {
            name: self.name.clone(),
            currency: self.currency.clone(),
            points,
        })
    }
}

fn strip_cr(line: &str) -> &str {
    line.strip_suffix('\r').unwrap_or(line)
}

fn parse_decimal(field: &str, row: usize, column: &str) -> Result<f64> {
    let ok = !field.is_empty()
        && field
            .bytes()
            .all(|b| b.is_ascii_digit() || matches!(b, b'.' | b'-' | b'+' | b'e' | b'E'));
    let value = if ok { field.parse::<f64>().ok() } else { None };
    match value {
        Some(v) if v.is_finite() => Ok(v),
        _ => Err(Error::invalid(
            Some(row),
            format!("column {column}: `{field}` is not a decimal number"),
        )),
    }
}

fn check_point(p: &EcdfPoint, row: usize) -> Result<()> {
    if !(p.x > 0.0) {
        return Err(Error::invalid(Some(row), format!("x must be positive, got {}", p.x)));
    }
    if !(p.f > 0.0 && p.f < 1.0) {
        return Err(Error::invalid(
            Some(row),
            format!("F must lie strictly between 0 and 1, got {}", p.f),
        ));
    }
    Ok(())
}

fn check_order(prev: &EcdfPoint, p: &EcdfPoint, row: usize) -> Result<()> {
    if p.x < prev.x {
        return Err(Error::invalid(
            Some(row),
            format!("x decreasing ({} after {})", p.x, prev.x),
        ));
    }
    if p.f <= prev.f {
        return Err(Error::invalid(
            Some(row),
            format!("F not strictly increasing ({} after {})", p.f, prev.f),
        ));
    }
    Ok(())
}

fn validate_points(points: &[EcdfPoint]) -> Result<()> {
    for (i, p) in points.iter().enumerate() {
        check_point(p, i + 1)?;
        if i > 0 {
            check_order(&points[i - 1], p, i + 1)?;
        }
    }
    Ok(())
}

/// The bundled datasets.
pub mod fixtures {
    use super::EcdfDataset;

    pub const US_2012_CSV: &str = include_str!("../../../data/us_2012.csv");
    pub const UK_2011_12_CSV: &str = include_str!("../../../data/uk_2011_12.csv");

    /// Total personal income, United States 2012 (US dollars), 43 bins.
    pub fn us_2012() -> EcdfDataset {
        EcdfDataset::parse("us_2012", US_2012_CSV)
            .expect("bundled fixture is valid")
            .with_currency("USD")
    }

    /// Total income before tax, UK taxpayers 2011-12 (pounds), percentiles 1..99.
    pub fn uk_2011_12() -> EcdfDataset {
        EcdfDataset::parse("uk_2011_12", UK_2011_12_CSV)
            .expect("bundled fixture is valid")
            .with_currency("GBP")
    }
}
