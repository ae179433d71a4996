//! Dimensional quantities written as `"<number> <unit>"`.
//!
//! Each dimension has one canonical unit, which is what the engines use
//! internally and what serialized configs are written in.

use std::f64::consts::TAU;
use twodcs::model::wavenumber_to_angular;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    /// Three-level angular frequency, canonical rad/µs.
    Frequency,
    /// Three-level time, canonical µs.
    Time,
    /// Vibrational frequency, canonical cm⁻¹.
    Wavenumber,
    /// Vibrational time, canonical ps.
    ShortTime,
}

impl Dimension {
    /// Accepted units with their factor into the canonical unit; the first
    /// entry is canonical.
    fn units(self) -> &'static [(&'static str, f64)] {
        const FREQUENCY: &[(&str, f64)] = &[
            ("rad_per_us", 1.0),
            ("MHz_over_2pi", TAU),
            ("kHz_over_2pi", TAU * 1e-3),
            ("GHz_over_2pi", TAU * 1e3),
            ("Hz_over_2pi", TAU * 1e-6),
        ];
        const TIME: &[(&str, f64)] = &[("us", 1.0), ("ns", 1e-3), ("ms", 1e3)];
        const SHORT_TIME: &[(&str, f64)] = &[("ps", 1.0), ("fs", 1e-3)];
        match self {
            Dimension::Frequency => FREQUENCY,
            Dimension::Time => TIME,
            // rad/ps is handled separately: its factor is not a literal.
            Dimension::Wavenumber => &[("cm-1", 1.0)],
            Dimension::ShortTime => SHORT_TIME,
        }
    }

    pub fn canonical(self) -> &'static str {
        self.units()[0].0
    }

    pub fn accepted(self) -> Vec<&'static str> {
        let mut v: Vec<&str> = self.units().iter().map(|u| u.0).collect();
        if self == Dimension::Wavenumber {
            v.push("rad_per_ps");
        }
        v
    }

    fn factor(self, unit: &str) -> Option<f64> {
        if self == Dimension::Wavenumber && unit == "rad_per_ps" {
            return Some(1.0 / wavenumber_to_angular(1.0));
        }
        self.units().iter().find(|u| u.0 == unit).map(|u| u.1)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum UnitError {
    #[error("expected `<number> <unit>`, got `{0}`")]
    Syntax(String),
    #[error("unit `{found}` is not a {dimension:?} unit; use one of {accepted}")]
    Mismatch { found: String, dimension: Dimension, accepted: String },
}

/// Parses `text` into the canonical unit of `dimension`.
pub fn parse_quantity(text: &str, dimension: Dimension) -> Result<f64, UnitError> {
    let mut parts = text.split_whitespace();
    let (Some(number), Some(unit), None) = (parts.next(), parts.next(), parts.next()) else {
        return Err(UnitError::Syntax(text.to_string()));
    };
    let value: f64 = number.parse().map_err(|_| UnitError::Syntax(text.to_string()))?;
    let factor = dimension.factor(unit).ok_or_else(|| UnitError::Mismatch {
        found: unit.to_string(),
        dimension,
        accepted: dimension.accepted().join(", "),
    })?;
    Ok(value * factor)
}

/// Canonical text form; parses back to exactly `value`.
pub fn format_quantity(value: f64, dimension: Dimension) -> String {
    format!("{value:?} {}", dimension.canonical())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn converts_to_canonical_units() {
        assert_eq!(parse_quantity("2 MHz_over_2pi", Dimension::Frequency).unwrap(), TAU * 2.0);
        assert_eq!(parse_quantity("500 ns", Dimension::Time).unwrap(), 0.5);
        assert_eq!(parse_quantity("5 fs", Dimension::ShortTime).unwrap(), 0.005);
        let w = parse_quantity("1 rad_per_ps", Dimension::Wavenumber).unwrap();
        assert!((wavenumber_to_angular(w) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_missing_or_foreign_units() {
        assert!(matches!(parse_quantity("2", Dimension::Frequency), Err(UnitError::Syntax(_))));
        assert!(matches!(parse_quantity("2 us", Dimension::Frequency), Err(UnitError::Mismatch { .. })));
        assert!(matches!(parse_quantity("2 cm-1", Dimension::Frequency), Err(UnitError::Mismatch { .. })));
        assert!(matches!(parse_quantity("x MHz_over_2pi", Dimension::Frequency), Err(UnitError::Syntax(_))));
    }

    #[test]
    fn canonical_form_round_trips() {
        for v in [0.0, 1e-300, TAU * 4.33e6, -3.25, 1.0 / 3.0] {
            for d in [Dimension::Frequency, Dimension::Time, Dimension::Wavenumber, Dimension::ShortTime] {
                assert_eq!(parse_quantity(&format_quantity(v, d), d).unwrap(), v);
            }
        }
    }
}
