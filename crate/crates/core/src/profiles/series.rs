use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Uniformly sampled power profile in MW.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    values: Vec<f64>,
    dt_hours: f64,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>, dt_hours: f64) -> Result<Self> {
        if !(dt_hours.is_finite() && dt_hours > 0.0) {
            return Err(domain(format!("dt_hours must be positive, got {dt_hours}")));
        }
        if values.is_empty() {
            return Err(Error::Shape(
                "time series must hold at least one sample".into(),
            ));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(domain(format!("sample {i} is not finite")));
        }
        Ok(Self { values, dt_hours })
    }

    /// Hourly series.
    pub fn hourly(values: Vec<f64>) -> Result<Self> {
        Self::new(values, 1.0)
    }

    pub(crate) fn from_parts_unchecked(values: Vec<f64>, dt_hours: f64) -> Self {
        debug_assert!(dt_hours > 0.0 && !values.is_empty());
        Self { values, dt_hours }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn dt_hours(&self) -> f64 {
        self.dt_hours
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Energy in MWh, `Σ v·dt`.
    pub fn energy_mwh(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.dt_hours
    }

    /// Checks that `other` has the same length and sampling interval.
    pub fn check_same_shape(&self, other: &TimeSeries) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::Shape(format!(
                "length {} vs {}",
                self.len(),
                other.len()
            )));
        }
        if (self.dt_hours - other.dt_hours).abs() > 1e-12 * self.dt_hours {
            return Err(Error::Shape(format!(
                "dt_hours {} vs {}",
                self.dt_hours, other.dt_hours
            )));
        }
        Ok(())
    }

    /// Repeats or truncates the series to exactly `n` samples.
    pub fn tiled(&self, n: usize) -> TimeSeries {
        let values = self.values.iter().copied().cycle().take(n).collect();
        Self::from_parts_unchecked(values, self.dt_hours)
    }
}

/// Parses the text profile format: a `dt_hours=<float>` header line followed
/// by one MW value per line. Blank lines are skipped.
pub fn read_timeseries<R: BufRead>(reader: R) -> Result<TimeSeries> {
    let mut lines = reader.lines().enumerate();
    let dt_hours = loop {
        let Some((idx, line)) = lines.next() else {
            return Err(Error::Parse {
                line: 1,
                message: "missing `dt_hours=` header".into(),
            });
        };
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let Some(raw) = trimmed.strip_prefix("dt_hours=") else {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected `dt_hours=<float>` header, found `{trimmed}`"),
            });
        };
        let dt: f64 = raw.trim().parse().map_err(|_| Error::Parse {
            line: lineno,
            message: format!("invalid dt_hours `{}`", raw.trim()),
        })?;
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::Parse {
                line: lineno,
                message: format!("dt_hours must be positive, got {dt}"),
            });
        }
        break dt;
    };

    let mut values = Vec::new();
    for (idx, line) in lines {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let v: f64 = trimmed.parse().map_err(|_| Error::Parse {
            line: lineno,
            message: format!("invalid value `{trimmed}`"),
        })?;
        if !v.is_finite() {
            return Err(Error::Parse {
                line: lineno,
                message: format!("non-finite value `{trimmed}`"),
            });
        }
        values.push(v);
    }
    if values.is_empty() {
        return Err(Error::Parse {
            line: 2,
            message: "no samples after header".into(),
        });
    }
    Ok(TimeSeries::from_parts_unchecked(values, dt_hours))
}

pub fn write_timeseries<W: Write>(ts: &TimeSeries, mut out: W) -> Result<()> {
    writeln!(out, "dt_hours={}", ts.dt_hours)?;
    for v in &ts.values {
        writeln!(out, "{v}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<TimeSeries> {
        read_timeseries(text.as_bytes())
    }

    #[test]
    fn parses_three_rows() {
        let ts = parse("dt_hours=1\n1.0\n2.0\n3.0\n").unwrap();
        assert_eq!(ts.values(), &[1.0, 2.0, 3.0]);
        assert_eq!(ts.dt_hours(), 1.0);
    }

    #[test]
    fn empty_body_is_an_error() {
        assert!(matches!(parse("dt_hours=1\n"), Err(Error::Parse { .. })));
    }

    #[test]
    fn nan_names_its_line() {
        match parse("dt_hours=1\n1.0\nNaN\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_header_and_dt() {
        assert!(matches!(
            parse("1.0\n2.0\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse("dt_hours=0\n1.0\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse("dt_hours=-2\n1.0\n"),
            Err(Error::Parse { .. })
        ));
        match parse("dt_hours=0.5\n1.0\nabc\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn write_then_read() {
        let ts = TimeSeries::new(vec![0.1, -2.5, 1e-7], 0.25).unwrap();
        let mut buf = Vec::new();
        write_timeseries(&ts, &mut buf).unwrap();
        assert_eq!(read_timeseries(buf.as_slice()).unwrap(), ts);
    }

    #[test]
    fn constructor_invariants() {
        assert!(TimeSeries::new(vec![], 1.0).is_err());
        assert!(TimeSeries::new(vec![1.0], 0.0).is_err());
        assert!(TimeSeries::new(vec![f64::INFINITY], 1.0).is_err());
    }

    #[test]
    fn tiling_wraps() {
        let ts = TimeSeries::hourly(vec![1.0, 2.0]).unwrap();
        assert_eq!(ts.tiled(5).values(), &[1.0, 2.0, 1.0, 2.0, 1.0]);
        assert_eq!(ts.tiled(1).values(), &[1.0]);
    }
}
