use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesPoint {
    pub t: f64,
    pub value: f64,
    pub stat_err: f64,
    pub sys_err: f64,
}

/// `<m_x(t)>` on a time grid, with provenance.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ObservableSeries {
    pub points: Vec<SeriesPoint>,
    /// Ordered `key: value` pairs written as `#` comment lines.
    pub metadata: Vec<(String, String)>,
}

pub const CSV_HEADER: &str = "t,m_x,stat_err,sys_err";

#[derive(Debug, Error, Clone, PartialEq)]
#[error("results CSV line {line}: {message}")]
pub struct CsvError {
    pub line: usize,
    pub message: String,
}

impl ObservableSeries {
    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.value).collect()
    }

    pub fn times(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.t).collect()
    }

    pub fn push_meta(&mut self, key: &str, value: impl ToString) {
        self.metadata.push((key.to_string(), value.to_string()));
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// Sets every point's systematic error.
    pub fn with_systematic(mut self, sys: f64) -> Self {
        for p in &mut self.points {
            p.sys_err = sys;
        }
        self
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.metadata {
            writeln!(s, "# {k}: {v}").unwrap();
        }
        writeln!(s, "{CSV_HEADER}").unwrap();
        for p in &self.points {
            writeln!(s, "{},{},{},{}", p.t, p.value, p.stat_err, p.sys_err).unwrap();
        }
        s
    }

    pub fn parse_csv(text: &str) -> Result<Self, CsvError> {
        let mut out = Self::default();
        let mut header_seen = false;
        for (i, line) in text.lines().enumerate() {
            let no = i + 1;
            let bad = |message: String| CsvError { line: no, message };
            if let Some(rest) = line.strip_prefix('#') {
                let (k, v) = rest
                    .split_once(':')
                    .ok_or_else(|| bad(format!("comment without `key: value`: {line:?}")))?;
                out.metadata.push((k.trim().to_string(), v.trim().to_string()));
            } else if !header_seen {
                if line != CSV_HEADER {
                    return Err(bad(format!("expected header {CSV_HEADER:?}, found {line:?}")));
                }
                header_seen = true;
            } else {
                let f: Vec<f64> = line
                    .split(',')
                    .map(|x| x.trim().parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|e| bad(format!("{e} in {line:?}")))?;
                let [t, value, stat_err, sys_err] = f[..] else {
                    return Err(bad(format!("expected 4 columns, found {}", f.len())));
                };
                out.points.push(SeriesPoint { t, value, stat_err, sys_err });
            }
        }
        if !header_seen {
            return Err(CsvError { line: 0, message: "missing header".into() });
        }
        Ok(out)
    }
}
