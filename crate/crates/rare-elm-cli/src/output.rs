use std::io::Write;
use std::path::Path;

use thiserror::Error;

use crate::config::{Format, Method};

pub const HEADER: [&str; 12] = [
    "method",
    "alpha",
    "gamma",
    "d",
    "n",
    "reps",
    "ell_hat",
    "log10_ell",
    "re",
    "rtvp",
    "cpu_seconds",
    "flags",
];

/// Summary of one cell. `n` is the sample budget of a single replicate.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub method: Method,
    pub alpha: f64,
    pub gamma: f64,
    pub d: usize,
    pub n: usize,
    pub reps: usize,
    pub ell_hat: f64,
    pub re: f64,
    pub rtvp: f64,
    pub cpu_seconds: f64,
    pub flags: Vec<String>,
}

impl ResultRow {
    pub fn log10_ell(&self) -> f64 {
        self.ell_hat.log10()
    }

    /// Equality treating `NaN` fields as equal.
    pub fn same_as(&self, other: &ResultRow) -> bool {
        let f = |a: f64, b: f64| a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan());
        self.method == other.method
            && f(self.alpha, other.alpha)
            && f(self.gamma, other.gamma)
            && self.d == other.d
            && self.n == other.n
            && self.reps == other.reps
            && f(self.ell_hat, other.ell_hat)
            && f(self.re, other.re)
            && f(self.rtvp, other.rtvp)
            && f(self.cpu_seconds, other.cpu_seconds)
            && self.flags == other.flags
    }

    fn fields(&self) -> [String; 12] {
        [
            self.method.to_string(),
            plain(self.alpha),
            plain(self.gamma),
            self.d.to_string(),
            self.n.to_string(),
            self.reps.to_string(),
            scientific(self.ell_hat),
            if self.ell_hat > 0.0 {
                format!("{:.4}", self.log10_ell())
            } else {
                "NaN".into()
            },
            scientific(self.re),
            scientific(self.rtvp),
            scientific(self.cpu_seconds),
            self.flags.join(";"),
        ]
    }
}

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed CSV: {0}")]
    Parse(String),
}

/// Shortest round-trip scientific form, padded to at least six significant
/// digits. Zero prints as `0`.
pub fn scientific(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let s = format!("{x:e}");
    let digits = s
        .split('e')
        .next()
        .unwrap_or("")
        .chars()
        .filter(char::is_ascii_digit)
        .count();
    if digits < 6 {
        format!("{x:.5e}")
    } else {
        s
    }
}

fn plain(x: f64) -> String {
    if x != 0.0 && (x.abs() >= 1e6 || x.abs() < 1e-3) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

pub fn render(rows: &[ResultRow], format: Format) -> String {
    match format {
        Format::Csv => render_csv(rows),
        Format::Table => render_table(rows),
    }
}

pub fn render_csv(rows: &[ResultRow]) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(HEADER).expect("in-memory write");
    for r in rows {
        w.write_record(r.fields()).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("fields are UTF-8")
}

pub fn render_table(rows: &[ResultRow]) -> String {
    let cells: Vec<[String; 12]> = rows.iter().map(ResultRow::fields).collect();
    let mut width: Vec<usize> = HEADER.iter().map(|h| h.len()).collect();
    for c in &cells {
        for (w, f) in width.iter_mut().zip(c) {
            *w = (*w).max(f.chars().count());
        }
    }
    let line = |fields: &[String]| {
        let mut s = String::new();
        for (i, (f, w)) in fields.iter().zip(&width).enumerate() {
            if i > 0 {
                s.push_str("  ");
            }
            if i == fields.len() - 1 {
                s.push_str(f);
            } else {
                s.push_str(&format!("{f:<w$}"));
            }
        }
        s.trim_end().to_string() + "\n"
    };
    let mut out = line(&HEADER.map(String::from));
    for c in &cells {
        out.push_str(&line(c));
    }
    out
}

/// Inverse of [`render_csv`]; `log10_ell` is recomputed, not read.
pub fn parse_csv(text: &str) -> Result<Vec<ResultRow>, OutputError> {
    let mut r = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let header = r.headers().map_err(|e| OutputError::Parse(e.to_string()))?;
    if header.iter().ne(HEADER) {
        return Err(OutputError::Parse(format!("unexpected header {header:?}")));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| OutputError::Parse(e.to_string()))?;
        let num = |i: usize| -> Result<f64, OutputError> {
            rec[i]
                .parse()
                .map_err(|_| OutputError::Parse(format!("column {} = `{}`", HEADER[i], &rec[i])))
        };
        let int = |i: usize| -> Result<usize, OutputError> {
            rec[i]
                .parse()
                .map_err(|_| OutputError::Parse(format!("column {} = `{}`", HEADER[i], &rec[i])))
        };
        rows.push(ResultRow {
            method: rec[0]
                .parse()
                .map_err(|e: crate::ConfigError| OutputError::Parse(e.to_string()))?,
            alpha: num(1)?,
            gamma: num(2)?,
            d: int(3)?,
            n: int(4)?,
            reps: int(5)?,
            ell_hat: num(6)?,
            re: num(8)?,
            rtvp: num(9)?,
            cpu_seconds: num(10)?,
            flags: if rec[11].is_empty() {
                Vec::new()
            } else {
                rec[11].split(';').map(String::from).collect()
            },
        });
    }
    Ok(rows)
}

/// Write to `path`, or to stdout when `None`.
pub fn write_output(text: &str, path: Option<&Path>) -> Result<(), OutputError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| OutputError::Io {
            path: p.display().to_string(),
            source,
        }),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|source| OutputError::Io {
                path: "<stdout>".into(),
                source,
            }),
    }
}
