//! Sweeps of the period-2 root count over `θ`.
//!
//! Rows are computed independently (in parallel when enabled) and assembled
//! in grid order. Output is CSV with the header
//! `k,theta,theta_cr,count,x0,x1,x2,flags` or a JSON array of objects with
//! the same field names. Numbers are printed with 17 significant digits, so
//! parsing the CSV back gives bit-identical rows.
//!
//! The `flags` field is a `;`-separated token list: `near_degenerate`,
//! `domain_edge`, `unpaired`, `overflow=<x>|<x>...` for roots past the third,
//! and `error=<message>`, which is always last.

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Execution;
use crate::period2::{theta_cr, Period2Error, ScalarMap};
use crate::solver::{find_h_roots_with, orbit_pairs, OrbitPair, DEFAULT_GRID};

pub const CSV_HEADER: [&str; 8] = ["k", "theta", "theta_cr", "count", "x0", "x1", "x2", "flags"];
/// Largest accepted number of grid points.
pub const MAX_STEPS: usize = 1_000_000;

#[derive(Debug, Error)]
pub enum ScanError {
    #[error("invalid theta range: need 0 < lo < hi < 1, got lo = {lo}, hi = {hi}")]
    InvalidRange { lo: f64, hi: f64 },
    #[error("steps must be in 1..={MAX_STEPS}, got {0}")]
    InvalidSteps(usize),
    #[error("theta grid is not strictly increasing at index {0}")]
    DegenerateGrid(usize),
    #[error(transparent)]
    Order(#[from] Period2Error),
    #[error("nothing to write: no scan rows")]
    Empty,
    #[error("writing {destination}: {source}")]
    Write {
        destination: String,
        #[source]
        source: io::Error,
    },
    #[error("csv line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ScanFlags {
    pub near_degenerate: bool,
    pub domain_edge: bool,
    pub unpaired: bool,
    /// Set when the root search failed for this row.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub k: u32,
    pub theta: f64,
    pub theta_cr: f64,
    pub count: usize,
    /// Ascending.
    pub roots: Vec<f64>,
    pub pairs: Vec<OrbitPair>,
    pub flags: ScanFlags,
}

/// Flat row as written to CSV and JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRecord {
    pub k: u32,
    pub theta: f64,
    pub theta_cr: f64,
    pub count: usize,
    pub x0: Option<f64>,
    pub x1: Option<f64>,
    pub x2: Option<f64>,
    pub flags: String,
}

/// Inclusive grid of `steps` points from `lo` to `hi`. One step gives `[lo]`.
pub fn theta_grid(lo: f64, hi: f64, steps: usize) -> Result<Vec<f64>, ScanError> {
    if !(lo > 0.0 && lo < hi && hi < 1.0) {
        return Err(ScanError::InvalidRange { lo, hi });
    }
    if steps == 0 || steps > MAX_STEPS {
        return Err(ScanError::InvalidSteps(steps));
    }
    if steps == 1 {
        return Ok(vec![lo]);
    }
    let last = (steps - 1) as f64;
    let grid: Vec<f64> = (0..steps)
        .map(|i| match i {
            0 => lo,
            i if i == steps - 1 => hi,
            i => ((last - i as f64) * lo + i as f64 * hi) / last,
        })
        .collect();
    if let Some(i) = grid.windows(2).position(|w| w[0] >= w[1]) {
        return Err(ScanError::DegenerateGrid(i + 1));
    }
    Ok(grid)
}

pub fn scan_theta(k: u32, theta_lo: f64, theta_hi: f64, steps: usize) -> Result<Vec<ScanRow>, ScanError> {
    scan_theta_with(k, theta_lo, theta_hi, steps, DEFAULT_GRID, Execution::default())
}

/// Root reports for every point of [`theta_grid`]. A row whose root search
/// fails is kept with `flags.error` set and no roots.
pub fn scan_theta_with(
    k: u32,
    theta_lo: f64,
    theta_hi: f64,
    steps: usize,
    grid: usize,
    exec: Execution,
) -> Result<Vec<ScanRow>, ScanError> {
    let crit = theta_cr(k)?;
    let thetas = theta_grid(theta_lo, theta_hi, steps)?;
    Ok(exec.map_slice(&thetas, |&theta| scan_row(k, theta, crit, grid)))
}

fn scan_row(k: u32, theta: f64, theta_cr: f64, grid: usize) -> ScanRow {
    match find_h_roots_with(theta, k, grid, Execution::Sequential) {
        Ok(rep) => ScanRow {
            k,
            theta,
            theta_cr,
            count: rep.count(),
            roots: rep.xs(),
            pairs: rep.pairs,
            flags: ScanFlags {
                near_degenerate: rep.flags.near_degenerate,
                domain_edge: rep.flags.domain_edge,
                unpaired: rep.flags.unpaired,
                error: None,
            },
        },
        Err(e) => ScanRow {
            k,
            theta,
            theta_cr,
            count: 0,
            roots: Vec::new(),
            pairs: Vec::new(),
            flags: ScanFlags {
                error: Some(e.to_string()),
                ..ScanFlags::default()
            },
        },
    }
}

/// `%.17g`: shortest of fixed / scientific with 17 significant digits,
/// trailing zeros removed. Lossless for every finite `f64`.
pub fn format_g17(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent digits");
    if (-5..17).contains(&exp) {
        let fixed = format!("{:.*}", (16 - exp) as usize, x);
        trim_zeros(&fixed).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

impl ScanRow {
    pub fn flag_tokens(&self) -> String {
        let mut tokens = Vec::new();
        if self.flags.near_degenerate {
            tokens.push("near_degenerate".to_string());
        }
        if self.flags.domain_edge {
            tokens.push("domain_edge".to_string());
        }
        if self.flags.unpaired {
            tokens.push("unpaired".to_string());
        }
        if self.roots.len() > 3 {
            let extra: Vec<String> = self.roots[3..].iter().map(|&x| format_g17(x)).collect();
            tokens.push(format!("overflow={}", extra.join("|")));
        }
        if let Some(e) = &self.flags.error {
            tokens.push(format!("error={e}"));
        }
        tokens.join(";")
    }

    pub fn to_record(&self) -> ScanRecord {
        let root = |i: usize| self.roots.get(i).copied();
        ScanRecord {
            k: self.k,
            theta: self.theta,
            theta_cr: self.theta_cr,
            count: self.count,
            x0: root(0),
            x1: root(1),
            x2: root(2),
            flags: self.flag_tokens(),
        }
    }

    fn csv_fields(&self) -> [String; 8] {
        let root = |i: usize| self.roots.get(i).map(|&x| format_g17(x)).unwrap_or_default();
        [
            self.k.to_string(),
            format_g17(self.theta),
            format_g17(self.theta_cr),
            self.count.to_string(),
            root(0),
            root(1),
            root(2),
            self.flag_tokens(),
        ]
    }
}

/// Where emitted tables go.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Destination {
    Stdout,
    File(PathBuf),
}

impl Destination {
    fn describe(&self) -> String {
        match self {
            Destination::Stdout => "standard output".into(),
            Destination::File(p) => p.display().to_string(),
        }
    }

    fn write_with(&self, body: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<(), ScanError> {
        let wrap = |source| ScanError::Write {
            destination: self.describe(),
            source,
        };
        match self {
            Destination::Stdout => {
                let mut out = io::stdout().lock();
                body(&mut out).and_then(|_| out.flush()).map_err(wrap)
            }
            Destination::File(p) => {
                let mut out = BufWriter::new(File::create(p).map_err(wrap)?);
                body(&mut out).and_then(|_| out.flush()).map_err(wrap)
            }
        }
    }
}

/// Writes the CSV table (LF line endings) to any writer.
pub fn write_csv<W: Write>(rows: &[ScanRow], out: W) -> io::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in rows {
        w.write_record(row.csv_fields())?;
    }
    w.flush()
}

pub fn write_json<W: Write>(rows: &[ScanRow], mut out: W) -> io::Result<()> {
    let records: Vec<ScanRecord> = rows.iter().map(ScanRow::to_record).collect();
    serde_json::to_writer_pretty(&mut out, &records)?;
    out.write_all(b"\n")
}

pub fn emit_csv(rows: &[ScanRow], dest: &Destination) -> Result<(), ScanError> {
    if rows.is_empty() {
        return Err(ScanError::Empty);
    }
    dest.write_with(|w| write_csv(rows, w))
}

pub fn emit_json(rows: &[ScanRow], dest: &Destination) -> Result<(), ScanError> {
    if rows.is_empty() {
        return Err(ScanError::Empty);
    }
    dest.write_with(|w| write_json(rows, w))
}

/// Reads a table produced by [`write_csv`]. Orbit pairs are not stored in
/// the file and are recomputed from the roots.
pub fn parse_csv<R: Read>(input: R) -> Result<Vec<ScanRow>, ScanError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let bad = |line: usize, message: String| ScanError::Parse { line, message };
    let header = reader.headers().map_err(|e| bad(1, e.to_string()))?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(bad(
            1,
            format!("unexpected header {:?}", header.iter().collect::<Vec<_>>()),
        ));
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| bad(line, e.to_string()))?;
        rows.push(parse_record(&record).map_err(|m| bad(line, m))?);
    }
    Ok(rows)
}

fn parse_record(record: &csv::StringRecord) -> Result<ScanRow, String> {
    let field = |i: usize| record.get(i).ok_or_else(|| format!("missing field {}", CSV_HEADER[i]));
    let num = |i: usize| -> Result<f64, String> {
        let s = field(i)?;
        s.parse().map_err(|_| format!("{}: not a number: {s:?}", CSV_HEADER[i]))
    };
    let k: u32 = field(0)?.parse().map_err(|_| "k: not an integer".to_string())?;
    let theta = num(1)?;
    let theta_cr = num(2)?;
    let count: usize = field(3)?.parse().map_err(|_| "count: not an integer".to_string())?;

    let mut roots = Vec::new();
    for i in 4..7 {
        if !field(i)?.is_empty() {
            roots.push(num(i)?);
        }
    }
    let mut flags = ScanFlags::default();
    let mut rest = field(7)?;
    while !rest.is_empty() {
        if let Some(msg) = rest.strip_prefix("error=") {
            flags.error = Some(msg.to_string());
            break;
        }
        let (token, tail) = rest.split_once(';').unwrap_or((rest, ""));
        rest = tail;
        match token {
            "near_degenerate" => flags.near_degenerate = true,
            "domain_edge" => flags.domain_edge = true,
            "unpaired" => flags.unpaired = true,
            t => match t.strip_prefix("overflow=") {
                Some(xs) => {
                    for x in xs.split('|') {
                        roots.push(x.parse().map_err(|_| format!("overflow: not a number: {x:?}"))?);
                    }
                }
                None => return Err(format!("unknown flag {t:?}")),
            },
        }
    }
    if count != roots.len() {
        return Err(format!("count {count} but {} roots", roots.len()));
    }
    let pairs = if flags.error.is_some() || roots.is_empty() {
        Vec::new()
    } else {
        let map = ScalarMap::new(theta, k).map_err(|e| e.to_string())?;
        orbit_pairs(&map, &roots).map_err(|e| e.to_string())?.0
    };
    Ok(ScanRow {
        k,
        theta,
        theta_cr,
        count,
        roots,
        pairs,
        flags,
    })
}
