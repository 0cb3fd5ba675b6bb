use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;

use crate::bench::spec::ExperimentSpec;
use crate::error::{Error, Result};

/// CSV columns, in output order.
pub const COLUMNS: [&str; 19] = [
    "mode",
    "n",
    "d",
    "c",
    "epsilon",
    "delta",
    "m",
    "t",
    "s",
    "rounds",
    "seed",
    "gen",
    "mse_mean",
    "mse_stderr",
    "bits_per_client",
    "log2_modulus",
    "achieved_epsilon_cdp",
    "eps_dp_at_delta",
    "wall_time_ms",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub spec: ExperimentSpec,
    /// Dimension actually transmitted (before power-of-two padding).
    pub m_used: usize,
    pub mse_mean: f64,
    pub mse_stderr: f64,
    pub bits_per_client: u64,
    pub log2_modulus: u32,
    /// `None` for the non-private baseline.
    pub achieved_epsilon_cdp: Option<f64>,
    pub eps_dp_at_delta: Option<f64>,
    pub wall_time_ms: u64,
    /// Not written to CSV.
    pub warnings: Vec<String>,
}

impl ResultRow {
    pub fn record(&self) -> Vec<String> {
        let s = &self.spec;
        let opt = |v: Option<f64>| v.map(fmt_float).unwrap_or_default();
        vec![
            s.mode.to_string(),
            s.n.to_string(),
            s.d.to_string(),
            fmt_float(s.c),
            fmt_float(s.epsilon),
            fmt_float(s.delta),
            self.m_used.to_string(),
            s.t.to_string(),
            s.s.map(|v| v.to_string()).unwrap_or_default(),
            s.rounds.to_string(),
            s.seed.to_string(),
            s.gen.to_string(),
            fmt_float(self.mse_mean),
            fmt_float(self.mse_stderr),
            self.bits_per_client.to_string(),
            self.log2_modulus.to_string(),
            opt(self.achieved_epsilon_cdp),
            opt(self.eps_dp_at_delta),
            self.wall_time_ms.to_string(),
        ]
    }
}

/// Nine significant digits, shortest form; exponent notation outside
/// `[1e-4, 1e15)`.
pub fn fmt_float(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let rounded: f64 = format!("{v:.8e}").parse().expect("formatted float parses");
    if (1e-4..1e15).contains(&rounded.abs()) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

/// Header plus rows as one CSV document.
pub fn to_csv(rows: &[ResultRow], header: bool) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    let err = |e: csv::Error| Error::Io(e.to_string());
    if header {
        w.write_record(COLUMNS).map_err(err)?;
    }
    for row in rows {
        w.write_record(row.record()).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Appends rows to `path`, writing the header only when the file is new or
/// empty.
pub fn append_csv(path: &Path, rows: &[ResultRow]) -> Result<()> {
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let empty = file.metadata()?.len() == 0;
    file.write_all(to_csv(rows, empty)?.as_bytes())?;
    Ok(())
}
