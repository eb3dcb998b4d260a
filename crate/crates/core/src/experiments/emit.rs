use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{ModeStats, Strategy, SweepAxis, SweepTable, TrialResult};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Dat,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "dat" => Ok(OutputFormat::Dat),
            _ => Err(Error::InvalidConfig(format!(
                "unknown output format {s:?} (expected csv or dat)"
            ))),
        }
    }
}

/// Nine significant digits.
fn num(x: f64) -> String {
    format!("{x:.8e}")
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::io(path, source),
        other => Error::io(path, std::io::Error::other(format!("{other:?}"))),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn header(table: &SweepTable) -> Vec<String> {
    let mut h = vec![table.axis.as_str().to_string(), "trials".to_string()];
    for m in &table.modes {
        for field in ["mean", "stderr", "completed", "failed"] {
            h.push(format!("{m}_{field}"));
        }
    }
    h
}

fn write_csv_to<W: Write>(table: &SweepTable, out: W) -> std::result::Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header(table))?;
    for (x, row) in table.grid.iter().zip(&table.stats) {
        let mut rec = vec![num(*x), table.trials.to_string()];
        for s in row {
            rec.extend([
                num(s.mean),
                num(s.std_err),
                s.completed.to_string(),
                s.failed.to_string(),
            ]);
        }
        w.write_record(rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Path of the `.dat` file holding `mode`'s column for output path `out`.
pub fn dat_path(out: &Path, mode: Strategy) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    out.with_file_name(format!("{stem}_{mode}.dat"))
}

/// Write `table` to `out`. CSV goes to `out` itself; `.dat` writes one
/// two-column file per mode next to it (see [`dat_path`]). Returns the paths
/// written.
pub fn emit(table: &SweepTable, format: OutputFormat, out: &Path) -> Result<Vec<PathBuf>> {
    if table.grid.is_empty() || table.stats.is_empty() {
        return Err(Error::EmptyInput("sweep table"));
    }
    match format {
        OutputFormat::Csv => {
            let f = create(out)?;
            write_csv_to(table, f).map_err(|e| csv_err(out, e))?;
            Ok(vec![out.to_path_buf()])
        }
        OutputFormat::Dat => {
            let mut written = Vec::new();
            for (j, &mode) in table.modes.iter().enumerate() {
                let path = dat_path(out, mode);
                let mut f = create(&path)?;
                for (x, row) in table.grid.iter().zip(&table.stats) {
                    writeln!(f, "{} {}", num(*x), num(row[j].mean)).map_err(|e| Error::io(&path, e))?;
                }
                f.flush().map_err(|e| Error::io(&path, e))?;
                written.push(path);
            }
            Ok(written)
        }
    }
}

fn bad(msg: impl Into<String>) -> Error {
    Error::InvalidConfig(format!("malformed sweep CSV: {}", msg.into()))
}

/// Parse CSV produced by [`emit`].
pub fn parse_csv(text: &str) -> Result<SweepTable> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let head = r.headers().map_err(|e| bad(e.to_string()))?.clone();
    let axis: SweepAxis = head.get(0).ok_or_else(|| bad("missing header"))?.parse()?;
    if head.len() < 2 || (head.len() - 2) % 4 != 0 {
        return Err(bad("unexpected column count"));
    }
    let modes = (2..head.len())
        .step_by(4)
        .map(|i| {
            head[i]
                .strip_suffix("_mean")
                .ok_or_else(|| bad(format!("column {:?}", &head[i])))?
                .parse()
        })
        .collect::<Result<Vec<Strategy>>>()?;
    let mut grid = Vec::new();
    let mut stats = Vec::new();
    let mut trials = 0;
    for rec in r.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let f = |i: usize| rec[i].parse::<f64>().map_err(|e| bad(e.to_string()));
        let u = |i: usize| rec[i].parse::<usize>().map_err(|e| bad(e.to_string()));
        grid.push(f(0)?);
        trials = u(1)? as u64;
        stats.push(
            (0..modes.len())
                .map(|j| {
                    let c = 2 + 4 * j;
                    Ok(ModeStats {
                        mean: f(c)?,
                        std_err: f(c + 1)?,
                        completed: u(c + 2)?,
                        failed: u(c + 3)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?,
        );
    }
    Ok(SweepTable {
        axis,
        grid,
        modes,
        trials,
        stats,
    })
}

/// One row per trial result: identifiers, rates and slot usage summaries.
pub fn write_trials_csv<W: Write>(results: &[TrialResult], out: W) -> std::io::Result<()> {
    let users = results.iter().map(|r| r.rates.len()).max().unwrap_or(0);
    let mut w = csv::Writer::from_writer(out);
    let mut head: Vec<String> = ["trial", "mode", "min_rate"].map(String::from).to_vec();
    head.extend((1..=users).map(|m| format!("rate_{m}")));
    head.extend(
        [
            "downlink_used",
            "downlink_mean_active",
            "uplink_mean_active",
            "iterations",
            "upper_bound",
            "failed",
        ]
        .map(String::from),
    );
    let io_err = |e: csv::Error| std::io::Error::other(e);
    w.write_record(&head).map_err(io_err)?;
    let mean = |v: &[usize]| {
        if v.is_empty() {
            0.0
        } else {
            v.iter().sum::<usize>() as f64 / v.len() as f64
        }
    };
    for r in results {
        let mut rec = vec![r.trial.to_string(), r.mode.to_string(), num(r.min_rate)];
        rec.extend((0..users).map(|m| r.rates.get(m).map_or_else(String::new, |&x| num(x))));
        rec.push(r.downlink_counts.len().to_string());
        rec.push(num(mean(&r.downlink_counts)));
        rec.push(num(mean(&r.uplink_counts)));
        rec.push(r.stats.iterations.to_string());
        rec.push(r.stats.upper_bound.map_or_else(String::new, num));
        rec.push(u8::from(r.failed()).to_string());
        w.write_record(&rec).map_err(io_err)?;
    }
    w.flush()
}
