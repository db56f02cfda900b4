//! CSV artifacts: a `#` comment block echoing the config, then a header row.

use super::config::ExperimentConfig;
use crate::error::Result;
use std::io::Write;
use std::path::{Path, PathBuf};

/// dB value with four decimals; infinities are written as `-inf` / `inf`.
pub fn fmt_db(v: f64) -> String {
    if v.is_infinite() {
        if v < 0.0 { "-inf".into() } else { "inf".into() }
    } else {
        format!("{v:.4}")
    }
}

/// Plain numeric value (coordinates, probabilities, frequencies).
pub fn fmt_num(v: f64) -> String {
    format!("{v}")
}

/// `<out_dir>/<experiment>_<tag>.csv`
pub fn output_path(config: &ExperimentConfig, tag: &str) -> PathBuf {
    config
        .out_dir
        .join(format!("{}_{tag}.csv", config.experiment.as_str()))
}

/// Serializes the table to bytes: comment block, header, rows.
pub fn render_csv(config: &ExperimentConfig, header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    let echo = serde_json::to_string_pretty(config)?;
    for line in echo.lines() {
        write!(buf, "# {line}\r\n")?;
    }
    {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(&mut buf);
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
    }
    Ok(buf)
}

pub fn write_csv(path: &Path, config: &ExperimentConfig, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    std::fs::write(path, render_csv(config, header, rows)?)?;
    Ok(())
}
