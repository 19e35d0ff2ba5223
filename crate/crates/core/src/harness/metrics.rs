//! Training metrics as a flat CSV, one row per epoch.

use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::rl::EpochMetrics;

pub const CSV_HEADER: &str = "epoch,global_steps,mean_score,win_rate,mean_loss,epsilon";

pub struct CsvWriter {
    out: BufWriter<File>,
}

impl CsvWriter {
    /// Create or truncate, writing the header.
    pub fn create(path: &Path) -> Result<CsvWriter> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = CsvWriter { out: BufWriter::new(file) };
        writeln!(w.out, "{CSV_HEADER}").map_err(|e| Error::io(path, e))?;
        w.out.flush().map_err(|e| Error::io(path, e))?;
        Ok(w)
    }

    /// Open for appending; the header is only written to an empty file,
    /// so resumed runs keep one header.
    pub fn append(path: &Path) -> Result<CsvWriter> {
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| Error::io(path, e))?;
        let fresh = file.metadata().map_err(|e| Error::io(path, e))?.len() == 0;
        let mut w = CsvWriter { out: BufWriter::new(file) };
        if fresh {
            writeln!(w.out, "{CSV_HEADER}").map_err(|e| Error::io(path, e))?;
            w.out.flush().map_err(|e| Error::io(path, e))?;
        }
        Ok(w)
    }

    /// Floats use the shortest representation that round-trips, so a file
    /// diff detects any numeric drift between runs.
    pub fn write_row(&mut self, m: &EpochMetrics) -> Result<()> {
        let win = m.win_rate.map(|w| w.to_string()).unwrap_or_default();
        writeln!(
            self.out,
            "{},{},{},{},{},{}",
            m.epoch, m.global_steps, m.mean_score, win, m.mean_loss, m.epsilon
        )
        .and_then(|_| self.out.flush())
        .map_err(|e| Error::Io { path: "metrics stream".into(), source: e })
    }
}

pub fn format_row_for_stdout(m: &EpochMetrics) -> String {
    match m.win_rate {
        Some(w) => format!(
            "epoch {:>4}  steps {:>9}  score {:>8.3}  win_rate {:.3}  loss {:.6}  eps {:.3}",
            m.epoch, m.global_steps, m.mean_score, w, m.mean_loss, m.epsilon
        ),
        None => format!(
            "epoch {:>4}  steps {:>9}  score {:>8.3}  loss {:.6}  eps {:.3}",
            m.epoch, m.global_steps, m.mean_score, m.mean_loss, m.epsilon
        ),
    }
}
