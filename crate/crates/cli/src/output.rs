//! Streaming record writers.
//!
//! CSV columns are fixed (time, norm, mean_x, mean_p, delta_x, delta_p,
//! uncertainty_product, analytic_reference, relative_error, mean_H) and
//! floating-point values carry 17 significant digits so files round-trip
//! doubles exactly. Identical runs produce byte-identical files: nothing
//! time- or host-dependent is ever written.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use cn_tdse::ObservableRecord;

use crate::config::OutputFormat;

pub const CSV_HEADER: &str = "time,norm,mean_x,mean_p,delta_x,delta_p,uncertainty_product,analytic_reference,relative_error,mean_H";

/// 17 significant digits: enough to reconstruct the exact f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

pub struct RecordWriter {
    sink: Box<dyn Write>,
    format: OutputFormat,
    wrote_header: bool,
}

impl RecordWriter {
    pub fn to_path(path: &Path, format: OutputFormat) -> io::Result<Self> {
        let file = File::create(path)?;
        Ok(Self::new(Box::new(BufWriter::new(file)), format))
    }

    pub fn to_stdout(format: OutputFormat) -> Self {
        Self::new(Box::new(io::stdout()), format)
    }

    pub fn new(sink: Box<dyn Write>, format: OutputFormat) -> Self {
        Self {
            sink,
            format,
            wrote_header: false,
        }
    }

    pub fn write_record(&mut self, record: &ObservableRecord) -> io::Result<()> {
        match self.format {
            OutputFormat::Csv => {
                if !self.wrote_header {
                    writeln!(self.sink, "{CSV_HEADER}")?;
                    self.wrote_header = true;
                }
                writeln!(
                    self.sink,
                    "{},{},{},{},{},{},{},{},{},{}",
                    fmt_f64(record.time),
                    fmt_f64(record.norm),
                    fmt_f64(record.mean_x),
                    fmt_f64(record.mean_p),
                    fmt_f64(record.delta_x),
                    fmt_f64(record.delta_p),
                    fmt_f64(record.uncertainty_product),
                    fmt_opt(record.analytic_reference),
                    fmt_opt(record.relative_error),
                    fmt_f64(record.mean_energy),
                )
            }
            OutputFormat::JsonLines => {
                let line = serde_json::to_string(record).map_err(io::Error::other)?;
                writeln!(self.sink, "{line}")
            }
        }
    }

    pub fn finish(&mut self) -> io::Result<()> {
        self.sink.flush()
    }
}

/// Generic table writer for the compare and converge outputs: one header,
/// rows of 17-digit floats, optional cells left empty.
pub struct TableWriter {
    sink: Box<dyn Write>,
    format: OutputFormat,
    columns: Vec<&'static str>,
    wrote_header: bool,
}

impl TableWriter {
    pub fn create(
        out: Option<&Path>,
        format: OutputFormat,
        columns: Vec<&'static str>,
    ) -> io::Result<Self> {
        let sink: Box<dyn Write> = match out {
            Some(path) => Box::new(BufWriter::new(File::create(path)?)),
            None => Box::new(io::stdout()),
        };
        Ok(Self {
            sink,
            format,
            columns,
            wrote_header: false,
        })
    }

    pub fn write_row(&mut self, cells: &[Option<f64>]) -> io::Result<()> {
        debug_assert_eq!(cells.len(), self.columns.len());
        match self.format {
            OutputFormat::Csv => {
                if !self.wrote_header {
                    writeln!(self.sink, "{}", self.columns.join(","))?;
                    self.wrote_header = true;
                }
                let row: Vec<String> = cells.iter().map(|c| fmt_opt(*c)).collect();
                writeln!(self.sink, "{}", row.join(","))
            }
            OutputFormat::JsonLines => {
                let obj: serde_json::Map<String, serde_json::Value> = self
                    .columns
                    .iter()
                    .zip(cells)
                    .map(|(name, cell)| {
                        let value = match cell {
                            Some(v) => serde_json::json!(v),
                            None => serde_json::Value::Null,
                        };
                        (name.to_string(), value)
                    })
                    .collect();
                writeln!(self.sink, "{}", serde_json::Value::Object(obj))
            }
        }
    }

    pub fn finish(&mut self) -> io::Result<()> {
        self.sink.flush()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digit_round_trip() {
        for &x in &[0.05, 1.0 / 3.0, 0.5 * 2.0f64.sqrt(), 1e-300, -123.456e17] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
    }

    fn written_by(record: &ObservableRecord, format: OutputFormat) -> String {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out");
        let mut w = RecordWriter::to_path(&path, format).unwrap();
        w.write_record(record).unwrap();
        w.finish().unwrap();
        std::fs::read_to_string(&path).unwrap()
    }

    #[test]
    fn csv_rows_have_fixed_shape() {
        let record = ObservableRecord {
            time: 0.0,
            norm: 1.0,
            mean_x: -50.0,
            mean_x2: 2504.0,
            mean_p: 1.0,
            mean_p2: 1.0625,
            mean_potential: 0.0,
            mean_energy: 0.53125,
            delta_x: 2.0,
            delta_p: 0.25,
            uncertainty_product: 0.5,
            analytic_reference: None,
            relative_error: None,
        };
        let text = written_by(&record, OutputFormat::Csv);
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        let row = lines.next().unwrap();
        assert_eq!(row.split(',').count(), 10);
        // Optional columns are empty, not NaN.
        assert!(row.contains(",,"));
    }

    #[test]
    fn jsonl_rows_parse_back() {
        let record = ObservableRecord {
            time: 1.5,
            norm: 1.0,
            mean_x: 0.0,
            mean_x2: 4.0,
            mean_p: 0.0,
            mean_p2: 0.0625,
            mean_potential: 0.1,
            mean_energy: 0.13125,
            delta_x: 2.0,
            delta_p: 0.25,
            uncertainty_product: 0.5,
            analytic_reference: Some(0.5),
            relative_error: Some(0.0),
        };
        let text = written_by(&record, OutputFormat::JsonLines);
        let value: serde_json::Value = serde_json::from_str(text.trim()).unwrap();
        assert_eq!(value["time"], 1.5);
        assert_eq!(value["analytic_reference"], 0.5);
    }
}
