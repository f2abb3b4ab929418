use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use ahlink_core::{Error, Result};
use clap::ValueEnum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Rows of numbers under named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
    /// Draw the y axis on a log scale in the plot stub.
    pub log_y: bool,
    /// Plot column 2 with column 4 as its error bar instead of every column.
    pub error_bars: bool,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Table {
            columns,
            rows: Vec::new(),
            log_y: false,
            error_bars: false,
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write<W: Write>(&self, out: W, format: Format) -> Result<()> {
        match format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(out);
                w.write_record(&self.columns)?;
                for r in &self.rows {
                    w.write_record(r.iter().map(|v| v.to_string()))?;
                }
                w.flush()?;
            }
            Format::Json => {
                let rows: Vec<serde_json::Map<String, serde_json::Value>> = self
                    .rows
                    .iter()
                    .map(|r| {
                        self.columns
                            .iter()
                            .zip(r)
                            .map(|(c, v)| (c.to_string(), json_number(*v)))
                            .collect()
                    })
                    .collect();
                let mut out = out;
                serde_json::to_writer_pretty(&mut out, &rows)
                    .map_err(|e| Error::Io(e.to_string()))?;
                writeln!(out)?;
            }
        }
        Ok(())
    }

    /// Gnuplot script plotting every column against the first.
    pub fn gnuplot_stub(&self, data: &Path) -> String {
        let mut s = String::new();
        s.push_str("set datafile separator ','\n");
        s.push_str("set key autotitle columnhead\n");
        s.push_str("set grid\n");
        s.push_str(&format!("set xlabel '{}'\n", self.columns[0]));
        if self.log_y {
            s.push_str("set logscale y\nset format y '10^{%L}'\n");
        }
        if self.error_bars {
            s.push_str(&format!(
                "plot '{}' using 1:2:4 with yerrorlines\n",
                data.display()
            ));
        } else {
            s.push_str(&format!(
                "plot for [i=2:{}] '{}' using 1:i with linespoints\n",
                self.columns.len(),
                data.display()
            ));
        }
        s
    }
}

fn json_number(v: f64) -> serde_json::Value {
    serde_json::Number::from_f64(v)
        .map(serde_json::Value::Number)
        .unwrap_or(serde_json::Value::Null)
}

/// Where rows go: a file, standard output (`-`) or nowhere.
pub struct Sink {
    pub path: Option<PathBuf>,
    pub format: Format,
    pub gnuplot: bool,
}

impl Sink {
    pub fn check(&self) -> Result<()> {
        if self.gnuplot && (self.format != Format::Csv || self.file().is_none()) {
            return Err(Error::Config(
                "--gnuplot-stub needs --format csv and an output file".to_string(),
            ));
        }
        if let Some(p) = self.file() {
            let parent = p.parent().filter(|d| !d.as_os_str().is_empty());
            if let Some(dir) = parent {
                if !dir.is_dir() {
                    return Err(Error::Io(format!(
                        "output directory {} does not exist",
                        dir.display()
                    )));
                }
            }
        }
        Ok(())
    }

    fn file(&self) -> Option<&Path> {
        self.path.as_deref().filter(|p| p.as_os_str() != "-")
    }

    pub fn emit(&self, table: &Table) -> Result<()> {
        match (&self.path, self.file()) {
            (None, _) => Ok(()),
            (Some(_), None) => table.write(io::stdout().lock(), self.format),
            (Some(_), Some(path)) => {
                let f = File::create(path)
                    .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
                table.write(io::BufWriter::new(f), self.format)?;
                if self.gnuplot {
                    let script = path.with_extension("gp");
                    std::fs::write(&script, table.gnuplot_stub(path))
                        .map_err(|e| Error::Io(format!("{}: {e}", script.display())))?;
                }
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_and_json() {
        let mut t = Table::new(vec!["d", "v"]);
        t.push(vec![1.0, 0.5]);
        t.push(vec![2.0, f64::NAN]);
        let mut buf = Vec::new();
        t.write(&mut buf, Format::Csv).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "d,v\n1,0.5\n2,NaN\n");
        let mut buf = Vec::new();
        t.write(&mut buf, Format::Json).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v[0]["v"], 0.5);
        assert!(v[1]["v"].is_null());
    }

    #[test]
    fn plot_stub_names_the_data() {
        let mut t = Table::new(vec!["distance_m", "ber"]);
        t.log_y = true;
        let s = t.gnuplot_stub(Path::new("out/ber.csv"));
        assert!(s.contains("'out/ber.csv'"));
        assert!(s.contains("logscale y"));
        assert!(s.contains("i=2:2"));
    }

    #[test]
    fn error_bar_stub_uses_ci_column() {
        let mut t = Table::new(vec!["distance_m", "ber", "bits", "ci95"]);
        t.error_bars = true;
        let s = t.gnuplot_stub(Path::new("ber.csv"));
        assert!(s.contains("using 1:2:4 with yerrorlines"));
        assert!(!s.contains("for [i="));
    }
}
