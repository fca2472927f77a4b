use std::io::Write;
use std::path::PathBuf;

use clap::ValueEnum;
use serde::Serialize;

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// One pretty-printed JSON document.
    Json,
    /// One compact JSON record per line.
    Jsonl,
}

/// Everything besides the inputs that determines a command's output.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub tol: f64,
    /// Largest number of qubits the exact simulator may allocate.
    pub cap: usize,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl RunConfig {
    pub fn rng(&self) -> qwires_core::random::Rng64 {
        qwires_core::random::seeded(self.seed)
    }
}

/// Output accumulated by a command before it is written out.
#[derive(Default)]
pub struct Output {
    buf: String,
}

impl Output {
    pub fn document<T: Serialize>(&mut self, value: &T) -> Result<(), CliError> {
        let text =
            serde_json::to_string_pretty(value).map_err(|e| CliError::Failed(e.to_string()))?;
        self.buf.push_str(&text);
        self.buf.push('\n');
        Ok(())
    }

    pub fn record<T: Serialize>(&mut self, value: &T) -> Result<(), CliError> {
        let text = serde_json::to_string(value).map_err(|e| CliError::Failed(e.to_string()))?;
        self.buf.push_str(&text);
        self.buf.push('\n');
        Ok(())
    }

    /// A table as one document or as one record per row.
    pub fn table<H: Serialize, R: Serialize>(
        &mut self,
        format: Format,
        header: &H,
        rows: &[R],
    ) -> Result<(), CliError> {
        match format {
            Format::Json => {
                #[derive(Serialize)]
                struct Doc<'a, H, R> {
                    #[serde(flatten)]
                    header: &'a H,
                    rows: &'a [R],
                }
                self.document(&Doc { header, rows })
            }
            Format::Jsonl => {
                for r in rows {
                    self.record(r)?;
                }
                self.record(header)
            }
        }
    }

    pub fn write(self, cfg: &RunConfig) -> Result<(), CliError> {
        match &cfg.out {
            Some(path) => std::fs::write(path, self.buf)?,
            None => std::io::stdout().lock().write_all(self.buf.as_bytes())?,
        }
        Ok(())
    }
}
