//! Report output: CSV behind a `# config:` line, or JSON `{"config", "data"}`.

use std::io::Write;

use serde_json::Value;

use super::config::{Format, RunConfig, CONFIG_PREFIX};
use crate::error::{Error, Result};

/// One report in both shapes; the config picks which one is written.
pub struct Report {
    pub csv: String,
    pub json: Value,
}

impl Report {
    pub fn render(&self, cfg: &RunConfig) -> String {
        match cfg.format {
            Format::Csv => format!("{CONFIG_PREFIX}{}\n{}", cfg.header_json(), self.csv),
            Format::Json => {
                let doc = serde_json::json!({ "config": cfg, "data": self.json });
                let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
                s.push('\n');
                s
            }
        }
    }

    /// Write to the configured output path, or to stdout when there is none.
    pub fn emit(&self, cfg: &RunConfig) -> Result<()> {
        let text = self.render(cfg);
        match &cfg.output {
            Some(p) => std::fs::write(p, text)
                .map_err(|e| Error::Parse(format!("cannot write {}: {e}", p.display()))),
            None => {
                let mut out = std::io::stdout().lock();
                // a closed pipe is not an error worth reporting
                let _ = out.write_all(text.as_bytes()).and_then(|_| out.flush());
                Ok(())
            }
        }
    }
}

/// CSV text from a header and rows of already formatted fields.
pub fn csv_table(header: &str, rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = format!("{header}\n");
    for r in rows {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    out
}
