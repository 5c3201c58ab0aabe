//! Output documents: a `#`-prefixed header block followed by CSV or report text.

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::error::CliError;

pub const OUT_DIR_VAR: &str = "EAQC_OUT_DIR";

pub struct Header {
    lines: Vec<String>,
    started: Option<(SystemTime, Instant)>,
}

impl Header {
    pub fn new<C: Serialize>(command: &str, config: &C, seed: u64, clock: bool) -> Result<Self, CliError> {
        let config = serde_json::to_string(config).map_err(|e| CliError::Config(e.to_string()))?;
        Ok(Self {
            lines: vec![
                format!("eaqc {}", env!("CARGO_PKG_VERSION")),
                format!("command: {command}"),
                format!("config: {config}"),
                format!("seed: {seed}"),
            ],
            started: clock.then(|| (SystemTime::now(), Instant::now())),
        })
    }

    pub fn push(&mut self, line: impl Into<String>) {
        self.lines.push(line.into());
    }

    fn render(&self) -> String {
        let mut out = String::new();
        for l in &self.lines {
            out.push_str("# ");
            out.push_str(l);
            out.push('\n');
        }
        if let Some((wall, start)) = self.started {
            let unix = wall.duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0);
            out.push_str(&format!("# started_unix: {unix:.3}\n"));
            out.push_str(&format!("# elapsed_s: {:.3}\n", start.elapsed().as_secs_f64()));
        }
        out
    }
}

/// Rows of one CSV table.
pub struct Table {
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(columns: &[S]) -> Result<Self, CliError> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(columns.iter().map(|c| c.as_ref()))?;
        Ok(Self { writer })
    }

    pub fn row<S: AsRef<str>>(&mut self, fields: &[S]) -> Result<(), CliError> {
        self.writer.write_record(fields.iter().map(|c| c.as_ref()))?;
        Ok(())
    }

    pub fn into_string(self) -> Result<String, CliError> {
        let bytes = self.writer.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
    }
}

/// Shortest round-trip form; exponent notation outside `[1e-4, 1e15)`.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Main output destination: `--out`, else `$EAQC_OUT_DIR/<command>.<ext>`, else stdout.
pub fn destination(out: Option<&Path>, command: &str, ext: &str) -> Option<PathBuf> {
    if let Some(p) = out {
        return Some(p.to_path_buf());
    }
    std::env::var_os(OUT_DIR_VAR)
        .filter(|d| !d.is_empty())
        .map(|d| PathBuf::from(d).join(format!("{command}.{ext}")))
}

pub fn emit(dest: Option<&Path>, header: Option<&Header>, body: &str) -> Result<(), CliError> {
    let mut text = header.map(Header::render).unwrap_or_default();
    text.push_str(body);
    match dest {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Io(e.to_string()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_without_clock_is_stable() {
        let h = Header::new("spectrum", &serde_json::json!({"N": 3}), 7, false).unwrap();
        assert_eq!(
            h.render(),
            format!("# eaqc {}\n# command: spectrum\n# config: {{\"N\":3}}\n# seed: 7\n", env!("CARGO_PKG_VERSION"))
        );
        let timed = Header::new("spectrum", &serde_json::json!({}), 7, true).unwrap();
        assert!(timed.render().contains("# elapsed_s: "));
    }

    #[test]
    fn table_rows() {
        let mut t = Table::new(&["a", "b"]).unwrap();
        t.row(&[num(0.1), num(2.0)]).unwrap();
        assert_eq!(t.into_string().unwrap(), "a,b\n0.1,2\n");
    }

    #[test]
    fn number_forms_round_trip() {
        assert_eq!(num(4.440892098500626e-15), "4.440892098500626e-15");
        assert_eq!(num(-0.25), "-0.25");
        assert_eq!(num(0.0), "0");
        for x in [1e-300, 3.0e-5, 0.1 + 0.2, 1e20, -7.5] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
    }
}
