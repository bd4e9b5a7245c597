//! CSV frames and JSON summaries with a fixed, byte-reproducible layout.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use tunnel_core::units::ComplexField;
use tunnel_core::{Complex64, VERSION};

use crate::CliError;

pub const CSV_HEADER: &str = "x,t,re_psi,im_psi,abs2,region,source";

/// One CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameRecord {
    pub x: f64,
    pub t: f64,
    pub psi: Complex64,
    pub region: &'static str,
    pub source: String,
}

impl FrameRecord {
    pub fn abs2(&self) -> f64 {
        self.psi.norm_sqr()
    }
}

/// Rows of `field`, with `ψ` multiplied by `scale`.
pub fn records(field: &ComplexField, source: &str, scale: f64) -> Vec<FrameRecord> {
    field
        .iter()
        .map(|(x, psi, region)| FrameRecord {
            x,
            t: field.time(),
            psi: psi * scale,
            region: region.as_str(),
            source: source.to_string(),
        })
        .collect()
}

pub fn render_csv(echo: &str, rows: &[FrameRecord]) -> String {
    let mut out = String::with_capacity(96 * (rows.len() + 3));
    let _ = writeln!(out, "# tunnel {VERSION}");
    let _ = writeln!(out, "# config {echo}");
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{}",
            r.x,
            r.t,
            r.psi.re,
            r.psi.im,
            r.abs2(),
            r.region,
            r.source
        );
    }
    out
}

/// Wraps `body` with the version and the parsed config echo.
pub fn render_json<T: Serialize>(echo: &str, body: &T) -> Result<String, CliError> {
    let config: Value = serde_json::from_str(echo).map_err(|e| CliError::Config(e.to_string()))?;
    let body = serde_json::to_value(body).map_err(|e| CliError::Config(e.to_string()))?;
    let doc = serde_json::json!({"version": VERSION, "config": config, "result": body});
    let mut text = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Config(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io)?;
    }
    fs::write(path, contents).map_err(io)
}

/// `<prefix><suffix>`.
pub fn with_suffix(prefix: &str, suffix: &str) -> PathBuf {
    PathBuf::from(format!("{prefix}{suffix}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let rows = [FrameRecord {
            x: 0.5,
            t: 2.2,
            psi: Complex64::new(3.0, -4.0),
            region: "right",
            source: "oracle".into(),
        }];
        let text = render_csv("{}", &rows);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], format!("# tunnel {VERSION}"));
        assert_eq!(lines[2], CSV_HEADER);
        assert_eq!(
            lines[3],
            "5.0000000000000000e-1,2.2000000000000002e0,3.0000000000000000e0,-4.0000000000000000e0,2.5000000000000000e1,right,oracle"
        );
        assert!(!text.contains('\r'));
    }

    #[test]
    fn abs2_matches_components() {
        let r = FrameRecord {
            x: 0.0,
            t: 0.0,
            psi: Complex64::new(0.1, 0.2),
            region: "left",
            source: String::new(),
        };
        assert!((r.abs2() - (0.01 + 0.04)).abs() <= 1e-15);
    }
}
