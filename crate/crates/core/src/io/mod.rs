//! Text formats: configuration files, sweep tables, mode files and SVG
//! plots.

mod config;
mod modefile;
mod svg;
mod table;

pub use config::{parse_config, parse_config_with_overrides, parse_range, OutputConfig, RunConfig};
pub use modefile::{parse_mode_file, read_mode_file, render_mode_file, write_mode_file, ModeFile, MODE_FILE_MAGIC};
pub use svg::{emit_svg, render_svg, PlotSpec};
pub use table::{parse_sweep_csv, read_sweep_csv, render_sweep_csv, write_sweep_csv, CsvOptions};

use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid value for {field}: {message}")]
    Validation { field: String, message: String },
    #[error("unknown key {key}{}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    UnknownKey { key: String, line: Option<usize> },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}:{line}: {message}", path.display())]
    Format { path: PathBuf, line: usize, message: String },
    #[error("missing field {0}")]
    MissingField(String),
    #[error("nothing to write: {0}")]
    Empty(String),
}

impl IoError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        IoError::Io { path: path.to_path_buf(), source }
    }

    /// True for malformed or invalid configuration, as opposed to file
    /// system trouble.
    pub fn is_config_error(&self) -> bool {
        matches!(self, IoError::Parse { .. } | IoError::Validation { .. } | IoError::UnknownKey { .. })
    }
}

/// Shortest decimal text that parses back to the same `f64`, with `inf`,
/// `-inf` and `nan` spelled out.
pub fn format_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else if x == 0.0 || (1e-5..1e16).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_text_round_trips() {
        for x in [0.0, -0.0, 1.0, 0.1, 1.0 / 3.0, 1e-300, 6.02e23, -2.5e-7, f64::MAX, f64::MIN_POSITIVE] {
            let s = format_f64(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(format_f64(f64::INFINITY), "inf");
        assert_eq!(format_f64(f64::NAN), "nan");
        assert_eq!(format_f64(0.5), "0.5");
        assert_eq!(format_f64(1e-12), "1e-12");
    }
}
