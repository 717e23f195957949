use std::path::PathBuf;

/// Errors produced by the QGL toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {value} ({reason})")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Two inputs that must share a shape do not.
    #[error("dimension mismatch: {left_width}x{left_height} vs {right_width}x{right_height}")]
    DimensionMismatch {
        left_width: usize,
        left_height: usize,
        right_width: usize,
        right_height: usize,
    },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// The normalization denominator vanished (only possible with `c0 = 0`).
    #[error("divisive normalization denominator is zero at ({x}, {y}); use c0 > 0")]
    DivisionDegeneracy { x: usize, y: usize },

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(&'static str),

    #[error("manifest parse error at line {line}: {message}")]
    ManifestParse { line: u64, message: String },

    /// Manifest rows whose images are missing, undecodable or mismatched.
    /// Each entry is `(line, reason)`.
    #[error("manifest validation failed for {} row(s): {}", .rows.len(), format_rows(.rows))]
    ManifestValidation { rows: Vec<(u64, String)> },

    #[error("failed to decode image {path}: {source}")]
    ImageDecode {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad data rather than the environment.
    pub fn is_data_error(&self) -> bool {
        !matches!(self, Error::Io { .. })
    }
}

fn format_rows(rows: &[(u64, String)]) -> String {
    rows.iter()
        .map(|(line, why)| format!("line {line}: {why}"))
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
