use thiserror::Error;

/// Errors produced by the analytic engine, the simulator and the file loaders.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument falls outside the domain where the model is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A catalog entry exists but has no value for the requested pair.
    #[error("not defined: {0}")]
    NotDefined(String),

    #[error("unknown MCS index {0} (catalog holds 0..=10)")]
    UnknownMcs(u8),

    #[error("unknown region `{name}`; known regions: {}", known.join(", "))]
    UnknownRegion { name: String, known: Vec<String> },

    #[error("unknown device preset `{name}`; known presets: {}", known.join(", "))]
    UnknownDevice { name: String, known: Vec<String> },

    /// The link budget cannot reach the threshold even at the 1 m reference distance.
    #[error("no coverage: {0}")]
    NoCoverage(String),

    /// A relay hop cannot close at its fixed distance.
    #[error("infeasible scenario: {hop} is short by {deficit_db:.2} dB")]
    Infeasible { hop: String, deficit_db: f64 },

    /// An iterative solver failed to meet its tolerance.
    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    /// Structurally valid input that violates a model invariant.
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// Converts a TOML deserialization error into a positioned parse error.
    pub(crate) fn from_toml(src: &str, e: toml::de::Error) -> Self {
        let (line, column) = match e.span() {
            Some(span) => line_col(src, span.start),
            None => (0, 0),
        };
        Error::Parse {
            line,
            column,
            message: e.message().trim().to_string(),
        }
    }
}

/// 1-based line and column of a byte offset.
fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(src.len());
    let before = &src[..offset];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(offset, |nl| offset - nl - 1) + 1;
    (line, column)
}

pub(crate) fn check_probability_open(name: &str, p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must lie in (0, 1), got {p}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_col_counts_from_one() {
        let src = "a = 1\nb = x\n";
        assert_eq!(line_col(src, 0), (1, 1));
        assert_eq!(line_col(src, 10), (2, 5));
    }

    #[test]
    fn probability_bounds_are_open() {
        assert!(check_probability_open("p", 0.5).is_ok());
        assert!(check_probability_open("p", 0.0).is_err());
        assert!(check_probability_open("p", 1.0).is_err());
        assert!(check_probability_open("p", f64::NAN).is_err());
    }
}
