use std::fmt;

/// A single violated design invariant, tied to the field that broke it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl Violation {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("config parse error at line {line}{}: {message}", field.as_deref().map(|f| format!(" (field `{f}`)")).unwrap_or_default())]
    Parse {
        line: usize,
        field: Option<String>,
        message: String,
    },

    #[error("invalid design ({} violation(s)): {}", .0.len(), join(.0))]
    Validation(Vec<Violation>),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("network topology error: {0}")]
    Topology(String),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("{quantity} requested at {at:.6e}, outside tabulated range [{min:.6e}, {max:.6e}]")]
    OutOfRange {
        quantity: &'static str,
        at: f64,
        min: f64,
        max: f64,
    },

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("solver error: {message} (residual history: {residuals:?})")]
    Solver {
        message: String,
        residuals: Vec<f64>,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

fn join(v: &[Violation]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

impl Error {
    /// Violations carried by a validation error, empty otherwise.
    pub fn violations(&self) -> &[Violation] {
        match self {
            Error::Validation(v) => v,
            _ => &[],
        }
    }

    /// True for errors caused by bad input (config or validation) rather than numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::Validation(_)
                | Error::InvalidArgument(_)
                | Error::Geometry(_)
                | Error::DegenerateGeometry(_)
                | Error::OutOfRange { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
