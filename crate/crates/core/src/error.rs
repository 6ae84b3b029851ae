use thiserror::Error;

/// Every failure the toolkit can report.
///
/// Variants map onto the exit codes of the command-line front end: parameter
/// and configuration problems are caller errors, numeric failures are
/// [`Error::is_numeric`], and broken structural checks are
/// [`Error::is_consistency`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("ray grazes a disk boundary at t = {time}")]
    Tangency { time: f64 },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("section construction failed: {reason} (sample #{sample})")]
    Construction { reason: String, sample: usize },

    #[error("orbit escaped before returning to the section (t = {time})")]
    Escape { time: f64 },

    #[error("consistency check failed: {0}")]
    Consistency(String),

    #[error("twist degeneracy: |d2S/dy dy'| = {value:.3e} below floor {floor:.3e}")]
    Twist { value: f64, floor: f64 },

    #[error("model error: {0}")]
    Model(String),

    #[error("no sign change of the pressure on [{lo}, {hi}]")]
    Bracket { lo: f64, hi: f64 },

    #[error("zero of the determinant on or near the domain boundary: {0}")]
    BoundaryAmbiguity(String),

    #[error("grid undersamples the kernel phase: {nodes} nodes given, {required} required")]
    Aliasing { nodes: usize, required: usize },

    #[error("projector rank is zero: h = {h} too large for the ellipse")]
    Resolution { h: f64 },

    #[error("assembly error: {0}")]
    Assembly(String),

    #[error("non-finite input: {0}")]
    Input(String),

    #[error("enumeration budget exceeded: {0}")]
    Budget(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("numerical failure: {0}")]
    Numeric(String),
}

impl Error {
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_))
    }

    pub fn is_consistency(&self) -> bool {
        matches!(self, Error::Consistency(_) | Error::Construction { .. })
    }

    pub fn is_numeric(&self) -> bool {
        !self.is_config() && !self.is_consistency()
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
