use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("matrix is {kind}, not hyperbolic (|trace| = {trace})")]
    Classification { kind: &'static str, trace: f64 },

    #[error("{what}: did not converge (partial value {partial}, error bound {bound})")]
    Numeric { what: String, partial: f64, bound: f64 },

    #[error("length {requested} lies beyond the reliable horizon {horizon} of the table")]
    Horizon { requested: f64, horizon: f64 },

    #[error("unsupported presentation: {0}")]
    UnsupportedPresentation(String),

    #[error("infinite mass: {0}")]
    InfiniteMass(String),

    #[error("electrical thickness {theta} is negative beyond tolerance; Grunsky inequality violated, conformal data inconsistent")]
    Grunsky { theta: f64 },

    #[error("log|psi'(0)| = {0} is negative; Schwarz lemma forces |psi'(0)| >= 1")]
    Schwarz(f64),

    #[error("class {0:?} has no symmetry-pinned marking; identity instance is unverifiable")]
    UnverifiedMarking((i32, i32)),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("spectrum cache version mismatch: file has version {found}, this build reads version {expected}")]
    CacheVersion { found: u32, expected: u32 },

    #[error("spectrum cache checksum failure (stored {stored:#018x}, computed {computed:#018x})")]
    CacheChecksum { stored: u64, computed: u64 },

    #[error("malformed spectrum cache: {0}")]
    CacheMalformed(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
