use alloc::string::String;

/// Errors raised by the search-box geometry, the optimizer and the benchmark
/// constructors.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A parameter or bound is outside its admissible range.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Vector lengths disagree with the problem dimension.
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// The random stream kept producing (numerically) zero displacements.
    #[error("degenerate displacement after {attempts} draws")]
    DegenerateSample { attempts: usize },

    /// An affine update was requested along a (numerically) zero displacement.
    #[error("displacement squared norm {0:e} is below the zero guard")]
    ZeroDisplacement(f64),

    /// Angle requested between a vector and the zero vector.
    #[error("angle is undefined for a zero vector")]
    ZeroVector,

    /// The named benchmark exists in the literature but is not bundled.
    #[error("unavailable: external suite ({0} needs a third-party benchmark codebase)")]
    Unavailable(String),

    /// No benchmark is registered under the given name.
    #[error("unknown function `{0}`")]
    UnknownFunction(String),

    /// A run inside a campaign or grid failed.
    #[error("run {index} failed: {source}")]
    Run {
        index: usize,
        #[source]
        source: alloc::boxed::Box<Error>,
    },
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

pub(crate) fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}
