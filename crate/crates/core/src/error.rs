use std::path::PathBuf;

use crate::spectro::LorentzianParams;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("untrapped species {species}: effective radial frequency squared is {freq_sq:.6e} Hz^2")]
    UntrappedSpecies { species: String, freq_sq: f64 },

    #[error("singular configuration: ions {first} and {second} coincide")]
    SingularConfiguration { first: usize, second: usize },

    #[error("timestep {dt:.3e} s exceeds the stability bound {max:.3e} s")]
    TimestepTooLarge { dt: f64, max: f64 },

    #[error("melted cluster: {species} reached {temperature:.4e} K at t = {time:.4e} s")]
    MeltedCluster {
        species: String,
        temperature: f64,
        time: f64,
    },

    #[error("species {0} is not present")]
    SpeciesAbsent(String),

    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("sampling is not uniform")]
    NonUniformSampling,

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("fit did not converge after {iterations} iterations (last iterate {last:?})")]
    FitNonConvergence {
        iterations: usize,
        last: LorentzianParams,
    },

    #[error("{}line {line}: {message}", path.as_ref().map(|p| format!("{}: ", p.display())).unwrap_or_default())]
    Parse {
        path: Option<PathBuf>,
        line: usize,
        message: String,
    },

    #[error("malformed trajectory file: {0}")]
    TrajectoryFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularConfiguration { .. }
                | Error::MeltedCluster { .. }
                | Error::FitNonConvergence { .. }
                | Error::DegenerateData(_)
        )
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: None,
            line,
            message: message.into(),
        }
    }

    pub(crate) fn with_path(self, path: impl Into<PathBuf>) -> Self {
        match self {
            Error::Parse { line, message, .. } => Error::Parse {
                path: Some(path.into()),
                line,
                message,
            },
            other => other,
        }
    }
}

/// 1-based line number of a byte offset.
pub(crate) fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Converts a toml deserialization error into a line-tagged parse error.
pub(crate) fn from_toml(text: &str, err: toml::de::Error) -> Error {
    let line = err.span().map(|s| line_of(text, s.start)).unwrap_or(0);
    Error::parse(line, err.message().to_string())
}
