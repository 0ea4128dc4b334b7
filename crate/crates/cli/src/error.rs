use std::fmt;

use hhl_depth::dataset::DatasetError;
use hhl_depth::features::FeatureError;
use hhl_depth::hhl::HhlError;
use hhl_depth::matrix::MatrixError;
use hhl_depth::metrics::MetricsError;
use hhl_depth::mlp::MlpError;

/// Failure classes, each with its own exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags or config (exit 1).
    Usage(String),
    /// Unreadable, malformed or unsuitable input data (exit 2).
    Data(String),
    /// A numerical routine failed (exit 3).
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Numeric(m) => m,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self {
            CliError::Usage(_) => "usage error",
            CliError::Data(_) => "data error",
            CliError::Numeric(_) => "numeric failure",
        };
        write!(f, "{kind}: {}", self.message())
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<MatrixError> for CliError {
    fn from(e: MatrixError) -> Self {
        match e {
            MatrixError::NoConvergence(_) | MatrixError::ResampleBudgetExhausted(_) => {
                CliError::Numeric(e.to_string())
            }
            MatrixError::InvalidSpec(_) => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<HhlError> for CliError {
    fn from(e: HhlError) -> Self {
        match e {
            HhlError::Matrix(m) => m.into(),
            HhlError::NotPowerOfTwo(_) | HhlError::RhsLength { .. } => CliError::Data(e.to_string()),
            other => CliError::Numeric(other.to_string()),
        }
    }
}

impl From<FeatureError> for CliError {
    fn from(e: FeatureError) -> Self {
        match e {
            FeatureError::Matrix(m) => m.into(),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        match e {
            DatasetError::Matrix(m) => m.into(),
            DatasetError::Hhl(h) => h.into(),
            DatasetError::Feature(f) => f.into(),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<MlpError> for CliError {
    fn from(e: MlpError) -> Self {
        match e {
            MlpError::NonFinite { .. } => CliError::Numeric(e.to_string()),
            MlpError::InvalidConfig(_) => CliError::Usage(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        match e {
            MetricsError::Training(m) => CliError::Numeric(m),
            other => CliError::Data(other.to_string()),
        }
    }
}
