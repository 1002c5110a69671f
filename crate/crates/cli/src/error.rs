use selfmad_core::detector::DetectorError;
use selfmad_core::imgcore::ImageError;
use selfmad_core::metrics::MetricsError;

/// Top-level error, split by exit code: usage 2, data 3, I/O 4.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<ImageError> for CliError {
    fn from(e: ImageError) -> Self {
        match e {
            ImageError::Io(inner) => CliError::Io(inner.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<DetectorError> for CliError {
    fn from(e: DetectorError) -> Self {
        match e {
            DetectorError::Io(inner) => CliError::Io(inner.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        match e {
            MetricsError::Io(inner) => CliError::Io(inner.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<selfmad_core::pixelgen::PixelGenError> for CliError {
    fn from(e: selfmad_core::pixelgen::PixelGenError) -> Self {
        CliError::Data(e.to_string())
    }
}
