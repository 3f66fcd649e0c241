use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the toolchain can surface.
///
/// Variants are grouped by the exit-code class the CLI maps them to; see
/// [`Error::class`].
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("UnsupportedFormat: {0}")]
    UnsupportedFormat(String),
    #[error("CorruptFile: {0}")]
    CorruptFile(String),
    #[error("EmptyDocument: {0}")]
    EmptyDocument(String),
    #[error("PageOutOfRange: page {index} requested but document has {count} page(s)")]
    PageOutOfRange { index: usize, count: usize },
    #[error("InvalidInput: {0}")]
    InvalidInput(String),
    #[error("InvalidGeometry: {0}")]
    InvalidGeometry(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("BackendUnavailable: {0}")]
    BackendUnavailable(String),
    #[error("BackendProtocolError: {0}")]
    BackendProtocolError(String),
    #[error("AddressInUse: {0}")]
    AddressInUse(String),

    #[error("EmptyCrop: text instance covers less than one pixel after clipping")]
    EmptyCrop,
    #[error("NotATable: {0}")]
    NotATable(String),
    #[error("NonRectangularSpan: {0}")]
    NonRectangularSpan(String),
    #[error("CsvSpanUnsupported: table has spanning cells, csv export needs a plain grid")]
    CsvSpanUnsupported,
    #[error("SpecOverlap: {0}")]
    SpecOverlap(String),
}

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Input,
    Backend,
    Parse,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::UnsupportedFormat(_)
            | Error::CorruptFile(_)
            | Error::EmptyDocument(_)
            | Error::PageOutOfRange { .. }
            | Error::InvalidInput(_)
            | Error::InvalidGeometry(_)
            | Error::Io { .. }
            | Error::SpecOverlap(_) => ErrorClass::Input,
            Error::BackendUnavailable(_) | Error::BackendProtocolError(_) | Error::AddressInUse(_) => {
                ErrorClass::Backend
            }
            Error::EmptyCrop | Error::NotATable(_) | Error::NonRectangularSpan(_) | Error::CsvSpanUnsupported => {
                ErrorClass::Parse
            }
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
