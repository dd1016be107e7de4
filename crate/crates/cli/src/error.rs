use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum FileError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}:{line}: {message}", path.display())]
    Parse { path: PathBuf, line: usize, message: String },
    #[error(transparent)]
    Core(#[from] bevtrack_core::Error),
}

pub type FileResult<T> = Result<T, FileError>;

impl FileError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io { path: path.to_path_buf(), source }
    }

    pub fn parse(path: &Path, line: usize, message: impl Into<String>) -> Self {
        Self::Parse { path: path.to_path_buf(), line, message: message.into() }
    }

    /// 2 for unreadable or malformed input, 1 for input that parses but is
    /// rejected.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Io { .. } | Self::Parse { .. } => 2,
            Self::Core(_) => 1,
        }
    }
}

pub(crate) fn read_text(path: &Path) -> FileResult<String> {
    std::fs::read_to_string(path).map_err(|e| FileError::io(path, e))
}

pub(crate) fn write_text(path: &Path, text: &str) -> FileResult<()> {
    std::fs::write(path, text).map_err(|e| FileError::io(path, e))
}

/// Shortest decimal that reads back to the same value; exponent form for
/// very small or very large magnitudes.
pub(crate) fn decimal(x: f64) -> String {
    let e = if x == 0.0 || !x.is_finite() { 0 } else { x.abs().log10().floor() as i32 };
    if (-5..17).contains(&e) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}
