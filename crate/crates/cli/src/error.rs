use std::fmt;

/// Process exit statuses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad files, flags or queries.
    Input = 2,
    /// Database or filesystem trouble outside the user's inputs.
    Environment = 3,
}

#[derive(Debug)]
pub struct CliError {
    pub kind: ErrorKind,
    pub error: anyhow::Error,
}

impl CliError {
    pub fn input(error: impl Into<anyhow::Error>) -> Self {
        Self {
            kind: ErrorKind::Input,
            error: error.into(),
        }
    }

    pub fn environment(error: impl Into<anyhow::Error>) -> Self {
        Self {
            kind: ErrorKind::Environment,
            error: error.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.kind as i32
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Library errors often repeat their source in their own message.
        let mut shown = String::new();
        for cause in self.error.chain() {
            let text = cause.to_string();
            if shown.contains(&text) {
                continue;
            }
            if !shown.is_empty() {
                shown.push_str(": ");
            }
            shown.push_str(&text);
        }
        f.write_str(&shown)
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Tags a fallible result with the exit status its error should produce.
pub trait Classify<T> {
    fn input(self) -> CliResult<T>;
    fn environment(self) -> CliResult<T>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn input(self) -> CliResult<T> {
        self.map_err(CliError::input)
    }

    fn environment(self) -> CliResult<T> {
        self.map_err(CliError::environment)
    }
}
