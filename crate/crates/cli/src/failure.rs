use std::fmt;

/// Documented process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const SUITE_FAILURE: i32 = 1;
    pub const VALIDATION: i32 = 2;
    pub const NUMERICAL: i32 = 3;
}

#[derive(Debug)]
pub enum Failure {
    Validation(String),
    Numerical(String),
}

impl Failure {
    pub fn validation(msg: impl Into<String>) -> Self {
        Failure::Validation(msg.into())
    }

    /// Core errors split by whether the inputs or the numerics are at fault.
    pub fn from_core(field: &str, e: qmetric_core::Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Validation(format!("{field}: {e}"))
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Validation(_) => exit::VALIDATION,
            Failure::Numerical(_) => exit::NUMERICAL,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Validation(m) | Failure::Numerical(m) => m,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self {
            Failure::Validation(_) => "invalid input",
            Failure::Numerical(_) => "numerical failure",
        };
        write!(f, "{kind}: {}", self.message())
    }
}

/// Core errors raised while evaluating (not parsing) are attributed to the
/// computation.
impl From<qmetric_core::Error> for Failure {
    fn from(e: qmetric_core::Error) -> Self {
        Failure::from_core("evaluation", e)
    }
}
