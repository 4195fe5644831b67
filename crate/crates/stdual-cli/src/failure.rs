//! Failure kinds and their exit codes.

use std::fmt;

#[derive(Debug)]
pub enum Failure {
    /// Exit code 1.
    Usage(String),
    /// Exit code 2.
    Validation(String),
    /// Exit code 3.
    Gate(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Validation(_) => 2,
            Failure::Gate(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Validation(m) => write!(f, "validation error: {m}"),
            Failure::Gate(m) => write!(f, "numerical gate failed: {m}"),
        }
    }
}

impl From<stdual::Error> for Failure {
    fn from(e: stdual::Error) -> Self {
        use stdual::Error::*;
        match e {
            CapExceeded { dim, cap } => Failure::Validation(format!(
                "dimension {dim} exceeds the cap {cap}; reduce N, T or the spin (or L), or raise numerics.cap"
            )),
            DimensionOverflow => Failure::Validation("dimension overflows; reduce N, T or the spin (or L)".into()),
            InvalidParameter(_) | DegenerateFit(_) | Incompatible(_) => Failure::Validation(e.to_string()),
            NotUnitary { .. } | BranchSingularity(_) | Eigensolver(_) | NearBifurcation { .. } | Quadrature => Failure::Gate(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Validation(format!("i/o: {e}"))
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Validation(format!("csv: {e}"))
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Validation(format!("json: {e}"))
    }
}
