//! Library side of the `isotropykit` binary: input files, verification
//! suites and the JSON report format.

pub mod report;
pub mod suites;
pub mod system_file;

use std::fmt;

/// How a command failed, which decides the exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    /// Bad flags or an unreadable/invalid input file (exit 2).
    Input(String),
    /// The numerics ran and something did not hold (exit 1).
    Numerical(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Input(_) => 2,
            Failure::Numerical(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Input(m) => write!(f, "input error: {m}"),
            Failure::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl std::error::Error for Failure {}
