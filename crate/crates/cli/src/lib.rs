//! Batch driver for the quantization experiments: exact identity suites,
//! matrix dumps, rate verification runs with CSV and SVG reports.

pub mod checks;
pub mod commands;
pub mod config;
pub mod plot;
pub mod runner;

use nambu_core::Error;

/// Process exit status. Combining two statuses keeps the more severe one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Ok,
    Violation,
    NonConvergence,
    Usage,
}

impl Status {
    pub fn code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Violation => 1,
            Status::Usage => 2,
            Status::NonConvergence => 3,
        }
    }

    pub fn combine(self, other: Status) -> Status {
        self.max(other)
    }

    pub fn of_error(e: &Error) -> Status {
        match e {
            Error::NoConvergence { .. } | Error::GridTooCoarse { .. } => Status::NonConvergence,
            _ => Status::Usage,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn severity_order() {
        assert_eq!(Status::Ok.combine(Status::Violation), Status::Violation);
        assert_eq!(Status::NonConvergence.combine(Status::Violation), Status::NonConvergence);
        assert_eq!(Status::Usage.combine(Status::NonConvergence).code(), 2);
        assert_eq!(Status::of_error(&Error::NoConvergence { iterations: 3, estimate: 1.0 }).code(), 3);
        assert_eq!(Status::of_error(&Error::ZeroLevel).code(), 2);
    }
}
