//! Front-end plumbing shared by the command-line tool: unit conversion,
//! point reports, sweeps, comparison tables, optimisation and
//! configuration files.

pub mod config;
pub mod format;
pub mod optimize;
pub mod report;
pub mod sweep;
pub mod tables;
pub mod units;

use crate::error::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_INFEASIBLE: i32 = 4;

/// Process exit code for a failed command.
pub fn exit_code(error: &Error) -> i32 {
    match error {
        Error::InvalidParameter { .. } | Error::InvalidRequest(_) => EXIT_USAGE,
        Error::Infeasible(_) => EXIT_INFEASIBLE,
        _ => EXIT_NUMERICAL,
    }
}
