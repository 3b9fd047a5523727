//! Library backing the `frontloop` command-line tool: configuration files,
//! dataset I/O, and the command implementations.

pub mod commands;
pub mod config;
pub mod io;

use frontloop_core::Error;

/// Process exit codes: 0 ok, 2 config/usage, 3 evaluation, 4 numerics.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Evaluation { .. } => 3,
        Error::Conditioning(_) | Error::Divergence { .. } | Error::NonFinite(_) => 4,
        _ => 2,
    }
}
