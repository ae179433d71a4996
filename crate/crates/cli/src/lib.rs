//! Configuration, run modes and artifact writing behind the `twodcs`
//! command.

pub mod config;
pub mod plot;
pub mod run;
pub mod units;

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const OUTPUT: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const NUMERIC: i32 = 3;
}
