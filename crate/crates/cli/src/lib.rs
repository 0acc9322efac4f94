//! Library surface of the `haarthin` command-line harness: experiment
//! drivers, CSV formatting, point-stream parsing and table snapshots. The
//! algorithms themselves live in `haarthin-core`.

pub mod config;
pub mod csvfmt;
pub mod experiments;
pub mod snapshot;
pub mod streams;
pub mod thin;
