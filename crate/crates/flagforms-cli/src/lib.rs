//! Library behind the `flagforms` command-line tool.
//!
//! [`config`] assembles and validates run configurations from flags and
//! `key=value` files, [`suites`] executes the named check suites against the
//! `flagforms` library, and [`report`] serializes the results byte-stably as
//! JSON or CSV.

pub mod config;
pub mod report;
pub mod suites;
