//! Library surface of the experiment driver, exposed so integration tests
//! can exercise config parsing and the runners directly.

pub mod config;
pub mod output;
pub mod run;
