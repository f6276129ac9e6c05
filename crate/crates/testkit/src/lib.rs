//! Shared test support: randomized catalogs with a brute-force cube oracle,
//! the five-event reference fixture, and mock origin sources.

pub mod catalogs;
pub mod checks;
pub mod http;
pub mod sources;

pub use catalogs::*;
pub use checks::{oracle_mismatch, report_mismatches, rollup_violations};
pub use sources::{mock_sources, MockSources, PER_SOURCE};
