//! Harness library behind the `bnslab` binary: the verification suite,
//! experiment drivers and deterministic result emission.

pub mod drivers;
pub mod report;
pub mod verify;

pub use drivers::{dispatch, emit, DriverOutput};
pub use report::{CheckResult, ScenarioReport};
pub use verify::Env;
