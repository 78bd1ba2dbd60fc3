//! Jason-RS: a BDI agent runtime served over HTTP, next to an emulated
//! connected-object platform whose features forward readings to agents.
//!
//! The language, solver and reasoning cycle live in `jason-rs-core`; this
//! crate adds threading, the HTTP surface, the waste-disposal scenario and
//! the latency benchmark.

pub mod bench;
pub mod error;
pub mod gateway;
pub mod platform;
pub mod runtime;
pub mod scenario;
pub mod server;

pub use jason_rs_core as core;
pub use platform::Platform;
pub use runtime::Runtime;
