//! Optimizer for near-deterministic entanglement distribution over quantum
//! repeater chains.

pub mod chain;
pub mod error;
pub mod keyrate;
pub mod optimizer;
pub mod platform_ip;
pub mod platform_mp;
pub mod qstate;
pub mod report;
pub mod scheme;
pub mod timing;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
