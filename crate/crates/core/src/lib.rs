//! Topological interference management under finite-precision channel knowledge.
//!
//! Builds alignment, conflict and reduced graphs for a partially connected
//! interference network, searches odd reduced cycles for the tightest
//! completed cycle, reports the resulting symmetric-DoF bound, constructs the
//! 1/2 and 4/9 slot schemes, and checks them on a deterministic floor channel.
//! The `oracle` module verifies the aligned-image-set inequalities by brute
//! force on tiny instances.

pub mod bounds;
pub mod cli;
pub mod cycles;
pub mod graphs;
pub mod oracle;
pub mod scheme;
pub mod simulator;
pub mod topology;
