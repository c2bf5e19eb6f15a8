//! Decentralized Hodge decomposition on triangulated sensor networks, hole
//! detection from harmonic 1-forms, and homotopy classification of paths.

pub mod basis;
pub mod classify;
pub mod hodge;
pub mod netgen;
pub mod oracle;
pub mod pipeline;
pub mod simharness;
pub mod surface;
