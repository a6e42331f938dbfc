//! Multi-coin discrete-time quantum walks on edge-labeled graphs, with a
//! qutrit teleportation protocol engine and an auditor that checks published
//! intermediate results against independent computation.
//!
//! The composite space is ordered `position ⊗ coin₁ ⊗ coin₂` and flattened
//! row-major; see [`hilbert`].

pub mod cli;
pub mod coins;
pub mod config;
pub mod error;
pub mod graphshift;
pub mod hilbert;
pub mod protocol;
pub mod report;
pub mod verify;
pub mod walk;

pub use error::{Error, Result};
