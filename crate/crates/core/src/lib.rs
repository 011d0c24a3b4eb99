//! Loss-based quantum efficiency of multimode bosonic states.
//!
//! States live on a per-mode truncated Fock space ([`fock`]). Loss channels,
//! interferometers and post-selected measurements are in [`optics`]; the
//! efficiency measures with their certificates in [`efficiency`]; the
//! RQ/SVD construction bounding the efficiency after linear-optical
//! processing in [`decomposition`]; randomized end-to-end checks in
//! [`harness`].
#![no_std]
extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod decomposition;
pub mod efficiency;
pub mod error;
pub mod fock;
pub mod harness;
pub mod linalg;
pub mod optics;
pub mod optimize;
pub mod random;

pub use error::{Error, Result};
pub use fock::{MultiModeState, Normalization, StateBuilder, TruncationSpec};
pub use optics::{LossVector, MeasurementSpec, ModeUnitary};
