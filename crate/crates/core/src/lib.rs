//! QuantumSAC: soft actor-critic with a hybrid variational-quantum policy.
//!
//! The crate bundles everything needed to train and compare agents on the
//! pendulum swing-up task:
//!
//! * [`qstate`]: dense statevector simulator (RX, RY, RZ, ROT, CNOT, ⟨Z⟩).
//! * [`vqc`]: vanilla and data re-uploading circuits with parameter-shift
//!   and adjoint gradients.
//! * [`nn`]: small dense networks with reverse-mode gradients, Adam and
//!   Polyak averaging.
//! * [`policy`]: squashed-Gaussian policies backed by an MLP or a VQC plus a
//!   linear head.
//! * [`pendulum`], [`replay`], [`sac`]: environment, buffer and training loop.
//! * [`exp`]: experiment harness (run files, grid search, aggregation, SVG).
//!
//! Batch work inside an update is mapped through [`par`], which uses rayon
//! when the `parallel` feature is on and a plain iterator otherwise. Both
//! paths produce bit-identical results.

pub mod error;
pub mod exp;
pub mod nn;
pub mod par;
pub mod pendulum;
pub mod policy;
pub mod qstate;
pub mod replay;
pub mod sac;
pub mod vqc;

pub use error::{Error, Result};
