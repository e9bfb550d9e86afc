//! Desk-scale household-physics environment paired with a neural dynamics
//! model and a language-grounding layer.
//!
//! The crate is organized around the data flow of an experiment run:
//! [`world`] defines the attribute schema and object/world/transition model,
//! [`physics`] applies actions to worlds, [`oracle`] generates seeded
//! trajectories and assembles datasets, [`codec`] handles the flat text
//! serialization plus the sentence templater, [`nn`] is a small reverse-mode
//! autodiff layer, [`dynamics`] and [`grounding`] hold the learned models,
//! and [`eval`] computes metrics and reports.

pub mod checkpoint;
pub mod codec;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod eval;
pub mod grounding;
pub mod nn;
pub mod oracle;
pub mod physics;
pub mod world;

pub use error::{CodecError, NeuralError, OracleError, PhysicsError, WorldError};
