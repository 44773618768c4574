//! Simulation of a hierarchical cellular-automaton decoder for Ising anyons
//! on an L x L torus, together with tools to check its correction guarantees.

pub mod algebra;
pub mod backend;
pub mod classifier;
pub mod decoder;
pub mod experiments;
pub mod lattice;
pub mod noise;
pub mod verifier;

pub use backend::{Anyon, AnyonId, BranchPolicy, Charge, FusionOrder, Kind, PairKind, SystemState};
pub use decoder::{full_step, Decoder, DecoderConfig};
pub use lattice::{LatticeGeom, Site};
pub use noise::{ErrorEvent, EventKind, NoiseConfig};
pub use verifier::{lifetime_run, snapshot_decode, LifetimeOutcome, LogicalStatus, RunConfig};
