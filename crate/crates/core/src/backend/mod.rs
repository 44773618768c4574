//! Executable dynamics for the Ising model.

pub mod ising;
pub mod majorana;

pub use ising::{Anyon, AnyonId, BranchPolicy, Charge, FusionOrder, Kind, PairKind, SystemState};
pub use majorana::MajoranaState;
