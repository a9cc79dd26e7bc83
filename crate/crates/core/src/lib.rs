//! Exact arithmetic for groups of piecewise similarities of compact
//! ultrametric spaces presented as end spaces of finite rooted trees:
//! Higman–Thompson groups, full groups of subshifts of finite type and
//! their automaton-decorated relatives.
//!
//! All operations go through a [`Structure`], which pairs a [`Space`] with
//! its similarity structure.

pub mod builders;
pub mod checks;
pub mod cocycle;
pub mod element;
pub mod error;
pub mod fixtures;
pub mod simstruct;
pub mod space;

pub use builders::{ParadoxData, ParadoxReport, PingPong, PingPongReport, Stratum};
pub use checks::{CssStarReport, TransitionMatrix};
pub use cocycle::{CocycleVector, EmbeddingClass};
pub use element::{BallStatus, CosetRep, Element, RandomParams, Region};
pub use error::{Error, Result};
pub use simstruct::{GroupAutomaton, SimilarityLabel, Structure};
pub use space::{addr, BallAddress, ClassId, Partition, Space, SymbolId};
