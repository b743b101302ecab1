//! The labeled-clause calculus and state exploration.

pub mod engine;
pub mod explore;
pub mod labeled;

pub use engine::{saturate_state, satisfiable, StateSaturation, Saturator};
pub use explore::{explore, explore_with, Edge, ExplorationResult, ExploreError, ExploreOptions};
pub use labeled::{clause_less, is_redundant, path_less, LabeledClause, Path, Tag};
