//! Learning-guided tactic-level proof search for a small simply-typed
//! logic: tactic recording, k-NN tactic prediction, best-first proof
//! search with a cost/heuristic co-distance, a small resolution hammer,
//! and proof-script reconstruction, plus a chronological re-proving
//! harness over the bundled corpus.

pub mod feature;
pub mod harness;
pub mod knn;
pub mod meter;
pub mod prover;
pub mod script;
pub mod search;
pub mod syntax;
pub mod tactic;
pub mod term;

pub use knn::{FeatureDb, Origin, ScoredTactic, ScoringParams};
pub use prover::HammerConfig;
pub use search::{replay, search, SearchOutcome, SearchResult, StrategyConfig};
pub use tactic::{apply_with_budget, reference_tactics, Tactic, TacticOutcome};
pub use term::{Goal, Term, Theorem, Type};
