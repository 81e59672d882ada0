//! Weighted finite-state transducers over the tropical and log semirings.

pub mod compose;
pub mod forward_backward;
pub mod io;
pub mod ops;
pub mod semiring;
pub mod shortest;
pub mod symbols;
pub mod wfst;

pub use compose::{compose, compose3, compose_chain, ComposeOptions};
pub use forward_backward::{forward_backward, Posteriors};
pub use ops::{arc_sort, trim, SortKey};
pub use semiring::{LogWeight, Semiring, TropicalWeight};
pub use shortest::{prune, reverse_distance, shortest_distance, shortest_path, ShortestPath};
pub use symbols::{Label, SymbolTable, Symbols, EPSILON, EPSILON_SYMBOL};
pub use wfst::{Arc, ParamId, StateId, Wfst, WfstBuilder};

/// Tropical-semiring machine, used for decoding.
pub type StdFst = Wfst<TropicalWeight>;
/// Log-semiring machine, used for expectation computations.
pub type LogFst = Wfst<LogWeight>;
