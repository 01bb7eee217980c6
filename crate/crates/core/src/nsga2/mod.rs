//! Weighted NSGA-II over the block search space.

pub mod crowding;
pub mod evolve;
pub mod hypervolume;
pub mod objectives;
pub mod operators;
pub mod sort;

pub use crowding::weighted_crowding;
pub use evolve::{
    evolve, evolve_with_observer, rank_population, select_k_equal_distance, stream_rng,
    ArchiveEntry, GenerationRecord, ObjectiveBounds, SearchConfig, SearchOutcome,
};
pub use hypervolume::hypervolume;
pub use objectives::{canonicalize, dominates, ObjectiveMode, ObjectiveVector, ObjectiveWeights};
pub use operators::{
    binary_tournament, crossover_at, crowded_compare, hierarchical_mutation,
    single_point_crossover, tournament_select, Individual,
};
pub use sort::{constrained_nondominated_sort, fast_nondominated_sort, ranks_from_fronts};
