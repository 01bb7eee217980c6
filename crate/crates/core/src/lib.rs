//! Hardware-aware architecture search for mobile inverted-bottleneck
//! networks.
//!
//! The engine searches a 14-layer space of 12 block choices per layer with a
//! preference-weighted NSGA-II over three objectives: accuracy (from any
//! [`Evaluator`]), latency (from a per-layer [`LatencyTable`]) and parameter
//! count (from [`stats`]). More parameters are treated as better: at mobile
//! scale underfitting is the bigger risk, and parameters are cheap in
//! latency when they sit in the low-resolution layers.
//!
//! ```
//! use lutnas_core::{evolve, LatencyTable, SearchConfig, SyntheticEvaluator};
//!
//! let cfg = SearchConfig { population_size: 12, generations: 2, ..SearchConfig::default() };
//! let lut = LatencyTable::reference_proxy();
//! let outcome = evolve(&cfg, &SyntheticEvaluator, &lut).unwrap();
//! assert!(!outcome.final_front().is_empty());
//! ```

pub mod arch_table;
pub mod error;
pub mod evaluator;
pub mod latency;
pub mod nsga2;
pub mod search_space;
pub mod stats;

pub use error::{Error, ParseChromosomeError, Result};
pub use evaluator::{AccuracyScore, Evaluator, MissPolicy, SyntheticEvaluator, TableEvaluator};
pub use latency::{latency_rmse, LatencyTable, LutError, LutViolation};
pub use nsga2::{
    evolve, evolve_with_observer, ArchiveEntry, GenerationRecord, Individual, ObjectiveBounds,
    ObjectiveMode, ObjectiveVector, ObjectiveWeights, SearchConfig, SearchOutcome,
};
pub use search_space::{
    decode_architecture, presets, ArchitectureSpec, BlockChoice, Chromosome, SearchSpace,
    NUM_CHOICES, NUM_LAYERS,
};
pub use stats::{count_madds, count_params, model_stats, ModelStats};
