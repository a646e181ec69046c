//! Constrained optimisation and Monte Carlo sampling over scenarios.

pub mod de;
pub mod encoding;
pub mod montecarlo;
pub mod rng;
pub mod sweep;

pub use de::{optimize, DEConfig, Evaluation, GenerationRecord, OptimizeResult};
pub use encoding::ParameterVector;
pub use montecarlo::{monte_carlo_bounds, MonteCarloSummary, SamplingMode};
pub use sweep::{sweep_frontier, Problem, SweepPoint, SweepResult};
