//! Desk-scale experiments: state generation, possession episodes and the
//! paired benchmark.

pub mod bench;
pub mod episode;
pub mod scenario;

pub use bench::{bench, BenchReport, BenchSetup, VersionStats};
pub use episode::{run_episode, EpisodeConfig, EpisodeResult, Termination};
pub use scenario::{generate_states, ScenarioConfig};
