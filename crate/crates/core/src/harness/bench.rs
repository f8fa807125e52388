//! Paired comparison of unmarking chains over the same seeded episodes.

use std::fmt::Write as _;

use rayon::prelude::*;

use super::episode::{run_episode, EpisodeConfig, EpisodeResult, Termination};
use super::scenario::{generate_states, ScenarioConfig};
use crate::error::{Error, Result};
use crate::predictor::PassPredictor;
use crate::strategies::{StrategyChain, StrategyConfig};
use crate::world::Physics;

#[derive(Debug, Clone, PartialEq)]
pub struct VersionStats {
    pub version: String,
    pub episodes: usize,
    pub mean_passes: f64,
    /// Completed over attempted passes, 0 when nothing was attempted.
    pub pass_accuracy: f64,
    pub mean_possession: f64,
    pub mean_shots: f64,
    pub interceptions: usize,
    pub out_of_field: usize,
    pub shots: usize,
    pub timeouts: usize,
}

impl VersionStats {
    pub fn from_results(version: &str, results: &[EpisodeResult]) -> Self {
        let n = results.len().max(1) as f64;
        let attempted: u64 = results.iter().map(|r| u64::from(r.passes_attempted)).sum();
        let completed: u64 = results.iter().map(|r| u64::from(r.passes_completed)).sum();
        let count = |t: Termination| results.iter().filter(|r| r.termination == t).count();
        Self {
            version: version.to_string(),
            episodes: results.len(),
            mean_passes: attempted as f64 / n,
            pass_accuracy: if attempted == 0 {
                0.0
            } else {
                completed as f64 / attempted as f64
            },
            mean_possession: results.iter().map(|r| f64::from(r.possession_cycles)).sum::<f64>() / n,
            mean_shots: results.iter().map(|r| f64::from(r.shot_opportunities)).sum::<f64>() / n,
            interceptions: count(Termination::Interception),
            out_of_field: count(Termination::OutOfField),
            shots: count(Termination::Shot),
            timeouts: count(Termination::Timeout),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub seed: u64,
    pub episodes: usize,
    pub rows: Vec<VersionStats>,
}

impl BenchReport {
    pub fn row(&self, version: &str) -> Option<&VersionStats> {
        self.rows.iter().find(|r| r.version == version)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "version,seed,episodes,mean_passes,pass_accuracy,mean_possession,mean_shots,\
             interceptions,out_of_field,shots,timeouts\n",
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{:.6},{:.6},{:.6},{:.6},{},{},{},{}",
                r.version,
                self.seed,
                r.episodes,
                r.mean_passes,
                r.pass_accuracy,
                r.mean_possession,
                r.mean_shots,
                r.interceptions,
                r.out_of_field,
                r.shots,
                r.timeouts
            );
        }
        out
    }

    pub fn to_table(&self) -> String {
        let mut out = format!(
            "seed {}  episodes {}\n{:<8} {:>8} {:>9} {:>11} {:>8} {:>6} {:>6} {:>6} {:>6}\n",
            self.seed,
            self.episodes,
            "version",
            "passes",
            "pass_acc",
            "possession",
            "shots",
            "int",
            "out",
            "shot",
            "time"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<8} {:>8.2} {:>9.3} {:>11.2} {:>8.3} {:>6} {:>6} {:>6} {:>6}",
                r.version,
                r.mean_passes,
                r.pass_accuracy,
                r.mean_possession,
                r.mean_shots,
                r.interceptions,
                r.out_of_field,
                r.shots,
                r.timeouts
            );
        }
        out
    }
}

/// Noise seed of episode `index`; shared by every version.
pub fn episode_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (index as u64).wrapping_add(1).wrapping_mul(0xD1B5_4A32_D192_ED03)
}

pub struct BenchSetup<'a> {
    pub scenario: ScenarioConfig,
    pub strategy: &'a StrategyConfig,
    pub episode: &'a EpisodeConfig,
    pub physics: &'a Physics,
}

/// Runs every version on the same `n_episodes` initial states. Episodes run
/// on the rayon pool; results are gathered in episode order.
pub fn bench(
    versions: &[StrategyChain],
    n_episodes: usize,
    seed: u64,
    predictor: &dyn PassPredictor,
    setup: &BenchSetup<'_>,
) -> Result<BenchReport> {
    if n_episodes < 1 {
        return Err(Error::Config("bench needs at least one episode".into()));
    }
    let scenario = ScenarioConfig {
        seed,
        n_states: n_episodes,
        ..setup.scenario
    };
    let starts = generate_states(&scenario, setup.physics);
    let mut rows = Vec::with_capacity(versions.len());
    for chain in versions {
        let results = starts
            .par_iter()
            .enumerate()
            .map(|(i, s)| {
                run_episode(
                    s,
                    chain,
                    predictor,
                    setup.strategy,
                    setup.episode,
                    setup.physics,
                    episode_seed(seed, i),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(VersionStats::from_results(chain.name(), &results));
    }
    Ok(BenchReport {
        seed,
        episodes: n_episodes,
        rows,
    })
}
