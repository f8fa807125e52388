//! `key = value` configuration covering every physics constant and
//! hyperparameter. Blank lines and `#` comments are ignored.

use std::str::FromStr;

use crate::decisioning::Priority;
use crate::error::{Error, Result};
use crate::harness::{EpisodeConfig, ScenarioConfig};
use crate::positioning::PositionObjective;
use crate::predictor::TrainConfig;
use crate::strategies::StrategyConfig;
use crate::world::{FieldSpec, Physics};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Config {
    pub physics: Physics,
    pub train: TrainConfig,
    pub strategy: StrategyConfig,
    pub episode: EpisodeConfig,
    pub scenario: ScenarioConfig,
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("bad value {value:?} for {key}")))
}

impl Config {
    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            self.set(k.trim(), v.trim())?;
        }
        self.check()
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        let ph = &mut self.physics;
        match key {
            "field_length" => ph.field = FieldSpec::new(parse(key, v)?, ph.field.width),
            "field_width" => ph.field = FieldSpec::new(ph.field.length, parse(key, v)?),
            "kickable_margin" => ph.kickable_margin = parse(key, v)?,
            "ball_max_speed" => ph.ball_max_speed = parse(key, v)?,
            "player_max_speed" => ph.player_max_speed = parse(key, v)?,
            "ball_decay" => ph.ball_decay = parse(key, v)?,
            "pass_speed" => ph.pass_speed = parse(key, v)?,
            "horizon" => ph.horizon = parse(key, v)?,
            "reaction_delay" => ph.reaction_delay = parse(key, v)?,
            "learning_rate" => self.train.learning_rate = parse(key, v)?,
            "batch_size" => self.train.batch_size = parse(key, v)?,
            "epochs" => self.train.epochs = parse(key, v)?,
            "l2" => self.train.l2 = parse(key, v)?,
            "node_budget" => self.strategy.tree.node_budget = parse(key, v)?,
            "priority" => {
                self.strategy.tree.priority = match v {
                    "path-product" => Priority::PathProduct,
                    "edge-value" => Priority::EdgeValue,
                    _ => return Err(Error::Config(format!("bad priority {v:?}"))),
                }
            }
            "renormalize" => self.strategy.tree.select.renormalize = parse(key, v)?,
            "position_objective" => {
                self.strategy.objective = match v {
                    "goal" => PositionObjective::GoalDistance,
                    "nearest-opponent" => PositionObjective::NearestOpponent,
                    _ => return Err(Error::Config(format!("bad position_objective {v:?}"))),
                }
            }
            "voronoi_radius" => self.strategy.voronoi_radius = parse(key, v)?,
            "max_cycles" => self.episode.max_cycles = parse(key, v)?,
            "replan_interval" => self.episode.replan_interval = parse(key, v)?,
            "dribble_speed" => self.episode.dribble_speed = parse(key, v)?,
            "mark_distance" => self.episode.mark_distance = parse(key, v)?,
            "marker_lag" => self.episode.marker_lag = parse(key, v)?,
            "tackle_probability" => self.episode.tackle_probability = parse(key, v)?,
            "kick_angle_noise" => self.episode.kick_angle_noise = parse(key, v)?,
            "kick_speed_noise" => self.episode.kick_speed_noise = parse(key, v)?,
            "shot_range" => self.episode.shot_range = parse(key, v)?,
            "press_distance" => self.episode.press_distance = parse(key, v)?,
            "kick_horizon" => self.episode.kick_horizon = parse(key, v)?,
            "teammate_spread" => self.scenario.teammate_spread = parse(key, v)?,
            "opponent_spread" => self.scenario.opponent_spread = parse(key, v)?,
            "velocity_spread" => self.scenario.velocity_spread = parse(key, v)?,
            "ball_x" => self.scenario.ball_x = parse(key, v)?,
            "ball_y" => self.scenario.ball_y = parse(key, v)?,
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    pub fn check(&self) -> Result<()> {
        let ph = &self.physics;
        let positive = [
            ("field_length", ph.field.length),
            ("field_width", ph.field.width),
            ("kickable_margin", ph.kickable_margin),
            ("ball_max_speed", ph.ball_max_speed),
            ("player_max_speed", ph.player_max_speed),
            ("pass_speed", ph.pass_speed),
            ("dribble_speed", self.episode.dribble_speed),
        ];
        for (k, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{k} must be > 0")));
            }
        }
        if !(ph.ball_decay > 0.0 && ph.ball_decay <= 1.0) {
            return Err(Error::Config("ball_decay must be in (0, 1]".into()));
        }
        if ph.pass_speed > ph.ball_max_speed {
            return Err(Error::Config("pass_speed exceeds ball_max_speed".into()));
        }
        if self.strategy.tree.node_budget == 0 {
            return Err(Error::Config("node_budget must be >= 1".into()));
        }
        self.train.check()
    }

    /// Every key with its current value, in documentation order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let ph = &self.physics;
        let st = &self.strategy;
        let ep = &self.episode;
        let sc = &self.scenario;
        vec![
            ("field_length", ph.field.length.to_string()),
            ("field_width", ph.field.width.to_string()),
            ("kickable_margin", ph.kickable_margin.to_string()),
            ("ball_max_speed", ph.ball_max_speed.to_string()),
            ("player_max_speed", ph.player_max_speed.to_string()),
            ("ball_decay", ph.ball_decay.to_string()),
            ("pass_speed", ph.pass_speed.to_string()),
            ("horizon", ph.horizon.to_string()),
            ("reaction_delay", ph.reaction_delay.to_string()),
            ("learning_rate", self.train.learning_rate.to_string()),
            ("batch_size", self.train.batch_size.to_string()),
            ("epochs", self.train.epochs.to_string()),
            ("l2", self.train.l2.to_string()),
            ("node_budget", st.tree.node_budget.to_string()),
            (
                "priority",
                match st.tree.priority {
                    Priority::PathProduct => "path-product",
                    Priority::EdgeValue => "edge-value",
                }
                .to_string(),
            ),
            ("renormalize", st.tree.select.renormalize.to_string()),
            (
                "position_objective",
                match st.objective {
                    PositionObjective::GoalDistance => "goal",
                    PositionObjective::NearestOpponent => "nearest-opponent",
                }
                .to_string(),
            ),
            ("voronoi_radius", st.voronoi_radius.to_string()),
            ("max_cycles", ep.max_cycles.to_string()),
            ("replan_interval", ep.replan_interval.to_string()),
            ("dribble_speed", ep.dribble_speed.to_string()),
            ("mark_distance", ep.mark_distance.to_string()),
            ("marker_lag", ep.marker_lag.to_string()),
            ("tackle_probability", ep.tackle_probability.to_string()),
            ("kick_angle_noise", ep.kick_angle_noise.to_string()),
            ("kick_speed_noise", ep.kick_speed_noise.to_string()),
            ("shot_range", ep.shot_range.to_string()),
            ("press_distance", ep.press_distance.to_string()),
            ("kick_horizon", ep.kick_horizon.to_string()),
            ("teammate_spread", sc.teammate_spread.to_string()),
            ("opponent_spread", sc.opponent_spread.to_string()),
            ("velocity_spread", sc.velocity_spread.to_string()),
            ("ball_x", sc.ball_x.to_string()),
            ("ball_y", sc.ball_y.to_string()),
        ]
    }

    pub fn to_text(&self) -> String {
        self.entries()
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }
}
