//! Feature extraction, labeling and the on-disk dataset format.
//!
//! A feature vector is the ball block followed by eleven teammates in
//! uniform-number order and eleven opponents sorted by x. Values are stored
//! as `f32`, which the nine-significant-digit CSV encoding reproduces exactly.

use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::motion::{simulate_pass, Contest, PassSpec};
use crate::world::{validate, GameState, Physics, PlayerState, Vec2, TEAM_SIZE};

pub const BALL_FEATURES: usize = 4;
pub const PLAYER_FEATURES: usize = 8;
pub const FEATURE_DIM: usize = BALL_FEATURES + 2 * TEAM_SIZE * PLAYER_FEATURES;
pub const SCHEMA_TAG: &str = "schema=v1";

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(pub Vec<f32>);

impl FeatureVector {
    pub fn as_slice(&self) -> &[f32] {
        &self.0
    }

    /// Features of one player block; `slot` 0..11 are teammates, 11..22
    /// opponents.
    pub fn player(&self, slot: usize) -> &[f32] {
        let start = BALL_FEATURES + slot * PLAYER_FEATURES;
        &self.0[start..start + PLAYER_FEATURES]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub features: FeatureVector,
    /// Uniform number of the best pass target.
    pub label: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SortOrder {
    pub teammate_order: [u8; TEAM_SIZE],
    pub opponent_order: [u8; TEAM_SIZE],
}

/// Teammates by uniform number; opponents by ascending x, then unum.
pub fn sort_players(state: &GameState) -> SortOrder {
    let order = |list: &[PlayerState], by_x: bool| {
        let mut v: Vec<&PlayerState> = list.iter().collect();
        if by_x {
            v.sort_by(|a, b| a.pos.x.total_cmp(&b.pos.x).then(a.unum.cmp(&b.unum)));
        } else {
            v.sort_by_key(|p| p.unum);
        }
        let mut out = [0u8; TEAM_SIZE];
        for (slot, p) in out.iter_mut().zip(v) {
            *slot = p.unum;
        }
        out
    };
    SortOrder {
        teammate_order: order(&state.teammates, false),
        opponent_order: order(&state.opponents, true),
    }
}

fn push_player(out: &mut Vec<f32>, p: &PlayerState, ball: Vec2, goal: Vec2, owner: bool) {
    let rel = p.pos - ball;
    out.extend_from_slice(&[
        p.pos.x as f32,
        p.pos.y as f32,
        p.vel.x as f32,
        p.vel.y as f32,
        rel.norm() as f32,
        rel.angle() as f32,
        p.pos.dist(goal) as f32,
        if owner { 1.0 } else { 0.0 },
    ]);
}

pub fn extract_features(state: &GameState, physics: &Physics) -> Result<FeatureVector> {
    let owner = state.ball_owner.ok_or(Error::NoBallOwner)?;
    if state.teammates.len() != TEAM_SIZE || state.opponents.len() != TEAM_SIZE {
        return Err(Error::InvalidState("expected 11 players per side".into()));
    }
    state.teammate(owner).ok_or(Error::UnknownUnum(owner))?;
    let order = sort_players(state);
    let ball = state.ball.pos;
    let goal = physics.field.opp_goal;
    let mut out = Vec::with_capacity(FEATURE_DIM);
    out.extend_from_slice(&[
        ball.x as f32,
        ball.y as f32,
        state.ball.vel.x as f32,
        state.ball.vel.y as f32,
    ]);
    for u in order.teammate_order {
        let p = state.teammate(u).ok_or(Error::UnknownUnum(u))?;
        push_player(&mut out, p, ball, goal, u == owner);
    }
    for u in order.opponent_order {
        let p = state.opponent(u).ok_or(Error::UnknownUnum(u))?;
        push_player(&mut out, p, ball, goal, false);
    }
    debug_assert_eq!(out.len(), FEATURE_DIM);
    Ok(FeatureVector(out))
}

/// Weights of the geometric pass-target scorer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabelWeights {
    pub open: f64,
    pub progress: f64,
    pub feasible: f64,
}

impl Default for LabelWeights {
    fn default() -> Self {
        Self {
            open: 1.0,
            progress: 0.5,
            feasible: 1.0,
        }
    }
}

/// Score of a pass from the ball to teammate `target`: how open the lane is,
/// how much ground it gains, and whether the receiver wins the race.
pub fn pass_score(
    state: &GameState,
    owner: u8,
    target: &PlayerState,
    weights: &LabelWeights,
    physics: &Physics,
) -> f64 {
    let ball = state.ball.pos;
    let open = state
        .opponents
        .iter()
        .map(|o| o.pos.dist_to_segment(ball, target.pos))
        .fold(f64::INFINITY, f64::min)
        .clamp(0.0, 10.0);
    let progress = (target.pos.x - ball.x).clamp(-10.0, 10.0);
    let spec = PassSpec::new(ball, target.pos, physics.pass_speed);
    let contest = Contest {
        kicker: Some(owner),
        receiver_hint: Some(target.unum),
    };
    let feasible = match simulate_pass(state, &spec, contest, physics) {
        Ok(r) if r.is_teammate(target.unum) => 10.0,
        _ => 0.0,
    };
    weights.open * open + weights.progress * progress + weights.feasible * feasible
}

/// Scores indexed by `unum - 1`; `None` for the ball owner.
pub fn heuristic_scores(
    state: &GameState,
    weights: &LabelWeights,
    physics: &Physics,
) -> Result<[Option<f64>; TEAM_SIZE]> {
    let owner = state.ball_owner.ok_or(Error::NoBallOwner)?;
    let mut scores = [None; TEAM_SIZE];
    for p in &state.teammates {
        if p.unum != owner && (1..=TEAM_SIZE as u8).contains(&p.unum) {
            scores[p.unum as usize - 1] = Some(pass_score(state, owner, p, weights, physics));
        }
    }
    Ok(scores)
}

/// Best pass target by the geometric scorer; ties go to the lower unum.
pub fn heuristic_label(state: &GameState, physics: &Physics) -> Result<u8> {
    let scores = heuristic_scores(state, &LabelWeights::default(), physics)?;
    let mut best: Option<(u8, f64)> = None;
    for (i, s) in scores.iter().enumerate() {
        if let Some(s) = *s {
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((i as u8 + 1, s));
            }
        }
    }
    best.map(|(u, _)| u)
        .ok_or_else(|| Error::InvalidState("no eligible pass target".into()))
}

#[derive(Debug, Clone, Default)]
pub struct Dataset {
    pub samples: Vec<LabeledSample>,
    /// States rejected by validation.
    pub skipped: usize,
}

fn label_state(state: &GameState, physics: &Physics) -> Result<LabeledSample> {
    let report = validate(state, physics);
    if !report.is_valid() {
        return Err(Error::InvalidState(report.to_string()));
    }
    Ok(LabeledSample {
        features: extract_features(state, physics)?,
        label: heuristic_label(state, physics)?,
    })
}

/// One sample per valid state (two with mirror augmentation), in input
/// order. Runs data-parallel; the merge keeps input order.
pub fn build_dataset(states: &[GameState], augment_mirror: bool, physics: &Physics) -> Dataset {
    let per_state: Vec<Option<Vec<LabeledSample>>> = states
        .par_iter()
        .map(|s| {
            let mut out = vec![label_state(s, physics).ok()?];
            if augment_mirror {
                out.push(label_state(&crate::world::mirror(s), physics).ok()?);
            }
            Some(out)
        })
        .collect();
    let mut ds = Dataset::default();
    for item in per_state {
        match item {
            Some(v) => ds.samples.extend(v),
            None => ds.skipped += 1,
        }
    }
    ds
}

/// Seeded shuffle, then the first `round(fraction * n)` samples train.
pub fn split_dataset<T: Clone>(
    samples: &[T],
    train_fraction: f64,
    seed: u64,
) -> Result<(Vec<T>, Vec<T>)> {
    if samples.len() < 2 {
        return Err(Error::InvalidState(format!(
            "need at least 2 samples to split, got {}",
            samples.len()
        )));
    }
    if !(0.0..=1.0).contains(&train_fraction) {
        return Err(Error::Config(format!("train fraction {train_fraction} not in [0, 1]")));
    }
    let mut idx: Vec<usize> = (0..samples.len()).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_train = (train_fraction * samples.len() as f64).round() as usize;
    let pick = |ids: &[usize]| ids.iter().map(|&i| samples[i].clone()).collect::<Vec<_>>();
    Ok((pick(&idx[..n_train]), pick(&idx[n_train..])))
}

// ---- CSV ----

pub fn csv_header() -> String {
    let mut h = format!("{SCHEMA_TAG},label");
    for i in 0..FEATURE_DIM {
        h.push_str(&format!(",f{i:03}"));
    }
    h
}

pub fn write_csv<W: Write>(mut out: W, samples: &[LabeledSample]) -> Result<()> {
    writeln!(out, "{}", csv_header())?;
    let mut line = String::new();
    for s in samples {
        line.clear();
        // Leading empty field sits under the schema column.
        line.push_str(&format!(",{}", s.label));
        for v in s.features.as_slice() {
            line.push_str(&format!(",{v:.8e}"));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn read_csv<R: BufRead>(input: R) -> Result<Vec<LabeledSample>> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty dataset".into()))??;
    if header.trim_end() != csv_header() {
        let tag = header.split(',').next().unwrap_or("");
        return Err(Error::Parse(format!("unsupported dataset header ({tag})")));
    }
    let mut samples = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row = i + 2;
        let mut fields = line.trim_end().split(',').skip(1);
        let label: u8 = fields
            .next()
            .and_then(|f| f.parse().ok())
            .ok_or_else(|| Error::Parse(format!("row {row}: bad label")))?;
        if !(1..=TEAM_SIZE as u8).contains(&label) {
            return Err(Error::Parse(format!("row {row}: label {label} out of range")));
        }
        let values = fields
            .map(|f| f.parse::<f32>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse(format!("row {row}: {e}")))?;
        if values.len() != FEATURE_DIM {
            return Err(Error::Parse(format!(
                "row {row}: expected {FEATURE_DIM} features, got {}",
                values.len()
            )));
        }
        samples.push(LabeledSample {
            features: FeatureVector(values),
            label,
        });
    }
    Ok(samples)
}
