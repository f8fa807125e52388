//! Pass-target prediction: a probability for each teammate receiving the
//! next pass, and the masked top-two selection that turns those
//! probabilities into hypothetical successor states.

pub mod mlp;

use std::fmt;

use crate::error::{Error, Result};
use crate::extractor::{
    extract_features, heuristic_scores, FeatureVector, LabelWeights, BALL_FEATURES,
    PLAYER_FEATURES,
};
use crate::motion::{ball_trajectory, fast_forward, simulate_pass, Contest, PassSpec};
use crate::world::{GameState, Physics, Vec2, TEAM_SIZE};

pub use mlp::{EpochStats, Examples, MlpModel, TrainConfig, PASS_DIMS};

/// Set of teammate uniform numbers.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct UnumSet(u16);

impl UnumSet {
    pub fn new() -> Self {
        Self(0)
    }

    pub fn insert(&mut self, unum: u8) {
        self.0 |= 1 << unum;
    }

    pub fn contains(&self, unum: u8) -> bool {
        unum < 16 && self.0 & (1 << unum) != 0
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = u8> + '_ {
        (0..16u8).filter(|u| self.contains(*u))
    }
}

impl FromIterator<u8> for UnumSet {
    fn from_iter<I: IntoIterator<Item = u8>>(iter: I) -> Self {
        let mut s = Self::new();
        for u in iter {
            s.insert(u);
        }
        s
    }
}

impl fmt::Debug for UnumSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Anything that can say how likely each teammate is to receive the ball
/// owner's next pass. Index `i` is teammate `i + 1`.
pub trait PassPredictor: Sync {
    fn pass_probabilities(&self, state: &GameState) -> Result<[f64; TEAM_SIZE]>;
}

impl<T: PassPredictor + ?Sized> PassPredictor for &T {
    fn pass_probabilities(&self, state: &GameState) -> Result<[f64; TEAM_SIZE]> {
        (**self).pass_probabilities(state)
    }
}

const LENGTH_SCALE: f64 = 1.0 / 20.0;

/// Network input for a feature vector: lengths in units of 20 m, angles in
/// units of pi, velocities and flags unchanged.
pub fn encode_input(features: &FeatureVector) -> Vec<f64> {
    let f = features.as_slice();
    let mut out = Vec::with_capacity(f.len());
    for (i, &v) in f.iter().enumerate() {
        let v = f64::from(v);
        let scale = if i < BALL_FEATURES {
            if i < 2 {
                LENGTH_SCALE
            } else {
                1.0
            }
        } else {
            match (i - BALL_FEATURES) % PLAYER_FEATURES {
                0 | 1 | 4 | 6 => LENGTH_SCALE,
                5 => std::f64::consts::FRAC_1_PI,
                _ => 1.0,
            }
        };
        out.push(v * scale);
    }
    out
}

/// Builds training examples from labeled samples (label `u` -> class `u-1`).
pub fn examples_from_samples(samples: &[crate::extractor::LabeledSample]) -> Examples {
    let dim = samples.first().map_or(PASS_DIMS[0], |s| s.features.0.len());
    let mut flat = Vec::with_capacity(samples.len() * dim);
    for s in samples {
        flat.extend(encode_input(&s.features));
    }
    Examples {
        inputs: ndarray::Array2::from_shape_vec((samples.len(), dim), flat)
            .expect("uniform feature length"),
        labels: samples.iter().map(|s| s.label as usize - 1).collect(),
    }
}

/// The trained network behind the predictor interface.
#[derive(Debug, Clone)]
pub struct MlpPredictor {
    pub model: MlpModel,
    pub physics: Physics,
}

impl PassPredictor for MlpPredictor {
    fn pass_probabilities(&self, state: &GameState) -> Result<[f64; TEAM_SIZE]> {
        let f = extract_features(state, &self.physics)?;
        let p = self.model.forward(&encode_input(&f))?;
        if p.len() != TEAM_SIZE {
            return Err(Error::DimensionMismatch {
                expected: TEAM_SIZE,
                got: p.len(),
            });
        }
        let mut out = [0.0; TEAM_SIZE];
        out.copy_from_slice(&p);
        Ok(out)
    }
}

/// Softmax over the geometric pass scores; the ball owner gets zero. Lets
/// everything downstream run without a trained network.
#[derive(Debug, Clone)]
pub struct HeuristicPredictor {
    pub weights: LabelWeights,
    pub temperature: f64,
    pub physics: Physics,
}

impl HeuristicPredictor {
    pub fn new(physics: Physics) -> Self {
        Self {
            weights: LabelWeights::default(),
            temperature: 1.0,
            physics,
        }
    }
}

impl PassPredictor for HeuristicPredictor {
    fn pass_probabilities(&self, state: &GameState) -> Result<[f64; TEAM_SIZE]> {
        let scores = heuristic_scores(state, &self.weights, &self.physics)?;
        let m = scores.iter().flatten().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let mut out = [0.0; TEAM_SIZE];
        let mut sum = 0.0;
        for (o, s) in out.iter_mut().zip(&scores) {
            if let Some(s) = s {
                *o = ((s - m) / self.temperature).exp();
                sum += *o;
            }
        }
        if sum > 0.0 {
            out.iter_mut().for_each(|o| *o /= sum);
        }
        Ok(out)
    }
}

/// A candidate pass, the state it leads to and its probability.
#[derive(Debug, Clone, PartialEq)]
pub struct PassStateValue {
    pub passer: u8,
    pub receiver: u8,
    pub outcome: GameState,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SelectOptions {
    /// Rescale values over the eligible receivers instead of reporting raw
    /// probabilities.
    pub renormalize: bool,
}

/// Eligible receivers ordered by probability (ties to the lower unum).
/// Zero-probability receivers are not candidates.
pub fn ranked_receivers(
    probs: &[f64; TEAM_SIZE],
    owner: u8,
    ignored: UnumSet,
) -> Vec<(u8, f64)> {
    let mut v: Vec<(u8, f64)> = (1..=TEAM_SIZE as u8)
        .filter(|&u| u != owner && !ignored.contains(u))
        .map(|u| (u, probs[u as usize - 1]))
        .filter(|&(_, p)| p > 0.0)
        .collect();
    v.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    v
}

/// State after a straight pass from the ball to `receiver`'s current spot.
/// When the receiver would not win the ball the pass is still assumed to
/// arrive: the ball is carried to the receiver after its travel time.
pub fn pass_outcome(
    state: &GameState,
    passer: u8,
    receiver: u8,
    physics: &Physics,
) -> Result<GameState> {
    let target = state.teammate(receiver).ok_or(Error::UnknownUnum(receiver))?.pos;
    let start = state.ball.pos;
    if start == target {
        let mut s = state.clone();
        s.ball.vel = Vec2::ZERO;
        s.ball_owner = Some(receiver);
        return Ok(s);
    }
    let spec = PassSpec::new(start, target, physics.pass_speed);
    let contest = Contest {
        kicker: Some(passer),
        receiver_hint: Some(receiver),
    };
    let r = simulate_pass(state, &spec, contest, physics)?;
    if r.is_teammate(receiver) {
        return fast_forward(state, &r);
    }
    let travel = ball_trajectory(&spec, physics.horizon, physics).len().saturating_sub(1);
    let mut s = state.clone();
    s.cycle += travel as u32;
    s.ball.pos = target;
    s.ball.vel = Vec2::ZERO;
    s.ball_owner = Some(receiver);
    Ok(s)
}

/// The two most likely receivers that are neither ignored nor the ball
/// owner, each with its outcome state.
pub fn predict_targets<P: PassPredictor + ?Sized>(
    predictor: &P,
    state: &GameState,
    ignored: UnumSet,
    options: SelectOptions,
    physics: &Physics,
) -> Result<Vec<PassStateValue>> {
    let owner = state.ball_owner.ok_or(Error::NoBallOwner)?;
    let probs = predictor.pass_probabilities(state)?;
    let ranked = ranked_receivers(&probs, owner, ignored);
    let norm = if options.renormalize {
        ranked.iter().map(|r| r.1).sum::<f64>()
    } else {
        1.0
    };
    ranked
        .into_iter()
        .take(2)
        .map(|(receiver, p)| {
            Ok(PassStateValue {
                passer: owner,
                receiver,
                outcome: pass_outcome(state, owner, receiver, physics)?,
                value: (p / norm).clamp(0.0, 1.0),
            })
        })
        .collect()
}
