//! One possession played out cycle by cycle against man-marking opponents.
//!
//! The ball owner passes to the predictor's favourite receiver when the pass
//! simulation says it arrives and the pass either gains ground toward the
//! opponent goal or the owner is under pressure; otherwise it dribbles toward
//! the goal. Kicks carry seeded direction and speed noise. Off-ball teammates
//! move toward the targets of the unmarking chain under test; opponents
//! shadow their assigned attacker from the ball side and press the owner.
//! Markers react to where attackers were `marker_lag` cycles ago, so quick
//! off-ball movement can open space.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::motion::{ball_path, intercept_on_path, simulate_pass, Contest, PassSpec};
use crate::predictor::{ranked_receivers, PassPredictor, UnumSet};
use crate::strategies::{compose, StrategyChain, StrategyConfig, UnmarkContext};
use crate::world::{validate, GameState, Physics, Side, Vec2, TEAM_SIZE};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Interception,
    OutOfField,
    Shot,
    Timeout,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EpisodeResult {
    pub passes_attempted: u32,
    pub passes_completed: u32,
    pub possession_cycles: u32,
    pub shot_opportunities: u32,
    pub termination: Termination,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeConfig {
    pub max_cycles: u32,
    /// Off-ball targets are recomputed every this many cycles.
    pub replan_interval: u32,
    /// Owner speed while dribbling, m/cycle.
    pub dribble_speed: f64,
    /// Gap a marker keeps between its attacker and the ball, meters.
    pub mark_distance: f64,
    /// Cycles between an attacker moving and its marker reacting.
    pub marker_lag: u32,
    /// Chance per cycle that an opponent within the kickable margin of the
    /// dribbling owner wins the ball.
    pub tackle_probability: f64,
    /// Standard deviation of the kick direction, radians.
    pub kick_angle_noise: f64,
    /// Standard deviation of the relative kick speed error.
    pub kick_speed_noise: f64,
    /// Ball this close to the opponent goal counts as a shot opportunity.
    pub shot_range: f64,
    /// An opponent this close to the owner makes it pass even backward.
    pub press_distance: f64,
    /// Cycles simulated for a kicked ball.
    pub kick_horizon: u32,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        Self {
            max_cycles: 150,
            replan_interval: 1,
            dribble_speed: 0.6,
            mark_distance: 1.0,
            marker_lag: 2,
            tackle_probability: 0.3,
            kick_angle_noise: 0.05,
            kick_speed_noise: 0.05,
            shot_range: 20.0,
            press_distance: 5.0,
            kick_horizon: 200,
        }
    }
}

/// Greedy matching of opponents to teammates, closest pairs first. Entry
/// `i` is the teammate unum marked by opponent slot `i`.
pub fn assign_markers(state: &GameState) -> Vec<Option<u8>> {
    let mut pairs = Vec::with_capacity(TEAM_SIZE * TEAM_SIZE);
    for (oi, o) in state.opponents.iter().enumerate() {
        for t in &state.teammates {
            pairs.push((o.pos.dist(t.pos), oi, t.unum));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut out = vec![None; state.opponents.len()];
    let mut taken = UnumSet::new();
    for (_, oi, u) in pairs {
        if out[oi].is_none() && !taken.contains(u) {
            out[oi] = Some(u);
            taken.insert(u);
        }
    }
    out
}

fn move_player(p: &mut crate::world::PlayerState, target: Vec2, speed: f64, physics: &Physics) {
    let next = p.pos.step_toward(target, speed.min(p.max_speed));
    let hx = physics.field.length / 2.0;
    let hy = physics.field.width / 2.0;
    let next = Vec2::new(next.x.clamp(-hx, hx), next.y.clamp(-hy, hy));
    p.vel = next - p.pos;
    p.pos = next;
}

/// Teammate positions of recent cycles, newest last.
struct Sightings {
    past: VecDeque<Vec<Vec2>>,
    lag: usize,
}

impl Sightings {
    fn new(state: &GameState, lag: u32) -> Self {
        let mut past = VecDeque::with_capacity(lag as usize + 1);
        past.push_back(state.teammates.iter().map(|p| p.pos).collect());
        Self {
            past,
            lag: lag as usize,
        }
    }

    fn record(&mut self, state: &GameState) {
        self.past.push_back(state.teammates.iter().map(|p| p.pos).collect());
        while self.past.len() > self.lag + 1 {
            self.past.pop_front();
        }
    }

    /// The state as markers see it: teammates at their lagged positions.
    fn observed(&self, state: &GameState) -> GameState {
        let mut s = state.clone();
        let old = self.past.front().expect("never empty");
        for (p, &pos) in s.teammates.iter_mut().zip(old) {
            p.pos = pos;
        }
        s
    }
}

/// One cycle of off-ball movement: opponents mark, teammates other than the
/// owner head for their targets (or stand still).
fn step_off_ball(
    state: &mut GameState,
    targets: &[Option<Vec2>; TEAM_SIZE],
    seen: &mut Sightings,
    cfg: &EpisodeConfig,
    physics: &Physics,
) {
    let view = seen.observed(state);
    let marks = assign_markers(&view);
    let ball = state.ball.pos;
    let owner = state.ball_owner;
    let goals: Vec<Vec2> = marks
        .iter()
        .zip(&state.opponents)
        .map(|(m, o)| match m.and_then(|u| view.teammate(u)) {
            Some(t) if Some(t.unum) == owner => ball,
            Some(t) => t.pos + (ball - t.pos).normalized() * cfg.mark_distance,
            None => o.pos,
        })
        .collect();
    for (o, g) in state.opponents.iter_mut().zip(goals) {
        move_player(o, g, o.max_speed, physics);
    }
    for t in state.teammates.iter_mut() {
        if Some(t.unum) == owner {
            continue;
        }
        match targets.get(t.unum as usize - 1).copied().flatten() {
            Some(goal) => move_player(t, goal, t.max_speed, physics),
            None => t.vel = Vec2::ZERO,
        }
    }
    seen.record(state);
}

fn plan_targets(
    state: &GameState,
    chain: &StrategyChain,
    predictor: &dyn PassPredictor,
    strategy: &StrategyConfig,
    physics: &Physics,
) -> Result<[Option<Vec2>; TEAM_SIZE]> {
    let mut out = [None; TEAM_SIZE];
    if chain.is_empty() {
        return Ok(out);
    }
    let ctx = UnmarkContext::new(state, predictor, strategy, physics);
    for t in &state.teammates {
        if Some(t.unum) == state.ball_owner {
            continue;
        }
        if let Some(plan) = compose(chain, &ctx, t.unum)? {
            out[t.unum as usize - 1] = Some(plan.point);
        }
    }
    Ok(out)
}

/// Plays one possession from `initial`. The ball starts at the owner's feet.
#[allow(clippy::too_many_arguments)]
pub fn run_episode(
    initial: &GameState,
    chain: &StrategyChain,
    predictor: &dyn PassPredictor,
    strategy: &StrategyConfig,
    cfg: &EpisodeConfig,
    physics: &Physics,
    seed: u64,
) -> Result<EpisodeResult> {
    let report = validate(initial, physics);
    if !report.is_valid() {
        return Err(Error::InvalidState(report.to_string()));
    }
    let mut s = initial.clone();
    let owner_pos = s.owner()?.pos;
    s.ball.pos = owner_pos;
    s.ball.vel = Vec2::ZERO;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let angle_noise = Normal::new(0.0, cfg.kick_angle_noise.max(0.0))
        .map_err(|e| Error::Config(e.to_string()))?;
    let speed_noise = Normal::new(0.0, cfg.kick_speed_noise.max(0.0))
        .map_err(|e| Error::Config(e.to_string()))?;

    let mut res = EpisodeResult {
        passes_attempted: 0,
        passes_completed: 0,
        possession_cycles: 0,
        shot_opportunities: 0,
        termination: Termination::Timeout,
    };
    let mut targets = [None; TEAM_SIZE];
    let mut since_plan = u32::MAX;
    let goal = physics.field.opp_goal;
    let mut seen = Sightings::new(&s, cfg.marker_lag);

    while res.possession_cycles < cfg.max_cycles {
        if s.ball.pos.dist(goal) <= cfg.shot_range {
            res.shot_opportunities += 1;
            res.termination = Termination::Shot;
            return Ok(res);
        }
        if since_plan >= cfg.replan_interval.max(1) {
            targets = plan_targets(&s, chain, predictor, strategy, physics)?;
            since_plan = 0;
        }
        let owner = s.ball_owner.expect("possession implies an owner");
        let owner_pos = s.teammate(owner).expect("owner exists").pos;
        let pressed = s
            .opponents
            .iter()
            .any(|o| o.pos.dist(owner_pos) <= cfg.press_distance);

        let probs = predictor.pass_probabilities(&s)?;
        let choice = ranked_receivers(&probs, owner, UnumSet::new()).first().copied();
        let safe_pass = choice.and_then(|(receiver, _)| {
            let to = s.teammate(receiver)?.pos;
            if to == s.ball.pos || (!pressed && to.dist(goal) >= owner_pos.dist(goal)) {
                return None;
            }
            let spec = PassSpec::new(s.ball.pos, to, physics.pass_speed);
            let contest = Contest {
                kicker: Some(owner),
                receiver_hint: Some(receiver),
            };
            let r = simulate_pass(&s, &spec, contest, physics).ok()?;
            r.is_teammate(receiver).then_some(to)
        });

        match safe_pass {
            Some(to) => {
                let dir = (to - s.ball.pos).angle() + angle_noise.sample(&mut rng);
                let speed = (physics.pass_speed * (1.0 + speed_noise.sample(&mut rng)))
                    .clamp(0.1, physics.ball_max_speed);
                let path = ball_path(s.ball.pos, Vec2::polar(speed, dir), cfg.kick_horizon, physics);
                let contest = Contest {
                    kicker: Some(owner),
                    receiver_hint: None,
                };
                let r = intercept_on_path(&s, &path, contest, physics);
                let flight = r.cycle.max(1);
                let remaining = cfg.max_cycles - res.possession_cycles;
                if flight > remaining {
                    res.possession_cycles = cfg.max_cycles;
                    break;
                }
                res.passes_attempted += 1;
                // Everyone else keeps moving while the ball travels.
                for _ in 0..flight {
                    step_off_ball(&mut s, &targets, &mut seen, cfg, physics);
                }
                since_plan += flight;
                res.possession_cycles += flight;
                s.cycle += flight;
                match r.receiver {
                    Some((Side::Teammate, u)) => {
                        res.passes_completed += 1;
                        let p = s.teammate_mut(u).expect("receiver exists");
                        p.pos = r.point;
                        p.vel = Vec2::ZERO;
                        s.ball.pos = r.point;
                        s.ball.vel = Vec2::ZERO;
                        s.ball_owner = Some(u);
                    }
                    Some((Side::Opponent, _)) => {
                        res.termination = Termination::Interception;
                        return Ok(res);
                    }
                    None => {
                        res.termination = Termination::OutOfField;
                        return Ok(res);
                    }
                }
            }
            None => {
                let dribble_to = owner_pos + (goal - owner_pos).normalized() * cfg.dribble_speed;
                let p = s.teammate_mut(owner).expect("owner exists");
                move_player(p, dribble_to, cfg.dribble_speed, physics);
                let (pos, vel) = (p.pos, p.vel);
                s.ball.pos = pos;
                s.ball.vel = vel;
                step_off_ball(&mut s, &targets, &mut seen, cfg, physics);
                since_plan += 1;
                res.possession_cycles += 1;
                s.cycle += 1;
                let ball = s.ball.pos;
                let contested = s
                    .opponents
                    .iter()
                    .any(|o| o.pos.dist(ball) <= physics.kickable_margin);
                if contested && rng.random_bool(cfg.tackle_probability.clamp(0.0, 1.0)) {
                    res.termination = Termination::Interception;
                    return Ok(res);
                }
            }
        }
    }
    res.termination = Termination::Timeout;
    Ok(res)
}
