//! Ball travel and player interception.
//!
//! The ball decays geometrically each cycle; players are point agents that
//! move at their max speed after a fixed reaction delay and control the ball
//! once within the kickable margin.

use crate::error::{Error, Result};
use crate::world::{GameState, Physics, PlayerState, Side, Vec2};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PassSpec {
    pub start: Vec2,
    pub target: Vec2,
    pub speed: f64,
}

impl PassSpec {
    pub fn new(start: Vec2, target: Vec2, speed: f64) -> Self {
        Self {
            start,
            target,
            speed,
        }
    }

    pub fn check(&self, physics: &Physics) -> Result<()> {
        if !(self.start.is_finite() && self.target.is_finite() && self.speed.is_finite()) {
            return Err(Error::InvalidPass("non-finite pass".into()));
        }
        if !(self.speed > 0.0 && self.speed <= physics.ball_max_speed) {
            return Err(Error::InvalidPass(format!(
                "speed {} outside (0, {}]",
                self.speed, physics.ball_max_speed
            )));
        }
        if self.start == self.target {
            return Err(Error::InvalidPass("start equals target".into()));
        }
        Ok(())
    }
}

/// Distance travelled `k` cycles after a kick at `speed`.
pub fn ball_displacement(speed: f64, k: u32, decay: f64) -> f64 {
    if decay == 1.0 {
        speed * f64::from(k)
    } else {
        speed * (1.0 - decay.powi(k as i32)) / (1.0 - decay)
    }
}

/// Ball positions at cycles `0..` of a kick from `start` with velocity
/// `vel`. Stops before the ball leaves the field, after `horizon` cycles, or
/// once the travelled distance reaches `limit` (that last position is clamped
/// onto the limit).
fn path(start: Vec2, vel: Vec2, limit: Option<f64>, horizon: u32, physics: &Physics) -> Vec<Vec2> {
    let speed = vel.norm();
    let dir = vel.normalized();
    let mut out = vec![start];
    for k in 1..=horizon {
        let d = ball_displacement(speed, k, physics.ball_decay);
        if let Some(limit) = limit {
            if d >= limit {
                let p = start + dir * limit;
                if physics.field.contains(p) {
                    out.push(p);
                }
                break;
            }
        }
        let p = start + dir * d;
        if !physics.field.contains(p) {
            break;
        }
        out.push(p);
    }
    out
}

/// Positions of a pass ball, index = cycles after the kick. The trajectory
/// ends at the target (the ball arrives there) or earlier at the field edge.
pub fn ball_trajectory(spec: &PassSpec, horizon: u32, physics: &Physics) -> Vec<Vec2> {
    let dist = spec.start.dist(spec.target);
    let vel = (spec.target - spec.start).normalized() * spec.speed;
    let mut traj = path(spec.start, vel, Some(dist), horizon, physics);
    // Clamp lands exactly on the target rather than on start + dir * dist.
    let n = traj.len();
    if let Some(last) = traj.last_mut() {
        if n > 1 && last.dist(spec.target) < 1e-9 {
            *last = spec.target;
        }
    }
    traj
}

/// Positions of a free-rolling ball with the given velocity.
pub fn ball_path(start: Vec2, vel: Vec2, horizon: u32, physics: &Physics) -> Vec<Vec2> {
    path(start, vel, None, horizon, physics)
}

pub fn cycles_to_reach(player: &PlayerState, point: Vec2, physics: &Physics) -> u32 {
    let gap = (player.pos.dist(point) - physics.kickable_margin).max(0.0);
    (gap / player.max_speed).ceil() as u32 + physics.reaction_delay
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterceptResult {
    /// Who gets the ball first, if anyone.
    pub receiver: Option<(Side, u8)>,
    /// Cycles after the kick.
    pub cycle: u32,
    pub point: Vec2,
}

impl InterceptResult {
    pub fn intercepted(&self) -> bool {
        self.receiver.is_some()
    }

    pub fn is_teammate(&self, unum: u8) -> bool {
        self.receiver == Some((Side::Teammate, unum))
    }
}

/// Which players may contest the ball.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Contest {
    /// Teammate who kicked; never intercepts its own kick.
    pub kicker: Option<u8>,
    /// When set, the only teammate going for the ball.
    pub receiver_hint: Option<u8>,
}

impl Contest {
    fn eligible(&self, p: &PlayerState) -> bool {
        match p.side {
            Side::Opponent => true,
            Side::Teammate => {
                Some(p.unum) != self.kicker && self.receiver_hint.is_none_or(|h| h == p.unum)
            }
        }
    }
}

/// First player to reach the ball along `traj`. Ties on the cycle go to
/// teammates over opponents, then to the lower uniform number.
pub fn intercept_on_path(
    state: &GameState,
    traj: &[Vec2],
    contest: Contest,
    physics: &Physics,
) -> InterceptResult {
    let mut best: Option<(u32, Side, u8)> = None;
    for p in state.players().filter(|p| contest.eligible(p)) {
        let limit = best.map_or(traj.len(), |(c, _, _)| (c as usize + 1).min(traj.len()));
        let first = (0..limit).find(|&k| cycles_to_reach(p, traj[k], physics) as usize <= k);
        if let Some(k) = first {
            let cand = (k as u32, p.side, p.unum);
            if best.is_none_or(|b| cand < b) {
                best = Some(cand);
            }
        }
    }
    match best {
        Some((cycle, side, unum)) => InterceptResult {
            receiver: Some((side, unum)),
            cycle,
            point: traj[cycle as usize],
        },
        None => {
            let last = traj.len().saturating_sub(1);
            InterceptResult {
                receiver: None,
                cycle: last as u32,
                point: traj.get(last).copied().unwrap_or_default(),
            }
        }
    }
}

pub fn simulate_pass(
    state: &GameState,
    spec: &PassSpec,
    contest: Contest,
    physics: &Physics,
) -> Result<InterceptResult> {
    spec.check(physics)?;
    let traj = ball_trajectory(spec, physics.horizon, physics);
    Ok(intercept_on_path(state, &traj, contest, physics))
}

/// Advance to the moment of interception: ball stopped at the interception
/// point, receiver standing on it, everyone else frozen.
pub fn fast_forward(state: &GameState, result: &InterceptResult) -> Result<GameState> {
    let (side, unum) = result.receiver.ok_or(Error::NotIntercepted)?;
    let mut s = state.clone();
    s.cycle += result.cycle;
    s.ball.pos = result.point;
    s.ball.vel = Vec2::ZERO;
    let p = s.player_mut(side, unum).ok_or(Error::UnknownUnum(unum))?;
    p.pos = result.point;
    p.vel = Vec2::ZERO;
    s.ball_owner = match side {
        Side::Teammate => Some(unum),
        Side::Opponent => None,
    };
    Ok(s)
}
