//! Field geometry, players, ball and whole-game snapshots.
//!
//! Everything is expressed in a canonical frame: our team attacks toward +x,
//! the opponent goal sits at `(+length/2, 0)`. States are plain values; every
//! transformation returns a new state.

use std::fmt;
use std::io::{BufRead, Write};
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of players per side.
pub const TEAM_SIZE: usize = 11;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn polar(radius: f64, angle: f64) -> Self {
        Self::new(radius * angle.cos(), radius * angle.sin())
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Unit vector in the same direction, or zero for the zero vector.
    pub fn normalized(self) -> Vec2 {
        let n = self.norm();
        if n > 0.0 {
            Vec2::new(self.x / n, self.y / n)
        } else {
            Vec2::ZERO
        }
    }

    /// Angle from +x in (-pi, pi].
    pub fn angle(self) -> f64 {
        let a = self.y.atan2(self.x);
        if a == -std::f64::consts::PI {
            std::f64::consts::PI
        } else {
            a
        }
    }

    pub fn mirror_y(self) -> Vec2 {
        Vec2::new(self.x, -self.y)
    }

    /// Distance from `self` to the closed segment `a`-`b`.
    pub fn dist_to_segment(self, a: Vec2, b: Vec2) -> f64 {
        let ab = b - a;
        let len2 = ab.dot(ab);
        if len2 == 0.0 {
            return self.dist(a);
        }
        let t = ((self - a).dot(ab) / len2).clamp(0.0, 1.0);
        self.dist(a + ab * t)
    }

    /// Step from `self` toward `target` by at most `max_step`.
    pub fn step_toward(self, target: Vec2, max_step: f64) -> Vec2 {
        let d = target - self;
        let n = d.norm();
        if n <= max_step || n == 0.0 {
            target
        } else {
            self + d * (max_step / n)
        }
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl fmt::Display for Vec2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:.3}, {:.3})", self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSpec {
    pub length: f64,
    pub width: f64,
    pub our_goal: Vec2,
    pub opp_goal: Vec2,
}

impl FieldSpec {
    pub fn new(length: f64, width: f64) -> Self {
        Self {
            length,
            width,
            our_goal: Vec2::new(-length / 2.0, 0.0),
            opp_goal: Vec2::new(length / 2.0, 0.0),
        }
    }

    pub fn contains(&self, p: Vec2) -> bool {
        self.contains_with_margin(p, 0.0)
    }

    pub fn contains_with_margin(&self, p: Vec2, margin: f64) -> bool {
        p.x.abs() <= self.length / 2.0 + margin && p.y.abs() <= self.width / 2.0 + margin
    }
}

impl Default for FieldSpec {
    fn default() -> Self {
        Self::new(105.0, 68.0)
    }
}

/// Physical constants shared by every module. Defaults follow the usual
/// soccer-simulation server values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Physics {
    pub field: FieldSpec,
    pub kickable_margin: f64,
    pub ball_max_speed: f64,
    pub player_max_speed: f64,
    pub ball_decay: f64,
    pub pass_speed: f64,
    pub horizon: u32,
    pub reaction_delay: u32,
}

impl Default for Physics {
    fn default() -> Self {
        Self {
            field: FieldSpec::default(),
            kickable_margin: 1.085,
            ball_max_speed: 3.0,
            player_max_speed: 1.05,
            ball_decay: 0.94,
            pass_speed: 2.5,
            horizon: 50,
            reaction_delay: 1,
        }
    }
}

/// Allowed distance outside the pitch for player positions.
pub const PLAYER_FIELD_MARGIN: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    Teammate,
    Opponent,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlayerState {
    pub side: Side,
    pub unum: u8,
    pub pos: Vec2,
    pub vel: Vec2,
    pub max_speed: f64,
}

impl PlayerState {
    pub fn new(side: Side, unum: u8, pos: Vec2, max_speed: f64) -> Self {
        Self {
            side,
            unum,
            pos,
            vel: Vec2::ZERO,
            max_speed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BallState {
    pub pos: Vec2,
    pub vel: Vec2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameState {
    pub cycle: u32,
    pub ball: BallState,
    pub teammates: Vec<PlayerState>,
    pub opponents: Vec<PlayerState>,
    pub ball_owner: Option<u8>,
}

impl GameState {
    pub fn teammate(&self, unum: u8) -> Option<&PlayerState> {
        self.teammates.iter().find(|p| p.unum == unum)
    }

    pub fn teammate_mut(&mut self, unum: u8) -> Option<&mut PlayerState> {
        self.teammates.iter_mut().find(|p| p.unum == unum)
    }

    pub fn opponent(&self, unum: u8) -> Option<&PlayerState> {
        self.opponents.iter().find(|p| p.unum == unum)
    }

    pub fn player(&self, side: Side, unum: u8) -> Option<&PlayerState> {
        match side {
            Side::Teammate => self.teammate(unum),
            Side::Opponent => self.opponent(unum),
        }
    }

    pub fn player_mut(&mut self, side: Side, unum: u8) -> Option<&mut PlayerState> {
        let list = match side {
            Side::Teammate => &mut self.teammates,
            Side::Opponent => &mut self.opponents,
        };
        list.iter_mut().find(|p| p.unum == unum)
    }

    pub fn players(&self) -> impl Iterator<Item = &PlayerState> {
        self.teammates.iter().chain(self.opponents.iter())
    }

    /// The ball owner's player record.
    pub fn owner(&self) -> Result<&PlayerState> {
        let unum = self.ball_owner.ok_or(Error::NoBallOwner)?;
        self.teammate(unum).ok_or(Error::UnknownUnum(unum))
    }

    /// Same state with every player relocated by `t`, ball included.
    pub fn translated(&self, t: Vec2) -> GameState {
        let mut s = self.clone();
        s.ball.pos = s.ball.pos + t;
        for p in s.teammates.iter_mut().chain(s.opponents.iter_mut()) {
            p.pos = p.pos + t;
        }
        s
    }
}

/// List of violated invariants; empty iff the state is valid.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn contains(&self, needle: &str) -> bool {
        self.violations.iter().any(|v| v.contains(needle))
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.violations.join("; "))
    }
}

// Absorbs rounding in speed checks of states built from `max_speed * unit`.
const SPEED_EPS: f64 = 1e-9;

pub fn validate(state: &GameState, physics: &Physics) -> ValidationReport {
    let mut v = Vec::new();
    if !state.ball.pos.is_finite() {
        v.push("non-finite ball position".to_string());
    }
    if !state.ball.vel.is_finite() {
        v.push("non-finite ball velocity".to_string());
    } else if state.ball.vel.norm() > physics.ball_max_speed + SPEED_EPS {
        v.push("ball speed exceeds ball_max_speed".to_string());
    }
    for (side, list) in [
        (Side::Teammate, &state.teammates),
        (Side::Opponent, &state.opponents),
    ] {
        let name = match side {
            Side::Teammate => "teammate",
            Side::Opponent => "opponent",
        };
        if list.len() != TEAM_SIZE {
            v.push(format!("expected 11 {name}s, found {}", list.len()));
        }
        let mut seen = [false; TEAM_SIZE + 1];
        for p in list.iter() {
            if p.side != side {
                v.push(format!("{name} {} has wrong side", p.unum));
            }
            if !(1..=TEAM_SIZE as u8).contains(&p.unum) {
                v.push(format!("{name} unum {} out of range", p.unum));
            } else if seen[p.unum as usize] {
                v.push(format!("duplicate unum {} among {name}s", p.unum));
            } else {
                seen[p.unum as usize] = true;
            }
            if !p.pos.is_finite() {
                v.push(format!("non-finite {name} {} position", p.unum));
            } else if !physics
                .field
                .contains_with_margin(p.pos, PLAYER_FIELD_MARGIN)
            {
                v.push(format!("{name} {} outside field bounds", p.unum));
            }
            if !(p.max_speed.is_finite() && p.max_speed > 0.0) {
                v.push(format!("{name} {} has invalid max_speed", p.unum));
            }
            if !p.vel.is_finite() {
                v.push(format!("non-finite {name} {} velocity", p.unum));
            } else if p.vel.norm() > p.max_speed + SPEED_EPS {
                v.push(format!("{name} {} speed exceeds max_speed", p.unum));
            }
        }
    }
    if let Some(owner) = state.ball_owner {
        if state.teammate(owner).is_none() {
            v.push(format!("ball owner {owner} is not a teammate"));
        }
    }
    ValidationReport { violations: v }
}

/// Whether teammate `unum` is within kicking distance of the ball (boundary
/// included).
pub fn kickable(state: &GameState, unum: u8, physics: &Physics) -> Result<bool> {
    let p = state.teammate(unum).ok_or(Error::UnknownUnum(unum))?;
    Ok(p.pos.dist(state.ball.pos) <= physics.kickable_margin)
}

/// Reflect every position and velocity across the x axis.
pub fn mirror(state: &GameState) -> GameState {
    let mut s = state.clone();
    s.ball.pos = s.ball.pos.mirror_y();
    s.ball.vel = s.ball.vel.mirror_y();
    for p in s.teammates.iter_mut().chain(s.opponents.iter_mut()) {
        p.pos = p.pos.mirror_y();
        p.vel = p.vel.mirror_y();
    }
    s
}

// ---- JSON wire format ----

#[derive(Debug, Serialize, Deserialize)]
struct BallWire {
    px: f64,
    py: f64,
    vx: f64,
    vy: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct PlayerWire {
    unum: u8,
    px: f64,
    py: f64,
    vx: f64,
    vy: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct StateWire {
    cycle: u32,
    ball: BallWire,
    teammates: Vec<PlayerWire>,
    opponents: Vec<PlayerWire>,
    ball_owner: Option<u8>,
}

impl GameState {
    pub fn to_json(&self) -> String {
        let player = |p: &PlayerState| PlayerWire {
            unum: p.unum,
            px: p.pos.x,
            py: p.pos.y,
            vx: p.vel.x,
            vy: p.vel.y,
        };
        let wire = StateWire {
            cycle: self.cycle,
            ball: BallWire {
                px: self.ball.pos.x,
                py: self.ball.pos.y,
                vx: self.ball.vel.x,
                vy: self.ball.vel.y,
            },
            teammates: self.teammates.iter().map(player).collect(),
            opponents: self.opponents.iter().map(player).collect(),
            ball_owner: self.ball_owner,
        };
        serde_json::to_string(&wire).expect("state serialization cannot fail")
    }

    /// Parse one state. Player speed limits are not part of the format and
    /// come from `default_max_speed`.
    pub fn from_json(text: &str, default_max_speed: f64) -> Result<GameState> {
        let wire: StateWire = serde_json::from_str(text)?;
        let player = |side: Side| {
            move |p: &PlayerWire| PlayerState {
                side,
                unum: p.unum,
                pos: Vec2::new(p.px, p.py),
                vel: Vec2::new(p.vx, p.vy),
                max_speed: default_max_speed,
            }
        };
        Ok(GameState {
            cycle: wire.cycle,
            ball: BallState {
                pos: Vec2::new(wire.ball.px, wire.ball.py),
                vel: Vec2::new(wire.ball.vx, wire.ball.vy),
            },
            teammates: wire.teammates.iter().map(player(Side::Teammate)).collect(),
            opponents: wire.opponents.iter().map(player(Side::Opponent)).collect(),
            ball_owner: wire.ball_owner,
        })
    }
}

pub fn write_jsonl<W: Write>(mut out: W, states: &[GameState]) -> Result<()> {
    for s in states {
        writeln!(out, "{}", s.to_json())?;
    }
    Ok(())
}

pub fn read_jsonl<R: BufRead>(input: R, default_max_speed: f64) -> Result<Vec<GameState>> {
    let mut states = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let s = GameState::from_json(&line, default_max_speed)
            .map_err(|e| Error::Parse(format!("line {}: {e}", i + 1)))?;
        states.push(s);
    }
    Ok(states)
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// 22 players spread on a grid, ball at the feet of teammate `owner`.
    pub fn grid_state(owner: u8) -> GameState {
        let ms = Physics::default().player_max_speed;
        let teammates = (1..=11u8)
            .map(|u| {
                let i = f64::from(u - 1);
                PlayerState::new(
                    Side::Teammate,
                    u,
                    Vec2::new(-40.0 + 7.0 * i, -25.0 + 5.0 * i),
                    ms,
                )
            })
            .collect();
        let opponents = (1..=11u8)
            .map(|u| {
                let i = f64::from(u - 1);
                PlayerState::new(
                    Side::Opponent,
                    u,
                    Vec2::new(40.0 - 7.0 * i, -25.0 + 5.0 * i + 2.5),
                    ms,
                )
            })
            .collect();
        let mut s = GameState {
            cycle: 0,
            ball: BallState::default(),
            teammates,
            opponents,
            ball_owner: Some(owner),
        };
        s.ball.pos = s.teammate(owner).unwrap().pos;
        s
    }
}
