//! Seeded generation of plausible open-play states around fixed formations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::world::{BallState, GameState, Physics, PlayerState, Side, Vec2, TEAM_SIZE};

/// Attacking shape of our team (toward +x), indexed by `unum - 1`.
pub const TEAMMATE_ANCHORS: [(f64, f64); TEAM_SIZE] = [
    (-48.0, 0.0),
    (-25.0, -20.0),
    (-28.0, -7.0),
    (-28.0, 7.0),
    (-25.0, 20.0),
    (-8.0, -22.0),
    (-10.0, -7.0),
    (-10.0, 7.0),
    (-8.0, 22.0),
    (10.0, -6.0),
    (10.0, 6.0),
];

/// Defending shape of the opponents (guarding the +x goal).
pub const OPPONENT_ANCHORS: [(f64, f64); TEAM_SIZE] = [
    (48.0, 0.0),
    (25.0, 20.0),
    (28.0, 7.0),
    (28.0, -7.0),
    (25.0, -20.0),
    (8.0, 22.0),
    (10.0, 7.0),
    (10.0, -7.0),
    (8.0, -22.0),
    (-10.0, 6.0),
    (-10.0, -6.0),
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub n_states: usize,
    /// Half-width of the uniform box around each teammate anchor, meters.
    pub teammate_spread: f64,
    pub opponent_spread: f64,
    /// Players move with a speed drawn uniformly from `[0, velocity_spread]`.
    pub velocity_spread: f64,
    /// Ball drawn uniformly in `[-ball_x, ball_x] x [-ball_y, ball_y]`.
    pub ball_x: f64,
    pub ball_y: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            n_states: 1000,
            teammate_spread: 8.0,
            opponent_spread: 8.0,
            velocity_spread: 0.3,
            ball_x: 30.0,
            ball_y: 25.0,
        }
    }
}

fn jitter(rng: &mut ChaCha8Rng, spread: f64) -> Vec2 {
    if spread > 0.0 {
        Vec2::new(rng.random_range(-spread..=spread), rng.random_range(-spread..=spread))
    } else {
        Vec2::ZERO
    }
}

fn random_velocity(rng: &mut ChaCha8Rng, max: f64) -> Vec2 {
    if max > 0.0 {
        let speed = rng.random_range(0.0..=max);
        let angle = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
        Vec2::polar(speed, angle)
    } else {
        Vec2::ZERO
    }
}

fn clamp_to_field(p: Vec2, physics: &Physics) -> Vec2 {
    let hx = physics.field.length / 2.0;
    let hy = physics.field.width / 2.0;
    Vec2::new(p.x.clamp(-hx, hx), p.y.clamp(-hy, hy))
}

fn one_state(rng: &mut ChaCha8Rng, cfg: &ScenarioConfig, physics: &Physics) -> GameState {
    let vmax = cfg.velocity_spread.min(physics.player_max_speed);
    let mut team = |side: Side, anchors: &[(f64, f64); TEAM_SIZE], spread: f64| {
        anchors
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| {
                let pos = clamp_to_field(Vec2::new(x, y) + jitter(rng, spread), physics);
                PlayerState {
                    side,
                    unum: i as u8 + 1,
                    pos,
                    vel: random_velocity(rng, vmax),
                    max_speed: physics.player_max_speed,
                }
            })
            .collect::<Vec<_>>()
    };
    let teammates = team(Side::Teammate, &TEAMMATE_ANCHORS, cfg.teammate_spread);
    let opponents = team(Side::Opponent, &OPPONENT_ANCHORS, cfg.opponent_spread);
    let ball = Vec2::new(
        if cfg.ball_x > 0.0 { rng.random_range(-cfg.ball_x..=cfg.ball_x) } else { 0.0 },
        if cfg.ball_y > 0.0 { rng.random_range(-cfg.ball_y..=cfg.ball_y) } else { 0.0 },
    );
    // The teammate nearest the drawn spot takes the ball at its feet.
    let (owner, ball) = teammates
        .iter()
        .map(|p| (p.pos.dist(ball), p.unum, p.pos))
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .map(|(_, u, pos)| (u, pos))
        .expect("teams are never empty");
    GameState {
        cycle: 0,
        ball: BallState {
            pos: ball,
            vel: Vec2::ZERO,
        },
        teammates,
        opponents,
        ball_owner: Some(owner),
    }
}

/// `cfg.n_states` states from one seeded stream. A spot is drawn in the
/// ball box; the teammate nearest to it owns the ball, which sits at its feet.
pub fn generate_states(cfg: &ScenarioConfig, physics: &Physics) -> Vec<GameState> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..cfg.n_states).map(|_| one_state(&mut rng, cfg, physics)).collect()
}
