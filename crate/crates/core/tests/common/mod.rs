//! Independent reference implementations used to cross-check the library.
//! Each one is deliberately written the slow, obvious way.

#![allow(dead_code)]

pub mod gradcheck;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use unmark_core::motion::{Contest, InterceptResult, PassSpec};
use unmark_core::predictor::PassPredictor;
use unmark_core::world::{
    BallState, FieldSpec, GameState, Physics, PlayerState, Side, Vec2, TEAM_SIZE,
};
use unmark_core::Result;

// ---- random states ----

pub fn random_player(rng: &mut ChaCha8Rng, side: Side, unum: u8, physics: &Physics) -> PlayerState {
    let hx = physics.field.length / 2.0;
    let hy = physics.field.width / 2.0;
    let pos = Vec2::new(rng.random_range(-hx..=hx), rng.random_range(-hy..=hy));
    let speed = rng.random_range(0.0..=physics.player_max_speed);
    let vel = Vec2::polar(speed, rng.random_range(-std::f64::consts::PI..std::f64::consts::PI));
    PlayerState {
        side,
        unum,
        pos,
        vel,
        max_speed: physics.player_max_speed,
    }
}

/// Uniformly scattered players; the owner stands on the ball.
pub fn random_state(rng: &mut ChaCha8Rng, physics: &Physics) -> GameState {
    let teammates: Vec<PlayerState> = (1..=TEAM_SIZE as u8)
        .map(|u| random_player(rng, Side::Teammate, u, physics))
        .collect();
    let opponents: Vec<PlayerState> = (1..=TEAM_SIZE as u8)
        .map(|u| random_player(rng, Side::Opponent, u, physics))
        .collect();
    let owner = rng.random_range(1..=TEAM_SIZE as u8);
    let ball = teammates[owner as usize - 1].pos;
    GameState {
        cycle: rng.random_range(0..6000),
        ball: BallState {
            pos: ball,
            vel: Vec2::ZERO,
        },
        teammates,
        opponents,
        ball_owner: Some(owner),
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---- brute-force pass simulation ----

/// Steps the ball one cycle at a time (position += velocity, velocity *=
/// decay) and each cycle asks every eligible player whether it could stand
/// within the kickable margin by now, given it starts running after the
/// reaction delay.
pub fn brute_force_pass(
    state: &GameState,
    spec: &PassSpec,
    contest: Contest,
    physics: &Physics,
) -> InterceptResult {
    let total = spec.start.dist(spec.target);
    let dir = (spec.target - spec.start) * (1.0 / total);
    let mut balls = vec![spec.start];
    let mut travelled = 0.0;
    let mut speed = spec.speed;
    for _ in 0..physics.horizon {
        travelled += speed;
        speed *= physics.ball_decay;
        if travelled >= total {
            if physics.field.contains(spec.target) {
                balls.push(spec.target);
            }
            break;
        }
        let p = spec.start + dir * travelled;
        if !physics.field.contains(p) {
            break;
        }
        balls.push(p);
    }

    let eligible = |p: &PlayerState| match p.side {
        Side::Opponent => true,
        Side::Teammate => {
            Some(p.unum) != contest.kicker && contest.receiver_hint.is_none_or(|h| h == p.unum)
        }
    };
    for (k, &ball) in balls.iter().enumerate() {
        let mut winners: Vec<(u8, Side, u8)> = Vec::new();
        for p in state.teammates.iter().chain(&state.opponents) {
            if !eligible(p) {
                continue;
            }
            let run = k as i64 - physics.reaction_delay as i64;
            if run < 0 {
                continue;
            }
            // Distance the player can cover, one cycle of max speed at a time.
            let mut covered = 0.0;
            for _ in 0..run {
                covered += p.max_speed;
            }
            if p.pos.dist(ball) <= physics.kickable_margin + covered {
                let side_rank = if p.side == Side::Teammate { 0 } else { 1 };
                winners.push((side_rank, p.side, p.unum));
            }
        }
        if let Some(&(_, side, unum)) = winners.iter().min_by_key(|w| (w.0, w.2)) {
            return InterceptResult {
                receiver: Some((side, unum)),
                cycle: k as u32,
                point: ball,
            };
        }
    }
    let last = balls.len() - 1;
    InterceptResult {
        receiver: None,
        cycle: last as u32,
        point: balls[last],
    }
}

// ---- tabulated predictor and exhaustive tree oracle ----

/// Pass probabilities that depend only on who owns the ball.
#[derive(Debug, Clone, Default)]
pub struct TablePredictor {
    pub rows: [[f64; TEAM_SIZE]; TEAM_SIZE],
}

impl PassPredictor for TablePredictor {
    fn pass_probabilities(&self, state: &GameState) -> Result<[f64; TEAM_SIZE]> {
        let owner = state.ball_owner.expect("tree states always have an owner");
        Ok(self.rows[owner as usize - 1])
    }
}

/// Random table over `players` (at most 5 unums): each row is a random
/// distribution over the other listed players, with occasional zeros.
pub fn random_table(rng: &mut ChaCha8Rng, players: &[u8]) -> TablePredictor {
    let mut t = TablePredictor::default();
    for &from in players {
        let mut row = [0.0; TEAM_SIZE];
        for &to in players {
            if to != from && rng.random_bool(0.85) {
                // Coarse values so equal probabilities (ties) occur.
                row[to as usize - 1] = f64::from(rng.random_range(1..=8u8)) / 8.0;
            }
        }
        let sum: f64 = row.iter().sum();
        if sum > 0.0 {
            row.iter_mut().for_each(|p| *p /= sum);
        }
        t.rows[from as usize - 1] = row;
    }
    t
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleNode {
    pub owner: u8,
    pub parent: Option<usize>,
    pub edge_value: f64,
    pub path_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleTree {
    pub nodes: Vec<OracleNode>,
    pub expansion_order: Vec<usize>,
}

/// Best-first tree over owners only. Keeps every pending candidate in a flat
/// list and scans all of them at each step; a candidate whose receiver is
/// already in the tree is never chosen.
pub fn oracle_tree(
    table: &TablePredictor,
    root_owner: u8,
    budget: usize,
    path_product: bool,
) -> OracleTree {
    struct Pending {
        parent: usize,
        receiver: u8,
        value: f64,
        priority: f64,
        seq: usize,
    }
    let mut nodes = vec![OracleNode {
        owner: root_owner,
        parent: None,
        edge_value: 1.0,
        path_value: 1.0,
    }];
    let mut expansion_order = Vec::new();
    let mut pending: Vec<Pending> = Vec::new();
    let mut seq = 0;
    let in_tree = |nodes: &[OracleNode], u: u8| nodes.iter().any(|n| n.owner == u);
    loop {
        if nodes.len() >= budget {
            break;
        }
        let current = nodes.len() - 1;
        expansion_order.push(current);
        let owner = nodes[current].owner;
        // Top two receivers not in the tree, by probability then unum.
        let mut options: Vec<(u8, f64)> = (1..=TEAM_SIZE as u8)
            .filter(|&u| u != owner && !in_tree(&nodes, u))
            .map(|u| (u, table.rows[owner as usize - 1][u as usize - 1]))
            .filter(|&(_, p)| p > 0.0)
            .collect();
        options.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        for &(receiver, value) in options.iter().take(2) {
            let priority = if path_product {
                nodes[current].path_value * value
            } else {
                value
            };
            pending.push(Pending {
                parent: current,
                receiver,
                value,
                priority,
                seq,
            });
            seq += 1;
        }
        let mut best: Option<usize> = None;
        for (i, c) in pending.iter().enumerate() {
            if in_tree(&nodes, c.receiver) {
                continue;
            }
            let better = match best {
                None => true,
                Some(b) => {
                    let o = &pending[b];
                    c.priority > o.priority
                        || (c.priority == o.priority
                            && (c.seq < o.seq || (c.seq == o.seq && c.receiver < o.receiver)))
                }
            };
            if better {
                best = Some(i);
            }
        }
        let Some(b) = best else { break };
        let c = pending.remove(b);
        nodes.push(OracleNode {
            owner: c.receiver,
            parent: Some(c.parent),
            edge_value: c.value,
            path_value: nodes[c.parent].path_value * c.value,
        });
    }
    OracleTree {
        nodes,
        expansion_order,
    }
}

// ---- half-plane Voronoi reference ----

/// Clips a convex polygon to the half-plane `{ p : (p - m) . n <= 0 }`.
fn clip(poly: &[Vec2], m: Vec2, n: Vec2) -> Vec<Vec2> {
    let side = |p: Vec2| (p - m).dot(n);
    let mut out = Vec::new();
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        let (sa, sb) = (side(a), side(b));
        if sa <= 0.0 {
            out.push(a);
        }
        if (sa < 0.0 && sb > 0.0) || (sa > 0.0 && sb < 0.0) {
            let t = sa / (sa - sb);
            out.push(a + (b - a) * t);
        }
    }
    out
}

/// Vertices of the Voronoi diagram on the field, found by intersecting
/// half-planes into explicit cells. Corners of the huge clipping box and
/// points not equidistant to three sites are discarded.
pub fn half_plane_vertices(sites: &[Vec2], field: &FieldSpec) -> Vec<Vec2> {
    const BOX: f64 = 1.0e5;
    let mut found: Vec<Vec2> = Vec::new();
    for (i, &s) in sites.iter().enumerate() {
        let mut cell = vec![
            Vec2::new(-BOX, -BOX),
            Vec2::new(BOX, -BOX),
            Vec2::new(BOX, BOX),
            Vec2::new(-BOX, BOX),
        ];
        for (j, &o) in sites.iter().enumerate() {
            if i != j {
                cell = clip(&cell, (s + o) * 0.5, o - s);
            }
        }
        for v in cell {
            if v.x.abs() >= BOX * 0.5 || v.y.abs() >= BOX * 0.5 || !field.contains(v) {
                continue;
            }
            let r = v.dist(s);
            let equidistant = sites.iter().filter(|&&o| (v.dist(o) - r).abs() < 1e-6).count();
            if equidistant >= 3 && !found.iter().any(|f| f.dist(v) < 1e-6) {
                found.push(v);
            }
        }
    }
    found
}
