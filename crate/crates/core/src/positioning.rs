//! Where to wait for the pass: ring candidates around the off-ball player,
//! each validated by simulating the pass from the chosen passer.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::motion::{simulate_pass, Contest, PassSpec};
use crate::world::{GameState, Physics, Vec2};

pub const RING_RADII: [f64; 3] = [2.0, 4.0, 8.0];
pub const POINTS_PER_RING: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CandidatePoint {
    pub point: Vec2,
    pub ring_radius: f64,
    pub angle_index: u8,
    pub valid: bool,
    /// Lower is better.
    pub score: f64,
}

/// What "best" means among valid candidates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PositionObjective {
    /// Closest to the opponent goal center.
    #[default]
    GoalDistance,
    /// Closest to the nearest opponent player.
    NearestOpponent,
}

/// 24 points: radii 2, 4, 8 m, eight directions each, 45 degrees apart
/// starting at +x. Ordered by radius, then angle index.
pub fn generate_candidates(center: Vec2) -> Vec<CandidatePoint> {
    let mut out = Vec::with_capacity(RING_RADII.len() * POINTS_PER_RING);
    for &r in &RING_RADII {
        for k in 0..POINTS_PER_RING {
            let angle = k as f64 * std::f64::consts::FRAC_PI_4;
            out.push(CandidatePoint {
                point: center + Vec2::polar(r, angle),
                ring_radius: r,
                angle_index: k as u8,
                valid: false,
                score: f64::NAN,
            });
        }
    }
    out
}

/// Whether `unmarker`, standing at `point`, would collect a pass from
/// `passer` before anyone else.
pub fn validate_candidate(
    state: &GameState,
    passer: u8,
    unmarker: u8,
    point: Vec2,
    physics: &Physics,
) -> Result<bool> {
    if passer == unmarker {
        return Err(Error::InvalidPass(format!("passer and unmarker are both {passer}")));
    }
    let from = state.teammate(passer).ok_or(Error::UnknownUnum(passer))?.pos;
    state.teammate(unmarker).ok_or(Error::UnknownUnum(unmarker))?;
    if !physics.field.contains(point) || from == point {
        return Ok(false);
    }
    let mut hypo = state.clone();
    hypo.teammate_mut(unmarker).expect("checked above").pos = point;
    let spec = PassSpec::new(from, point, physics.pass_speed);
    let contest = Contest {
        kicker: Some(passer),
        receiver_hint: Some(unmarker),
    };
    Ok(simulate_pass(&hypo, &spec, contest, physics)?.is_teammate(unmarker))
}

pub fn score_point(state: &GameState, point: Vec2, objective: PositionObjective, physics: &Physics) -> f64 {
    match objective {
        PositionObjective::GoalDistance => point.dist(physics.field.opp_goal),
        PositionObjective::NearestOpponent => state
            .opponents
            .iter()
            .map(|o| o.pos.dist(point))
            .fold(f64::INFINITY, f64::min),
    }
}

/// All 24 candidates with validity and score filled in.
pub fn evaluate_candidates(
    state: &GameState,
    passer: u8,
    unmarker: u8,
    objective: PositionObjective,
    physics: &Physics,
) -> Result<Vec<CandidatePoint>> {
    let center = state.teammate(unmarker).ok_or(Error::UnknownUnum(unmarker))?.pos;
    generate_candidates(center)
        .into_iter()
        .map(|mut c| {
            c.valid = validate_candidate(state, passer, unmarker, c.point, physics)?;
            c.score = score_point(state, c.point, objective, physics);
            Ok(c)
        })
        .collect()
}

/// Lowest-score valid candidate; ties keep generation order (smaller ring,
/// then lower angle index).
pub fn best_candidate(candidates: &[CandidatePoint]) -> Option<&CandidatePoint> {
    candidates
        .iter()
        .filter(|c| c.valid)
        .fold(None, |best: Option<&CandidatePoint>, c| match best {
            Some(b) if b.score <= c.score => Some(b),
            _ => Some(c),
        })
}

pub fn choose_position(
    state: &GameState,
    passer: u8,
    unmarker: u8,
    objective: PositionObjective,
    physics: &Physics,
) -> Result<Option<Vec2>> {
    let cands = evaluate_candidates(state, passer, unmarker, objective, physics)?;
    Ok(best_candidate(&cands).map(|c| c.point))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::fixtures::grid_state;

    fn close(a: Vec2, b: Vec2) -> bool {
        a.dist(b) < 1e-9
    }

    #[test]
    fn candidate_geometry() {
        let c = generate_candidates(Vec2::ZERO);
        assert_eq!(c.len(), 24);
        assert!(close(c[0].point, Vec2::new(2.0, 0.0)));
        assert!(close(c[8 + 2].point, Vec2::new(0.0, 4.0)));
        let c = generate_candidates(Vec2::new(10.0, 5.0));
        assert!(close(c[16 + 4].point, Vec2::new(2.0, 5.0)));
        for p in &c {
            assert!((p.point.dist(Vec2::new(10.0, 5.0)) - p.ring_radius).abs() < 1e-9);
        }
    }

    /// Passer 1 at the origin, unmarker 2 nearby, everyone else far away.
    fn open_state() -> GameState {
        let mut s = grid_state(1);
        for p in s.teammates.iter_mut().chain(s.opponents.iter_mut()) {
            p.pos = Vec2::new(-50.0, -30.0);
        }
        s.teammate_mut(1).unwrap().pos = Vec2::new(-10.0, 0.0);
        s.ball.pos = Vec2::new(-10.0, 0.0);
        s.teammate_mut(2).unwrap().pos = Vec2::ZERO;
        s
    }

    #[test]
    fn unopposed_candidate_is_valid() {
        let ph = Physics::default();
        let s = open_state();
        assert!(validate_candidate(&s, 1, 2, Vec2::new(2.0, 0.0), &ph).unwrap());
        assert!(validate_candidate(&s, 2, 2, Vec2::new(2.0, 0.0), &ph).is_err());
    }

    #[test]
    fn opponent_on_lane_invalidates() {
        let ph = Physics::default();
        let mut s = open_state();
        s.opponents[3].pos = Vec2::new(-4.0, 0.0);
        assert!(!validate_candidate(&s, 1, 2, Vec2::new(2.0, 0.0), &ph).unwrap());
    }

    #[test]
    fn out_of_field_is_invalid() {
        let ph = Physics::default();
        let s = open_state();
        assert!(!validate_candidate(&s, 1, 2, Vec2::new(60.0, 0.0), &ph).unwrap());
    }

    #[test]
    fn all_valid_picks_goalward_outer_point() {
        let ph = Physics::default();
        let s = open_state();
        let cands = evaluate_candidates(&s, 1, 2, PositionObjective::GoalDistance, &ph).unwrap();
        assert!(cands.iter().all(|c| c.valid));
        // Brute force over the table: smallest distance to (52.5, 0).
        let best = cands
            .iter()
            .map(|c| c.point.dist(Vec2::new(52.5, 0.0)))
            .fold(f64::INFINITY, f64::min);
        assert!((best - 44.5).abs() < 1e-9);
        let p = choose_position(&s, 1, 2, PositionObjective::GoalDistance, &ph).unwrap();
        assert!(close(p.unwrap(), Vec2::new(8.0, 0.0)));
    }

    #[test]
    fn nothing_valid_and_single_valid() {
        let mut cands = generate_candidates(Vec2::ZERO);
        for (i, c) in cands.iter_mut().enumerate() {
            c.score = i as f64;
        }
        assert!(best_candidate(&cands).is_none());
        cands[17].valid = true;
        assert_eq!(best_candidate(&cands).unwrap().angle_index, 1);
        assert_eq!(best_candidate(&cands).unwrap().ring_radius, 8.0);
    }

    #[test]
    fn ties_prefer_inner_ring() {
        let mut cands = generate_candidates(Vec2::ZERO);
        for c in cands.iter_mut() {
            c.score = 1.0;
            c.valid = true;
        }
        let b = best_candidate(&cands).unwrap();
        assert_eq!((b.ring_radius, b.angle_index), (2.0, 0));
    }

    #[test]
    fn nearest_opponent_objective() {
        let ph = Physics::default();
        let mut s = open_state();
        s.opponents[0].pos = Vec2::new(0.0, -20.0);
        let p = choose_position(&s, 1, 2, PositionObjective::NearestOpponent, &ph)
            .unwrap()
            .unwrap();
        assert!(close(p, Vec2::new(0.0, -8.0)));
    }
}
