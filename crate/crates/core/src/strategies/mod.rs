//! The three unmarking strategies and the fallback chain that combines them.

pub mod voronoi;

use std::cell::OnceCell;
use std::fmt;
use std::str::FromStr;

use crate::decisioning::{build_root, grow_tree, select_passer, DecisionTree, TreeConfig};
use crate::error::{Error, Result};
use crate::positioning::{choose_position, validate_candidate, PositionObjective};
use crate::predictor::PassPredictor;
use crate::world::{GameState, Physics, Vec2};

pub use voronoi::{voronoi_diagram, VoronoiDiagram, VoronoiVertex};

/// Ball owner within this distance of the unmarker is the hard-coded passer.
pub const HARDCODED_OWNER_RANGE: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnmarkStrategyKind {
    PassPrediction,
    HardCoded,
    Voronoi,
}

impl fmt::Display for UnmarkStrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::PassPrediction => "pass-prediction",
            Self::HardCoded => "hard-coded",
            Self::Voronoi => "voronoi",
        })
    }
}

/// Strategies tried in order until one finds a position. The order is
/// always pass prediction, hard-coded, Voronoi.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrategyChain {
    name: String,
    kinds: Vec<UnmarkStrategyKind>,
}

impl StrategyChain {
    pub fn from_flags(name: &str, pass_prediction: bool, hard_coded: bool, voronoi: bool) -> Self {
        let kinds = [
            (pass_prediction, UnmarkStrategyKind::PassPrediction),
            (hard_coded, UnmarkStrategyKind::HardCoded),
            (voronoi, UnmarkStrategyKind::Voronoi),
        ]
        .into_iter()
        .filter_map(|(on, k)| on.then_some(k))
        .collect();
        Self {
            name: name.to_string(),
            kinds,
        }
    }

    /// Named versions: V1 = PP, V2 = PP + Voronoi, V3 = HC + Voronoi,
    /// V4 = HC, V5 = Voronoi, V6 = none.
    pub fn version(name: &str) -> Result<Self> {
        let (pp, hc, vor) = match name {
            "V1" => (true, false, false),
            "V2" => (true, false, true),
            "V3" => (false, true, true),
            "V4" => (false, true, false),
            "V5" => (false, false, true),
            "V6" => (false, false, false),
            other => return Err(Error::Config(format!("unknown strategy version {other}"))),
        };
        Ok(Self::from_flags(name, pp, hc, vor))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kinds(&self) -> &[UnmarkStrategyKind] {
        &self.kinds
    }

    pub fn is_empty(&self) -> bool {
        self.kinds.is_empty()
    }
}

impl FromStr for StrategyChain {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::version(s.trim())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrategyConfig {
    pub tree: TreeConfig,
    pub objective: PositionObjective,
    /// Voronoi vertices farther than this from the unmarker are ignored.
    pub voronoi_radius: f64,
}

impl Default for StrategyConfig {
    fn default() -> Self {
        Self {
            tree: TreeConfig::default(),
            objective: PositionObjective::GoalDistance,
            voronoi_radius: 15.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnmarkPlan {
    pub passer: u8,
    pub point: Vec2,
    pub strategy: UnmarkStrategyKind,
}

/// Per-state inputs shared by every unmarker: the pass tree and the Voronoi
/// diagram are built at most once and only when a strategy asks for them.
pub struct UnmarkContext<'a> {
    pub state: &'a GameState,
    pub predictor: &'a dyn PassPredictor,
    pub config: &'a StrategyConfig,
    pub physics: &'a Physics,
    tree: OnceCell<Option<DecisionTree>>,
    voronoi: OnceCell<VoronoiDiagram>,
}

impl<'a> UnmarkContext<'a> {
    pub fn new(
        state: &'a GameState,
        predictor: &'a dyn PassPredictor,
        config: &'a StrategyConfig,
        physics: &'a Physics,
    ) -> Self {
        Self {
            state,
            predictor,
            config,
            physics,
            tree: OnceCell::new(),
            voronoi: OnceCell::new(),
        }
    }

    /// Pass tree from the current state; `None` when we do not have the ball.
    pub fn tree(&self) -> Result<Option<&DecisionTree>> {
        if let Some(t) = self.tree.get() {
            return Ok(t.as_ref());
        }
        let tree = match build_root(self.state, self.physics) {
            Ok(root) => Some(grow_tree(root, self.predictor, &self.config.tree, self.physics)?.0),
            Err(Error::NoPossession) => None,
            Err(e) => return Err(e),
        };
        Ok(self.tree.get_or_init(|| tree).as_ref())
    }

    pub fn voronoi(&self) -> &VoronoiDiagram {
        self.voronoi.get_or_init(|| {
            let sites: Vec<Vec2> = self.state.opponents.iter().map(|p| p.pos).collect();
            voronoi_diagram(&sites, &self.physics.field)
        })
    }
}

fn absent_on_role_errors<T>(r: Result<Option<T>>) -> Result<Option<T>> {
    match r {
        Err(Error::NoPossession | Error::SelfOwner(_)) => Ok(None),
        other => other,
    }
}

/// Passer from the pass tree, position from the ring search.
pub fn unmark_pass_prediction(ctx: &UnmarkContext<'_>, unmarker: u8) -> Result<Option<(u8, Vec2)>> {
    absent_on_role_errors((|| {
        let Some(tree) = ctx.tree()? else {
            return Ok(None);
        };
        let decision = select_passer(tree, unmarker)?;
        let point = choose_position(
            &decision.root_state,
            decision.passer,
            unmarker,
            ctx.config.objective,
            ctx.physics,
        )?;
        Ok(point.map(|p| (decision.passer, p)))
    })())
}

/// Ball owner if within 20 m of the unmarker, otherwise the teammate closest
/// to the segment from the ball owner to the unmarker.
pub fn hardcoded_passer(state: &GameState, unmarker: u8) -> Result<u8> {
    let owner = state.owner()?;
    let me = state.teammate(unmarker).ok_or(Error::UnknownUnum(unmarker))?;
    if owner.unum == unmarker {
        return Err(Error::SelfOwner(unmarker));
    }
    if owner.pos.dist(me.pos) < HARDCODED_OWNER_RANGE {
        return Ok(owner.unum);
    }
    state
        .teammates
        .iter()
        .filter(|p| p.unum != unmarker && p.unum != owner.unum)
        .map(|p| (p.pos.dist_to_segment(owner.pos, me.pos), p.unum))
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .map(|(_, u)| u)
        .ok_or_else(|| Error::InvalidState("no candidate passer".into()))
}

pub fn unmark_hardcoded(ctx: &UnmarkContext<'_>, unmarker: u8) -> Result<Option<(u8, Vec2)>> {
    absent_on_role_errors((|| {
        let passer = hardcoded_passer(ctx.state, unmarker)?;
        let point = choose_position(ctx.state, passer, unmarker, ctx.config.objective, ctx.physics)?;
        Ok(point.map(|p| (passer, p)))
    })())
}

/// Valid Voronoi vertices near the unmarker, ranked by distance to the
/// nearest opponent (larger first), then distance to the opponent goal,
/// then x and y.
pub fn voronoi_candidates(ctx: &UnmarkContext<'_>, unmarker: u8) -> Result<Vec<VoronoiVertex>> {
    let owner = ctx.state.owner()?.unum;
    if owner == unmarker {
        return Err(Error::SelfOwner(unmarker));
    }
    let me = ctx.state.teammate(unmarker).ok_or(Error::UnknownUnum(unmarker))?.pos;
    let mut out = Vec::new();
    for v in &ctx.voronoi().vertices {
        if v.point.dist(me) <= ctx.config.voronoi_radius
            && validate_candidate(ctx.state, owner, unmarker, v.point, ctx.physics)?
        {
            out.push(*v);
        }
    }
    let goal = ctx.physics.field.opp_goal;
    let clearance = |v: &VoronoiVertex| {
        ctx.state
            .opponents
            .iter()
            .map(|o| o.pos.dist(v.point))
            .fold(f64::INFINITY, f64::min)
    };
    out.sort_by(|a, b| {
        clearance(b)
            .total_cmp(&clearance(a))
            .then(a.point.dist(goal).total_cmp(&b.point.dist(goal)))
            .then(a.point.x.total_cmp(&b.point.x))
            .then(a.point.y.total_cmp(&b.point.y))
    });
    Ok(out)
}

pub fn unmark_voronoi(ctx: &UnmarkContext<'_>, unmarker: u8) -> Result<Option<(u8, Vec2)>> {
    absent_on_role_errors((|| {
        let owner = ctx.state.owner()?.unum;
        Ok(voronoi_candidates(ctx, unmarker)?
            .first()
            .map(|v| (owner, v.point)))
    })())
}

pub fn run_strategy(
    kind: UnmarkStrategyKind,
    ctx: &UnmarkContext<'_>,
    unmarker: u8,
) -> Result<Option<(u8, Vec2)>> {
    match kind {
        UnmarkStrategyKind::PassPrediction => unmark_pass_prediction(ctx, unmarker),
        UnmarkStrategyKind::HardCoded => unmark_hardcoded(ctx, unmarker),
        UnmarkStrategyKind::Voronoi => unmark_voronoi(ctx, unmarker),
    }
}

/// First strategy in the chain that finds a position; `on_invoke` sees every
/// strategy actually run.
pub fn compose_traced(
    chain: &StrategyChain,
    ctx: &UnmarkContext<'_>,
    unmarker: u8,
    mut on_invoke: impl FnMut(UnmarkStrategyKind),
) -> Result<Option<UnmarkPlan>> {
    for &kind in chain.kinds() {
        on_invoke(kind);
        if let Some((passer, point)) = run_strategy(kind, ctx, unmarker)? {
            return Ok(Some(UnmarkPlan {
                passer,
                point,
                strategy: kind,
            }));
        }
    }
    Ok(None)
}

pub fn compose(
    chain: &StrategyChain,
    ctx: &UnmarkContext<'_>,
    unmarker: u8,
) -> Result<Option<UnmarkPlan>> {
    compose_traced(chain, ctx, unmarker, |_| {})
}
