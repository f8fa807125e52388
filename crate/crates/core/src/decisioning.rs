//! Best-first pass tree and passer selection for an off-ball player.
//!
//! Every node holds a hypothetical state in which one teammate owns the
//! ball. Growing the tree repeatedly asks the predictor for the two most
//! likely passes out of a node, queues them, and materializes the best
//! queued pass whose receiver does not already own a node.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::motion::{ball_path, fast_forward, intercept_on_path, Contest};
use crate::predictor::{predict_targets, PassPredictor, PassStateValue, SelectOptions, UnumSet};
use crate::strategies::hardcoded_passer;
use crate::world::{GameState, Physics, Side};

#[derive(Debug, Clone, PartialEq)]
pub struct TreeNode {
    pub id: usize,
    pub state: GameState,
    pub ball_owner: u8,
    pub parent: Option<usize>,
    /// Probability of the pass that created this node; 1 at the root.
    pub edge_value: f64,
    /// Product of edge values from the root.
    pub path_value: f64,
}

/// How queued passes are ranked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Priority {
    /// Joint probability of the whole pass chain.
    #[default]
    PathProduct,
    /// Probability of the last pass only.
    EdgeValue,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeConfig {
    pub node_budget: usize,
    pub priority: Priority,
    pub select: SelectOptions,
}

impl Default for TreeConfig {
    fn default() -> Self {
        Self {
            node_budget: 10,
            priority: Priority::PathProduct,
            select: SelectOptions::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Candidate {
    pub pass: PassStateValue,
    pub parent: usize,
    pub priority: f64,
    /// Insertion counter.
    pub seq: u64,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    // Greater = popped first: higher priority, then earlier insertion, then
    // lower receiver unum.
    fn cmp(&self, other: &Self) -> Ordering {
        self.priority
            .total_cmp(&other.priority)
            .then_with(|| other.seq.cmp(&self.seq))
            .then_with(|| other.pass.receiver.cmp(&self.pass.receiver))
    }
}

/// Max-priority queue of passes waiting to become nodes.
#[derive(Debug, Clone, Default)]
pub struct CandidateList {
    heap: BinaryHeap<Candidate>,
    next_seq: u64,
}

impl CandidateList {
    pub fn push(&mut self, pass: PassStateValue, parent: usize, priority: f64) {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Candidate {
            pass,
            parent,
            priority,
            seq,
        });
    }

    /// Best candidate whose receiver is not ignored; stale ones are dropped.
    pub fn pop_valid(&mut self, ignored: UnumSet) -> Option<Candidate> {
        while let Some(c) = self.heap.pop() {
            if !ignored.contains(c.pass.receiver) {
                return Some(c);
            }
        }
        None
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn into_sorted(self) -> Vec<Candidate> {
        let mut v = self.heap.into_sorted_vec();
        v.reverse();
        v
    }
}

#[derive(Debug, Clone)]
pub struct DecisionTree {
    pub nodes: Vec<TreeNode>,
    /// Node ids in the order they were expanded.
    pub expansion_order: Vec<usize>,
    /// Ball owners of all nodes.
    pub ignored: UnumSet,
    /// Priority of every candidate turned into a node, in pop order.
    pub popped_priorities: Vec<f64>,
}

impl DecisionTree {
    pub fn root(&self) -> &TreeNode {
        &self.nodes[0]
    }

    pub fn node_of(&self, owner: u8) -> Option<&TreeNode> {
        self.nodes.iter().find(|n| n.ball_owner == owner)
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct NodeDump {
            id: usize,
            owner: u8,
            parent: Option<usize>,
            edge_value: f64,
            path_value: f64,
        }
        #[derive(Serialize)]
        struct TreeDump {
            nodes: Vec<NodeDump>,
            expansion_order: Vec<usize>,
        }
        let dump = TreeDump {
            nodes: self
                .nodes
                .iter()
                .map(|n| NodeDump {
                    id: n.id,
                    owner: n.ball_owner,
                    parent: n.parent,
                    edge_value: n.edge_value,
                    path_value: n.path_value,
                })
                .collect(),
            expansion_order: self.expansion_order.clone(),
        };
        serde_json::to_string_pretty(&dump).expect("tree serialization cannot fail")
    }
}

/// Root of the pass tree: the current state if a teammate can kick now,
/// otherwise the predicted moment a teammate collects the loose ball.
pub fn build_root(state: &GameState, physics: &Physics) -> Result<TreeNode> {
    let ball = state.ball.pos;
    let kicker = state
        .teammates
        .iter()
        .map(|p| (p.pos.dist(ball), p.unum))
        .filter(|(d, _)| *d <= physics.kickable_margin)
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let (root_state, owner) = match kicker {
        Some((_, unum)) => {
            let mut s = state.clone();
            s.ball_owner = Some(unum);
            (s, unum)
        }
        None => {
            let traj = ball_path(ball, state.ball.vel, physics.horizon, physics);
            let r = intercept_on_path(state, &traj, Contest::default(), physics);
            match r.receiver {
                Some((Side::Teammate, unum)) => (fast_forward(state, &r)?, unum),
                _ => return Err(Error::NoPossession),
            }
        }
    };
    Ok(TreeNode {
        id: 0,
        state: root_state,
        ball_owner: owner,
        parent: None,
        edge_value: 1.0,
        path_value: 1.0,
    })
}

/// Best-first expansion until the tree holds `node_budget` nodes (root
/// included) or nothing is left to expand.
pub fn grow_tree<P: PassPredictor + ?Sized>(
    root: TreeNode,
    predictor: &P,
    config: &TreeConfig,
    physics: &Physics,
) -> Result<(DecisionTree, CandidateList)> {
    let mut tree = DecisionTree {
        nodes: Vec::with_capacity(config.node_budget),
        expansion_order: Vec::with_capacity(config.node_budget),
        ignored: UnumSet::new(),
        popped_priorities: Vec::new(),
    };
    let mut queue = CandidateList::default();
    let mut current = root;
    loop {
        tree.ignored.insert(current.ball_owner);
        let id = tree.nodes.len();
        current.id = id;
        let path_value = current.path_value;
        let state = current.state.clone();
        tree.nodes.push(current);
        if tree.nodes.len() >= config.node_budget {
            break;
        }
        tree.expansion_order.push(id);
        for pass in predict_targets(predictor, &state, tree.ignored, config.select, physics)? {
            let priority = match config.priority {
                Priority::PathProduct => path_value * pass.value,
                Priority::EdgeValue => pass.value,
            };
            queue.push(pass, id, priority);
        }
        let Some(next) = queue.pop_valid(tree.ignored) else {
            break;
        };
        tree.popped_priorities.push(next.priority);
        current = TreeNode {
            id: 0,
            ball_owner: next.pass.receiver,
            parent: Some(next.parent),
            edge_value: next.pass.value,
            path_value: tree.nodes[next.parent].path_value * next.pass.value,
            state: next.pass.outcome,
        };
    }
    Ok((tree, queue))
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnmarkDecision {
    pub passer: u8,
    pub found_in_tree: bool,
    pub root_state: GameState,
}

/// Passer for `unmarker`: the owner of the parent of the unmarker's node, or
/// the hard-coded rule when the unmarker is not in the tree.
pub fn select_passer(tree: &DecisionTree, unmarker: u8) -> Result<UnmarkDecision> {
    let root = tree.root();
    if root.ball_owner == unmarker {
        return Err(Error::SelfOwner(unmarker));
    }
    if let Some(node) = tree.node_of(unmarker) {
        let parent = node.parent.expect("only the root has no parent");
        return Ok(UnmarkDecision {
            passer: tree.nodes[parent].ball_owner,
            found_in_tree: true,
            root_state: root.state.clone(),
        });
    }
    Ok(UnmarkDecision {
        passer: hardcoded_passer(&root.state, unmarker)?,
        found_in_tree: false,
        root_state: root.state.clone(),
    })
}
