//! Focused, memory-bounded Monte-Carlo tree search.
//!
//! Nodes live in a [`NodePool`] with a hard capacity. When the pool is full
//! the least recently touched leaf outside the current selection path is
//! recycled and its parent forgets the edge; the parent may grow that child
//! again later, starting from zero visits. Each node's candidate moves are
//! the pattern policy's good set (or every legal move when focus is off),
//! with priors renormalised over that set.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Reverse;

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::features::{partition, FeatureSet, Neighbourhoods, PartitionParams, PolicyDist, Scorer};
use crate::game::{Action, Cell, GameSpec, GameState, Player, Rules};
use crate::rng::{self, Rng};

/// Where the pattern policy prunes candidate moves.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Focus {
    /// Every legal move is a candidate everywhere.
    Off,
    /// Only the root is pruned to the good set.
    RootOnly,
    /// Every node is pruned to its good set.
    All,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SearchConfig {
    pub iterations: u32,
    pub node_cap: usize,
    /// Plies below the root beyond which nothing is expanded.
    pub depth_cap: Option<u32>,
    pub c_puct: f64,
    /// Chance of a uniform move at each playout ply.
    pub epsilon: f64,
    pub playout_cap: u32,
    pub seed: u64,
    pub focus: Focus,
}

impl SearchConfig {
    /// Unbounded memory and depth, no pruning.
    pub fn vanilla(spec: &GameSpec) -> Self {
        SearchConfig {
            iterations: 2000,
            node_cap: 1_000_000,
            depth_cap: None,
            c_puct: 1.5,
            epsilon: 0.25,
            playout_cap: default_playout_cap(spec),
            seed: 0,
            focus: Focus::Off,
        }
    }

    /// Small node budget, five-ply horizon and pruning at every node.
    pub fn human(spec: &GameSpec) -> Self {
        SearchConfig {
            node_cap: 2000,
            depth_cap: Some(5),
            focus: Focus::All,
            ..SearchConfig::vanilla(spec)
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::InvalidConfig("iterations must be at least 1"));
        }
        if self.node_cap < 2 {
            return Err(Error::InvalidConfig("node cap must be at least 2"));
        }
        if self.depth_cap == Some(0) {
            return Err(Error::InvalidConfig("depth cap must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::InvalidConfig("epsilon must be in [0, 1]"));
        }
        if !(self.c_puct >= 0.0) {
            return Err(Error::InvalidConfig("c_puct must be non-negative"));
        }
        Ok(())
    }
}

/// 60 plies, or the whole board when it is smaller.
pub fn default_playout_cap(spec: &GameSpec) -> u32 {
    (spec.cells() as u32).min(60)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub action: Action,
    pub prior: f64,
    pub child: Option<NodeId>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Node {
    parent: Option<NodeId>,
    action: Option<Action>,
    edges: Option<Vec<Edge>>,
    visits: u32,
    /// Sum of values for the player who moved into this node.
    value: f64,
    prior: f64,
    last_touch: u64,
    depth: u32,
    /// Value for the mover when the position is over.
    terminal: Option<f64>,
    live_children: u32,
    live: bool,
}

impl Node {
    fn new(parent: Option<NodeId>, action: Option<Action>, prior: f64, depth: u32) -> Self {
        Node {
            parent,
            action,
            edges: None,
            visits: 0,
            value: 0.0,
            prior,
            last_touch: 0,
            depth,
            terminal: None,
            live_children: 0,
            live: true,
        }
    }

    pub fn parent(&self) -> Option<NodeId> {
        self.parent
    }
    pub fn action(&self) -> Option<Action> {
        self.action
    }
    /// Candidate moves, once the node has been expanded from.
    pub fn edges(&self) -> Option<&[Edge]> {
        self.edges.as_deref()
    }
    pub fn visits(&self) -> u32 {
        self.visits
    }
    pub fn total_value(&self) -> f64 {
        self.value
    }
    pub fn mean_value(&self) -> f64 {
        if self.visits == 0 {
            0.0
        } else {
            self.value / self.visits as f64
        }
    }
    pub fn prior(&self) -> f64 {
        self.prior
    }
    pub fn last_touch(&self) -> u64 {
        self.last_touch
    }
    pub fn depth(&self) -> u32 {
        self.depth
    }
    pub fn is_leaf(&self) -> bool {
        self.live_children == 0
    }
    pub fn is_live(&self) -> bool {
        self.live
    }
}

/// Fixed-capacity node arena with least-recently-touched leaf recycling.
#[derive(Clone, Debug)]
pub struct NodePool {
    nodes: Vec<Node>,
    free: Vec<NodeId>,
    capacity: usize,
    live: usize,
    peak_live: usize,
    clock: u64,
    /// Leaf candidates by touch stamp; stale entries are skipped on pop.
    queue: BinaryHeap<Reverse<(u64, u32)>>,
    recycled: u64,
}

impl NodePool {
    pub fn new(capacity: usize) -> Self {
        NodePool {
            nodes: Vec::new(),
            free: Vec::new(),
            capacity,
            live: 0,
            peak_live: 0,
            clock: 0,
            queue: BinaryHeap::new(),
            recycled: 0,
        }
    }

    /// Drop every node and set a new capacity, keeping allocations.
    pub fn reset(&mut self, capacity: usize) {
        self.nodes.clear();
        self.free.clear();
        self.queue.clear();
        self.capacity = capacity;
        self.live = 0;
        self.peak_live = 0;
        self.clock = 0;
        self.recycled = 0;
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }
    pub fn live(&self) -> usize {
        self.live
    }
    /// Highest live count seen since the last reset.
    pub fn peak_live(&self) -> usize {
        self.peak_live
    }
    pub fn recycled(&self) -> u64 {
        self.recycled
    }
    pub fn is_full(&self) -> bool {
        self.live >= self.capacity
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.index()]
    }

    fn node_mut(&mut self, id: NodeId) -> &mut Node {
        &mut self.nodes[id.index()]
    }

    pub fn iter_live(&self) -> impl Iterator<Item = (NodeId, &Node)> {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.live)
            .map(|(i, n)| (NodeId(i as u32), n))
    }

    fn store(&mut self, node: Node) -> Result<NodeId> {
        if self.live >= self.capacity {
            return Err(Error::PoolExhausted);
        }
        let id = match self.free.pop() {
            Some(id) => {
                self.nodes[id.index()] = node;
                id
            }
            None => {
                self.nodes.push(node);
                NodeId(self.nodes.len() as u32 - 1)
            }
        };
        self.live += 1;
        self.peak_live = self.peak_live.max(self.live);
        assert!(self.live <= self.capacity, "node pool over capacity");
        Ok(id)
    }

    /// Add a parentless node.
    pub fn add_root(&mut self) -> Result<NodeId> {
        let id = self.store(Node::new(None, None, 1.0, 0))?;
        self.touch(id);
        Ok(id)
    }

    /// Give `parent` a child through its edge `edge`. Fails with
    /// `pool-exhausted` when the pool is at capacity.
    pub fn add_child(&mut self, parent: NodeId, edge: usize) -> Result<NodeId> {
        let p = self.node(parent);
        let e = p.edges.as_ref().and_then(|es| es.get(edge)).copied();
        let Some(e) = e else {
            return Err(Error::InvalidConfig("no such edge"));
        };
        debug_assert!(e.child.is_none());
        let depth = p.depth + 1;
        let id = self.store(Node::new(Some(parent), Some(e.action), e.prior, depth))?;
        let p = self.node_mut(parent);
        p.live_children += 1;
        if let Some(es) = p.edges.as_mut() {
            es[edge].child = Some(id);
        }
        self.touch(id);
        Ok(id)
    }

    /// Install candidate moves on a node that has none yet.
    pub fn set_edges(&mut self, id: NodeId, edges: Vec<Edge>) {
        let node = self.node_mut(id);
        debug_assert!(node.edges.is_none());
        node.edges = Some(edges);
    }

    /// Mark a node as used now.
    pub fn touch(&mut self, id: NodeId) {
        self.clock += 1;
        let stamp = self.clock;
        let node = self.node_mut(id);
        node.last_touch = stamp;
        if node.live_children == 0 {
            self.queue.push(Reverse((stamp, id.0)));
        }
        if self.queue.len() > 8 * self.capacity + 1024 {
            self.compact_queue();
        }
    }

    fn compact_queue(&mut self) {
        let mut fresh = BinaryHeap::with_capacity(self.live);
        for (i, n) in self.nodes.iter().enumerate() {
            if n.live && n.live_children == 0 {
                fresh.push(Reverse((n.last_touch, i as u32)));
            }
        }
        self.queue = fresh;
    }

    /// Free the least recently touched leaf that is neither a root nor in
    /// `protected`, detaching it from its parent.
    pub fn recycle(&mut self, protected: &[NodeId]) -> Result<NodeId> {
        let mut held = Vec::new();
        let mut found = None;
        while let Some(Reverse((stamp, raw))) = self.queue.pop() {
            let id = NodeId(raw);
            let n = &self.nodes[id.index()];
            if !n.live || n.last_touch != stamp || n.live_children != 0 {
                continue;
            }
            if n.parent.is_none() || protected.contains(&id) {
                held.push(Reverse((stamp, raw)));
                continue;
            }
            found = Some(id);
            break;
        }
        self.queue.extend(held);
        let id = found.ok_or(Error::PoolExhausted)?;

        let (parent, action) = {
            let n = self.node_mut(id);
            n.live = false;
            (n.parent.expect("roots are never recycled"), n.action)
        };
        let p = self.node_mut(parent);
        p.live_children -= 1;
        if let Some(edge) = p
            .edges
            .as_mut()
            .and_then(|es| es.iter_mut().find(|e| Some(e.action) == action))
        {
            edge.child = None;
        }
        if p.live_children == 0 {
            let stamp = p.last_touch;
            self.queue.push(Reverse((stamp, parent.0)));
        }
        self.free.push(id);
        self.live -= 1;
        self.recycled += 1;
        Ok(id)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub iterations: u32,
    pub expanded: u64,
    pub recycled: u64,
    pub max_depth_reached: u32,
    /// Iterations that found the pool full with nothing recyclable.
    pub pool_exhausted: u64,
    pub peak_live: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchResult {
    pub chosen: Action,
    /// Root candidates in row-major order with their visit counts.
    pub visits: Vec<(Action, u32)>,
    /// Mean value for the side to move at the root.
    pub root_value: f64,
    /// Visit-proportional distribution over all legal moves.
    pub target: PolicyDist,
    pub stats: SearchStats,
}

impl SearchResult {
    /// Root candidates by decreasing visits, row-major on ties.
    pub fn ranked(&self) -> Vec<Action> {
        let mut v = self.visits.clone();
        v.sort_by(|a, b| b.1.cmp(&a.1));
        v.into_iter().map(|(a, _)| a).collect()
    }
}

/// Incremental pattern-policy rollouts.
///
/// Scores are cached per empty cell for both sides to move; placing a stone
/// only rescores the cells inside its radius.
pub(crate) struct Rollout {
    spec: GameSpec,
    hood: Neighbourhoods,
    scorer: Scorer,
    empties: Vec<u16>,
    slot_of: Vec<u32>,
    codes: Vec<u128>,
    scores: [Vec<f64>; 2],
    candidates: Vec<u16>,
    weights: Vec<f64>,
}

impl Rollout {
    pub(crate) fn new(fs: &FeatureSet, spec: &GameSpec) -> Self {
        let n = spec.cells();
        Rollout {
            spec: *spec,
            hood: fs.neighbourhoods(spec),
            scorer: fs.scorer(),
            empties: Vec::with_capacity(n),
            slot_of: alloc::vec![u32::MAX; n],
            codes: alloc::vec![0; n],
            scores: [alloc::vec![0.0; n], alloc::vec![0.0; n]],
            candidates: Vec::with_capacity(n),
            weights: Vec::with_capacity(n),
        }
    }

    /// Pattern-policy distribution over the legal moves of `state`.
    pub(crate) fn policy(&self, state: &GameState) -> PolicyDist {
        let legal = state.legal_indices();
        let actions: Vec<Action> = legal.iter().map(|&i| self.spec.action(i)).collect();
        if self.scorer.is_flat() {
            return PolicyDist::uniform(actions);
        }
        let scores: Vec<f64> = legal
            .iter()
            .map(|&i| {
                let raw = self.hood.raw_code(state.cells(), i);
                self.scorer
                    .score(crate::features::relative_code(raw, state.to_move()))
            })
            .collect();
        PolicyDist::softmax(actions, &scores)
    }

    fn rescore(&mut self, i: usize) {
        let code = self.codes[i];
        self.scores[0][i] = self.scorer.score(code);
        self.scores[1][i] = self.scorer.score(crate::features::swap_sides(code));
    }

    /// Value for the side to move in `start`.
    pub(crate) fn run(&mut self, start: &GameState, epsilon: f64, cap: u32, rng: &mut Rng) -> i8 {
        let me = start.to_move();
        if start.is_terminal() {
            return start.outcome().value_for(me);
        }
        if cap == 0 {
            return 0;
        }
        let flat = self.scorer.is_flat();
        let renju = self.spec.rules == Rules::Renju;
        let mut st = start.clone();
        self.empties.clear();
        for (i, &c) in st.cells().iter().enumerate() {
            if c == Cell::Empty {
                self.slot_of[i] = self.empties.len() as u32;
                self.empties.push(i as u16);
            }
        }
        if !flat {
            for k in 0..self.empties.len() {
                let i = self.empties[k] as usize;
                self.codes[i] = self.hood.raw_code(st.cells(), i);
                self.rescore(i);
            }
        }
        for _ in 0..cap {
            let side = st.to_move();
            self.candidates.clear();
            if renju && side == Player::P1 {
                let spec = self.spec;
                self.candidates.extend(
                    self.empties
                        .iter()
                        .copied()
                        .filter(|&i| st.is_legal(spec.action(i as usize))),
                );
            } else {
                self.candidates.extend_from_slice(&self.empties);
            }
            if self.candidates.is_empty() {
                break;
            }
            let pick = if flat || rng.gen::<f64>() < epsilon {
                self.candidates[rng.gen_range(0..self.candidates.len())]
            } else {
                let scores = &self.scores[side as usize];
                let max = self
                    .candidates
                    .iter()
                    .map(|&i| scores[i as usize])
                    .fold(f64::NEG_INFINITY, f64::max);
                self.weights.clear();
                let mut total = 0.0;
                for &i in &self.candidates {
                    let w = libm::exp(scores[i as usize] - max);
                    total += w;
                    self.weights.push(total);
                }
                let r = rng.gen::<f64>() * total;
                let k = self.weights.partition_point(|&c| c <= r);
                self.candidates[k.min(self.candidates.len() - 1)]
            };
            let idx = pick as usize;
            st.place(idx);
            let slot = self.slot_of[idx] as usize;
            let last = *self.empties.last().expect("non-empty");
            self.empties.swap_remove(slot);
            if (last as usize) != idx {
                self.slot_of[last as usize] = slot as u32;
            }
            self.slot_of[idx] = u32::MAX;
            if !flat {
                let stone = side.cell() as u128;
                for s in 0..self.hood.neighbours(idx).len() {
                    let n = self.hood.neighbours(idx)[s];
                    if n == u16::MAX || st.cells()[n as usize] != Cell::Empty {
                        continue;
                    }
                    let back = self.hood.mirror(s);
                    self.codes[n as usize] |= stone << (2 * back);
                    self.rescore(n as usize);
                }
            }
            if st.is_terminal() {
                break;
            }
        }
        let out = st.outcome();
        if out.terminal {
            out.value_for(me)
        } else {
            0
        }
    }
}

/// Play from `state` until the game ends or `cap` plies have been played.
/// Each ply is uniform with probability `epsilon`, otherwise drawn from the
/// pattern policy. Returns the result for the side to move in `state`;
/// truncated games count as draws.
pub fn playout(state: &GameState, fs: &FeatureSet, epsilon: f64, cap: u32, rng: &mut Rng) -> i8 {
    Rollout::new(fs, state.spec()).run(state, epsilon, cap, rng)
}

/// Reusable search instance. Owns its pool and counts how often it ran.
pub struct Searcher {
    pool: NodePool,
    calls: u64,
    path: Vec<NodeId>,
}

impl Default for Searcher {
    fn default() -> Self {
        Searcher::new()
    }
}

struct Ctx<'a> {
    cfg: &'a SearchConfig,
    part: &'a PartitionParams,
    rollout: Rollout,
    rng: Rng,
    stats: SearchStats,
}

impl Searcher {
    pub fn new() -> Self {
        Searcher {
            pool: NodePool::new(2),
            calls: 0,
            path: Vec::new(),
        }
    }

    /// Number of completed or attempted searches.
    pub fn calls(&self) -> u64 {
        self.calls
    }

    /// Tree left behind by the last search.
    pub fn pool(&self) -> &NodePool {
        &self.pool
    }

    pub fn search(
        &mut self,
        state: &GameState,
        fs: &FeatureSet,
        cfg: &SearchConfig,
        part: &PartitionParams,
    ) -> Result<SearchResult> {
        self.calls += 1;
        cfg.validate()?;
        if state.is_terminal() {
            return Err(Error::TerminalState);
        }
        self.pool.reset(cfg.node_cap);
        let root = self.pool.add_root()?;
        let mut ctx = Ctx {
            cfg,
            part,
            rollout: Rollout::new(fs, state.spec()),
            rng: rng::from_seed(cfg.seed),
            stats: SearchStats::default(),
        };
        self.expand(&mut ctx, root, state);
        for _ in 0..cfg.iterations {
            self.iterate(&mut ctx, root, state);
            ctx.stats.iterations += 1;
        }
        ctx.stats.recycled = self.pool.recycled();
        ctx.stats.peak_live = self.pool.peak_live();
        Ok(self.result(root, state, ctx.stats))
    }

    fn expand(&mut self, ctx: &mut Ctx<'_>, id: NodeId, state: &GameState) {
        let depth = self.pool.node(id).depth;
        let focused = match ctx.cfg.focus {
            Focus::Off => false,
            Focus::RootOnly => depth == 0,
            Focus::All => true,
        };
        let pi = ctx.rollout.policy(state);
        let spec = state.spec();
        let mut edges: Vec<Edge> = if focused {
            let part = partition(&pi, ctx.part.tau, ctx.part.chunk_cap);
            let mass: f64 = part.good.iter().map(|&a| pi.prob_of(a)).sum();
            part.good
                .iter()
                .map(|&a| Edge {
                    action: a,
                    prior: pi.prob_of(a) / mass,
                    child: None,
                })
                .collect()
        } else {
            pi.actions
                .iter()
                .zip(&pi.probs)
                .map(|(&a, &p)| Edge {
                    action: a,
                    prior: p,
                    child: None,
                })
                .collect()
        };
        edges.sort_by_key(|e| spec.index(e.action));
        self.pool.set_edges(id, edges);
    }

    fn select_edge(&self, ctx: &Ctx<'_>, id: NodeId) -> Option<usize> {
        let node = self.pool.node(id);
        let edges = node.edges.as_ref()?;
        let sqrt_n = libm::sqrt(node.visits.max(1) as f64);
        let mut best: Option<(f64, usize)> = None;
        for (i, e) in edges.iter().enumerate() {
            let (q, n) = match e.child {
                Some(c) => {
                    let child = self.pool.node(c);
                    (child.mean_value(), child.visits)
                }
                None => (0.0, 0),
            };
            let score = q + ctx.cfg.c_puct * e.prior * sqrt_n / (1.0 + n as f64);
            if best.is_none_or(|(b, _)| score > b) {
                best = Some((score, i));
            }
        }
        best.map(|(_, i)| i)
    }

    fn iterate(&mut self, ctx: &mut Ctx<'_>, root: NodeId, root_state: &GameState) {
        let mut state = root_state.clone();
        let mut node = root;
        self.path.clear();
        self.path.push(root);
        self.pool.touch(root);
        // value for the player who moved into the last node of the path
        let leaf_value: f64 = loop {
            let n = self.pool.node(node);
            if let Some(v) = n.terminal {
                break v;
            }
            if ctx.cfg.depth_cap.is_some_and(|d| n.depth >= d) {
                break -self.playout(ctx, &state);
            }
            if n.edges.is_none() {
                self.expand(ctx, node, &state);
            }
            let Some(e) = self.select_edge(ctx, node) else {
                // no candidates although the game is not over
                break 0.0;
            };
            let edge = self.pool.node(node).edges.as_ref().expect("expanded")[e];
            if let Some(child) = edge.child {
                state.place(state.spec().index(edge.action));
                node = child;
                self.path.push(child);
                self.pool.touch(child);
                continue;
            }
            if self.pool.is_full() && self.pool.recycle(&self.path).is_err() {
                ctx.stats.pool_exhausted += 1;
                break -self.playout(ctx, &state);
            }
            let mover = state.to_move();
            state.place(state.spec().index(edge.action));
            let child = self
                .pool
                .add_child(node, e)
                .expect("capacity was made available");
            ctx.stats.expanded += 1;
            let out = state.outcome();
            let c = self.pool.node_mut(child);
            ctx.stats.max_depth_reached = ctx.stats.max_depth_reached.max(c.depth);
            self.path.push(child);
            if out.terminal {
                let v = out.value_for(mover) as f64;
                c.terminal = Some(v);
                break v;
            }
            break -self.playout(ctx, &state);
        };
        let mut v = leaf_value;
        for &id in self.path.iter().rev() {
            let n = self.pool.node_mut(id);
            n.visits += 1;
            n.value += v;
            v = -v;
        }
    }

    fn playout(&self, ctx: &mut Ctx<'_>, state: &GameState) -> f64 {
        ctx.rollout
            .run(state, ctx.cfg.epsilon, ctx.cfg.playout_cap, &mut ctx.rng) as f64
    }

    fn result(&self, root: NodeId, state: &GameState, stats: SearchStats) -> SearchResult {
        let r = self.pool.node(root);
        let edges = r.edges.as_deref().unwrap_or(&[]);
        let visits: Vec<(Action, u32)> = edges
            .iter()
            .map(|e| (e.action, e.child.map_or(0, |c| self.pool.node(c).visits)))
            .collect();
        let total: u32 = visits.iter().map(|v| v.1).sum();

        // A candidate that wins on the spot is proven and beats any visit
        // count; a forced win one move later can collect as many visits.
        let mover = state.to_move();
        let wins_now = |a: Action| {
            state
                .apply(a)
                .is_ok_and(|s| s.outcome().winner() == Some(mover))
        };
        let mut chosen: Option<(bool, u32, f64, Action)> = None;
        for (e, &(a, n)) in edges.iter().zip(&visits) {
            // proven win, then most visits, then highest prior, then row-major
            let key = (wins_now(a), n, e.prior);
            if chosen.is_none_or(|(bw, bn, bp, _)| {
                (key.0, key.1) > (bw, bn) || ((key.0, key.1) == (bw, bn) && key.2 > bp)
            }) {
                chosen = Some((key.0, key.1, key.2, a));
            }
        }
        let chosen = chosen
            .map(|c| c.3)
            .expect("non-terminal root has candidates");

        let legal = state.legal_actions().expect("non-terminal root");
        let probs = legal
            .iter()
            .map(|&a| {
                let Some(pos) = edges.iter().position(|e| e.action == a) else {
                    return 0.0;
                };
                if total > 0 {
                    visits[pos].1 as f64 / total as f64
                } else {
                    edges[pos].prior
                }
            })
            .collect();

        let (mut w, mut n) = (0.0, 0u32);
        for e in edges {
            if let Some(c) = e.child {
                w += self.pool.node(c).value;
                n += self.pool.node(c).visits;
            }
        }
        SearchResult {
            chosen,
            visits,
            root_value: if n > 0 { w / n as f64 } else { 0.0 },
            target: PolicyDist {
                actions: legal,
                probs,
            },
            stats,
        }
    }
}

/// One-shot search with a fresh [`Searcher`].
pub fn search(
    state: &GameState,
    fs: &FeatureSet,
    cfg: &SearchConfig,
    part: &PartitionParams,
) -> Result<SearchResult> {
    Searcher::new().search(state, fs, cfg, part)
}
