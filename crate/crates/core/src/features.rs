//! Spatial state-action features, the softmax move policy built on them,
//! action-set partitioning and the training updates.
//!
//! A feature is a small set of `(dx, dy, requirement)` constraints anchored
//! at a candidate move. It fires when any of its eight board-symmetry
//! variants is satisfied around the anchor. Matching works on a packed
//! neighbourhood code: two bits per offset inside the radius, so a variant
//! is a `(mask, value)` pair over a `u128`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::game::{Action, Cell, GameSpec, GameState, Player, Relative, Symmetry};

/// Largest radius that fits the packed neighbourhood code.
pub const MAX_RADIUS: u8 = 3;

pub type FeatureId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Constraint {
    pub dx: i8,
    pub dy: i8,
    pub req: Relative,
}

impl Constraint {
    pub fn new(dx: i8, dy: i8, req: Relative) -> Self {
        Constraint { dx, dy, req }
    }

    fn mapped(self, sym: Symmetry) -> Constraint {
        let (dx, dy) = sym.map_offset(self.dx as i32, self.dy as i32);
        Constraint::new(dx as i8, dy as i8, self.req)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Feature {
    constraints: Vec<Constraint>,
    pub weight: f64,
    pub generation: u32,
    pub parents: Option<(FeatureId, FeatureId)>,
}

impl Feature {
    pub fn new(
        mut constraints: Vec<Constraint>,
        weight: f64,
        generation: u32,
        parents: Option<(FeatureId, FeatureId)>,
    ) -> Self {
        constraints.sort();
        Feature {
            constraints,
            weight,
            generation,
            parents,
        }
    }

    /// Constraints sorted by `(dx, dy)`.
    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn is_bias(&self) -> bool {
        self.constraints.is_empty()
    }
}

/// Offset enumeration shared by every code of a given radius.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Layout {
    radius: i32,
}

impl Layout {
    fn slots(&self) -> usize {
        let side = (2 * self.radius + 1) as usize;
        side * side - 1
    }

    /// Slot of a non-zero offset inside the radius.
    fn slot(&self, dx: i32, dy: i32) -> usize {
        let side = 2 * self.radius + 1;
        let raw = ((dy + self.radius) * side + dx + self.radius) as usize;
        let centre = (side * side / 2) as usize;
        if raw > centre {
            raw - 1
        } else {
            raw
        }
    }

    fn offsets(&self) -> impl Iterator<Item = (i32, i32)> + '_ {
        let r = self.radius;
        (-r..=r)
            .flat_map(move |dy| (-r..=r).map(move |dx| (dx, dy)))
            .filter(|&o| o != (0, 0))
    }
}

#[derive(Clone, Debug, PartialEq)]
struct Compiled {
    /// Distinct symmetry images, each as a constraint list and a bit test.
    variants: Vec<(Vec<Constraint>, u128, u128)>,
}

impl Compiled {
    fn new(layout: &Layout, constraints: &[Constraint]) -> Self {
        let mut seen = BTreeSet::new();
        let mut variants = Vec::new();
        for sym in Symmetry::all() {
            let mut image: Vec<Constraint> = constraints.iter().map(|c| c.mapped(sym)).collect();
            image.sort();
            if !seen.insert(image.clone()) {
                continue;
            }
            let (mut mask, mut value) = (0u128, 0u128);
            for c in &image {
                let shift = 2 * layout.slot(c.dx as i32, c.dy as i32);
                mask |= 3 << shift;
                value |= (c.req as u128) << shift;
            }
            variants.push((image, mask, value));
        }
        Compiled { variants }
    }

    #[inline]
    fn matches(&self, code: u128) -> bool {
        self.variants.iter().any(|&(_, m, v)| code & m == v)
    }

    fn matching_variants(&self, code: u128) -> impl Iterator<Item = &[Constraint]> {
        self.variants
            .iter()
            .filter(move |&&(_, m, v)| code & m == v)
            .map(|(c, _, _)| c.as_slice())
    }
}

/// Minimum over the eight symmetry images of the sorted constraint list.
fn canonical(constraints: &[Constraint]) -> Vec<Constraint> {
    Symmetry::all()
        .map(|sym| {
            let mut image: Vec<Constraint> = constraints.iter().map(|c| c.mapped(sym)).collect();
            image.sort();
            image
        })
        .min()
        .unwrap_or_default()
}

/// Union of two constraint lists, `None` when they disagree on an offset.
pub fn conjoin(a: &[Constraint], b: &[Constraint]) -> Option<Vec<Constraint>> {
    let mut by_offset: BTreeMap<(i8, i8), Relative> = BTreeMap::new();
    for c in a.iter().chain(b) {
        match by_offset.insert((c.dx, c.dy), c.req) {
            Some(prev) if prev != c.req => return None,
            _ => {}
        }
    }
    Some(
        by_offset
            .into_iter()
            .map(|((dx, dy), req)| Constraint::new(dx, dy, req))
            .collect(),
    )
}

/// Per-board lookup from (cell, slot) to neighbouring cell index.
#[derive(Clone, Debug)]
pub(crate) struct Neighbourhoods {
    slots: usize,
    /// `u16::MAX` marks off-board.
    table: Vec<u16>,
    /// For each slot, the slot of the negated offset.
    mirror: Vec<usize>,
}

impl Neighbourhoods {
    const OFF: u16 = u16::MAX;

    fn new(spec: &GameSpec, layout: &Layout) -> Self {
        let slots = layout.slots();
        let offsets: Vec<(i32, i32)> = layout.offsets().collect();
        let mut table = Vec::with_capacity(spec.cells() * slots);
        for i in 0..spec.cells() {
            let a = spec.action(i);
            for &(dx, dy) in &offsets {
                let (c, r) = (a.col as i32 + dx, a.row as i32 + dy);
                table.push(if spec.contains(c, r) {
                    spec.index(Action::new(c as u8, r as u8)) as u16
                } else {
                    Self::OFF
                });
            }
        }
        let mirror = offsets
            .iter()
            .map(|&(dx, dy)| layout.slot(-dx, -dy))
            .collect();
        Neighbourhoods {
            slots,
            table,
            mirror,
        }
    }

    /// Code with P1 stones as `Friend` bits and P2 stones as `Foe` bits.
    #[inline]
    pub(crate) fn raw_code(&self, cells: &[Cell], index: usize) -> u128 {
        let row = &self.table[index * self.slots..(index + 1) * self.slots];
        let mut code = 0u128;
        for (slot, &n) in row.iter().enumerate() {
            let bits = if n == Self::OFF {
                Relative::OffBoard as u128
            } else {
                cells[n as usize] as u128
            };
            code |= bits << (2 * slot);
        }
        code
    }

    #[inline]
    pub(crate) fn neighbours(&self, index: usize) -> &[u16] {
        &self.table[index * self.slots..(index + 1) * self.slots]
    }

    #[inline]
    pub(crate) fn mirror(&self, slot: usize) -> usize {
        self.mirror[slot]
    }
}

const LOW_BITS: u128 = 0x5555_5555_5555_5555_5555_5555_5555_5555;

/// Swap the Friend and Foe codes in every slot; Empty and OffBoard are fixed.
#[inline]
pub(crate) fn swap_sides(code: u128) -> u128 {
    ((code & LOW_BITS) << 1) | ((code >> 1) & LOW_BITS)
}

#[inline]
pub(crate) fn relative_code(raw: u128, to_move: Player) -> u128 {
    match to_move {
        Player::P1 => raw,
        Player::P2 => swap_sides(raw),
    }
}

/// Only the features with non-zero weight, ready for scoring.
#[derive(Clone, Debug)]
pub(crate) struct Scorer {
    entries: Vec<(f64, Compiled)>,
}

impl Scorer {
    pub(crate) fn is_flat(&self) -> bool {
        self.entries.is_empty()
    }

    #[inline]
    pub(crate) fn score(&self, code: u128) -> f64 {
        self.entries
            .iter()
            .filter(|(_, c)| c.matches(code))
            .map(|(w, _)| w)
            .sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureSet {
    features: Vec<Feature>,
    compiled: Vec<Compiled>,
    /// Exact constraint sets, for the no-duplicates invariant.
    exact: BTreeSet<Vec<Constraint>>,
    /// Canonical forms; growth skips anything symmetric to a feature.
    known: BTreeSet<Vec<Constraint>>,
    layout: Layout,
    radius: u8,
    max_features: usize,
    growth_rounds: u32,
}

impl FeatureSet {
    /// Bias plus one feature per (offset within `radius`, Friend/Foe/Empty),
    /// all weights zero.
    pub fn init_atomic(radius: u8, max_features: usize) -> Result<Self> {
        let mut fs = FeatureSet::empty(radius, max_features)?;
        fs.push(Vec::new(), 0.0, 0, None)?;
        let offsets: Vec<(i32, i32)> = fs.layout.offsets().collect();
        for (dx, dy) in offsets {
            for req in [Relative::Friend, Relative::Foe, Relative::Empty] {
                fs.push_raw(
                    alloc::vec![Constraint::new(dx as i8, dy as i8, req)],
                    0.0,
                    0,
                    None,
                );
            }
        }
        Ok(fs)
    }

    /// Rebuild from stored features, checking every invariant.
    pub fn from_features(radius: u8, max_features: usize, features: Vec<Feature>) -> Result<Self> {
        let mut fs = FeatureSet::empty(radius, max_features)?;
        for f in features {
            fs.push(f.constraints, f.weight, f.generation, f.parents)?;
        }
        fs.growth_rounds = fs.features.iter().map(|f| f.generation).max().unwrap_or(0);
        Ok(fs)
    }

    fn empty(radius: u8, max_features: usize) -> Result<Self> {
        if radius == 0 || radius > MAX_RADIUS {
            return Err(Error::InvalidConfig("feature radius must be in 1..=3"));
        }
        Ok(FeatureSet {
            features: Vec::new(),
            compiled: Vec::new(),
            exact: BTreeSet::new(),
            known: BTreeSet::new(),
            layout: Layout {
                radius: radius as i32,
            },
            radius,
            max_features,
            growth_rounds: 0,
        })
    }

    fn push(
        &mut self,
        mut constraints: Vec<Constraint>,
        weight: f64,
        generation: u32,
        parents: Option<(FeatureId, FeatureId)>,
    ) -> Result<FeatureId> {
        constraints.sort();
        let r = self.radius as i32;
        for (i, c) in constraints.iter().enumerate() {
            if (c.dx, c.dy) == (0, 0) {
                return Err(Error::InvalidFeature("constraint on the anchor cell"));
            }
            if (c.dx as i32).abs() > r || (c.dy as i32).abs() > r {
                return Err(Error::InvalidFeature("offset outside radius"));
            }
            if i > 0 && (constraints[i - 1].dx, constraints[i - 1].dy) == (c.dx, c.dy) {
                return Err(Error::InvalidFeature("two constraints on one offset"));
            }
        }
        if constraints.is_empty() && self.features.iter().any(Feature::is_bias) {
            return Err(Error::InvalidFeature("second bias feature"));
        }
        if !weight.is_finite() {
            return Err(Error::InvalidFeature("non-finite weight"));
        }
        if self.exact.contains(&constraints) {
            return Err(Error::InvalidFeature("duplicate constraint set"));
        }
        Ok(self.push_raw(constraints, weight, generation, parents))
    }

    fn push_raw(
        &mut self,
        constraints: Vec<Constraint>,
        weight: f64,
        generation: u32,
        parents: Option<(FeatureId, FeatureId)>,
    ) -> FeatureId {
        self.known.insert(canonical(&constraints));
        self.exact.insert(constraints.clone());
        self.compiled
            .push(Compiled::new(&self.layout, &constraints));
        self.features.push(Feature {
            constraints,
            weight,
            generation,
            parents,
        });
        self.features.len() - 1
    }

    pub fn radius(&self) -> u8 {
        self.radius
    }

    pub fn max_features(&self) -> usize {
        self.max_features
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    pub fn feature(&self, id: FeatureId) -> &Feature {
        &self.features[id]
    }

    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.features.iter().map(|f| f.weight)
    }

    pub fn set_weight(&mut self, id: FeatureId, weight: f64) {
        self.features[id].weight = weight;
    }

    pub(crate) fn neighbourhoods(&self, spec: &GameSpec) -> Neighbourhoods {
        Neighbourhoods::new(spec, &self.layout)
    }

    pub(crate) fn scorer(&self) -> Scorer {
        Scorer {
            entries: self
                .features
                .iter()
                .zip(&self.compiled)
                .filter(|(f, _)| f.weight != 0.0)
                .map(|(f, c)| (f.weight, c.clone()))
                .collect(),
        }
    }

    fn active_for_code(&self, code: u128) -> impl Iterator<Item = FeatureId> + '_ {
        self.compiled
            .iter()
            .enumerate()
            .filter(move |(_, c)| c.matches(code))
            .map(|(i, _)| i)
    }

    /// Features firing for move `a` in `state`, in id order.
    pub fn active_features(&self, state: &GameState, a: Action) -> Vec<FeatureId> {
        let hood = self.neighbourhoods(state.spec());
        let code = relative_code(
            hood.raw_code(state.cells(), state.spec().index(a)),
            state.to_move(),
        );
        self.active_for_code(code).collect()
    }

    fn scores(&self, hood: &Neighbourhoods, state: &GameState, legal: &[Action]) -> Vec<f64> {
        let scorer = self.scorer();
        legal
            .iter()
            .map(|&a| {
                let raw = hood.raw_code(state.cells(), state.spec().index(a));
                scorer.score(relative_code(raw, state.to_move()))
            })
            .collect()
    }

    /// Softmax over legal moves of the summed weights of active features.
    pub fn policy(&self, state: &GameState) -> Result<PolicyDist> {
        let legal = state.legal_actions()?;
        let hood = self.neighbourhoods(state.spec());
        let scores = self.scores(&hood, state, &legal);
        Ok(PolicyDist::softmax(legal, &scores))
    }

    /// Mean cross-entropy of the batch and its gradient with respect to
    /// every weight.
    pub fn loss_and_gradient<'a, I>(&self, batch: I) -> Result<(f64, Vec<f64>)>
    where
        I: IntoIterator<Item = (&'a GameState, &'a PolicyDist)>,
    {
        let mut grad = alloc::vec![0.0; self.features.len()];
        let mut loss = 0.0;
        let mut n = 0usize;
        let scorer = self.scorer();
        let mut hood: Option<(GameSpec, Neighbourhoods)> = None;
        for (state, target) in batch {
            let legal = state.legal_actions()?;
            if legal != target.actions {
                return Err(Error::TargetMismatch);
            }
            if hood.as_ref().is_none_or(|(s, _)| s != state.spec()) {
                hood = Some((*state.spec(), self.neighbourhoods(state.spec())));
            }
            let (_, hood) = hood.as_ref().expect("set above");
            let codes: Vec<u128> = legal
                .iter()
                .map(|&a| {
                    relative_code(
                        hood.raw_code(state.cells(), state.spec().index(a)),
                        state.to_move(),
                    )
                })
                .collect();
            let scores: Vec<f64> = codes.iter().map(|&c| scorer.score(c)).collect();
            let pi = PolicyDist::softmax(legal, &scores);
            loss += pi.cross_entropy_from(target);
            for ((&code, &p), &t) in codes.iter().zip(&pi.probs).zip(&target.probs) {
                let diff = p - t;
                if diff == 0.0 {
                    continue;
                }
                for f in self.active_for_code(code) {
                    grad[f] += diff;
                }
            }
            n += 1;
        }
        if n == 0 {
            return Ok((0.0, grad));
        }
        let inv = 1.0 / n as f64;
        grad.iter_mut().for_each(|g| *g *= inv);
        Ok((loss * inv, grad))
    }

    /// One batch-averaged gradient descent step on cross-entropy towards the
    /// targets. Returns the loss before the update. Weights are untouched on
    /// error.
    pub fn grad_step<'a, I>(&mut self, batch: I, eta: f64) -> Result<f64>
    where
        I: IntoIterator<Item = (&'a GameState, &'a PolicyDist)>,
    {
        if !(eta > 0.0) {
            return Err(Error::InvalidConfig("learning rate must be positive"));
        }
        let (loss, grad) = self.loss_and_gradient(batch)?;
        for (f, g) in self.features.iter_mut().zip(grad) {
            f.weight -= eta * g;
        }
        Ok(loss)
    }

    /// Conjunction candidates of co-active feature pairs, measured on the
    /// `per_sample` moves with the largest policy error in each sample, most
    /// frequent first. Each union is built from the symmetry variants that
    /// actually matched, so it describes a pattern that occurred on the board.
    pub fn growth_candidates(
        &self,
        samples: &[(GameState, PolicyDist, PolicyDist)],
        per_sample: usize,
    ) -> Vec<GrowthCandidate> {
        // Candidates are keyed by their canonical shape, so the same board
        // pattern reached through different parent variants is counted once
        // per move and adds up across moves.
        let mut counts: BTreeMap<Vec<Constraint>, (usize, (FeatureId, FeatureId))> =
            BTreeMap::new();
        let mut hood: Option<(GameSpec, Neighbourhoods)> = None;
        for (state, target, pi) in samples {
            if hood.as_ref().is_none_or(|(s, _)| s != state.spec()) {
                hood = Some((*state.spec(), self.neighbourhoods(state.spec())));
            }
            let (_, hood) = hood.as_ref().expect("set above");
            let mut errors: Vec<(f64, usize)> = pi
                .actions
                .iter()
                .enumerate()
                .map(|(i, &a)| (libm::fabs(pi.probs[i] - target.prob_of(a)), i))
                .collect();
            // largest error first, lowest index on ties
            errors.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
            for &(_, i) in errors.iter().take(per_sample) {
                let a = pi.actions[i];
                let code = relative_code(
                    hood.raw_code(state.cells(), state.spec().index(a)),
                    state.to_move(),
                );
                let active: Vec<(FeatureId, Vec<&[Constraint]>)> = self
                    .compiled
                    .iter()
                    .enumerate()
                    .filter(|(f, _)| !self.features[*f].is_bias())
                    .map(|(f, c)| (f, c.matching_variants(code).collect::<Vec<_>>()))
                    .filter(|(_, v)| !v.is_empty())
                    .collect();
                let mut here: BTreeMap<Vec<Constraint>, (FeatureId, FeatureId)> = BTreeMap::new();
                for (x, (f, vfs)) in active.iter().enumerate() {
                    for (g, vgs) in &active[x + 1..] {
                        for vf in vfs {
                            for vg in vgs {
                                if let Some(union) = conjoin(vf, vg) {
                                    here.entry(canonical(&union)).or_insert((*f, *g));
                                }
                            }
                        }
                    }
                }
                for (shape, parents) in here {
                    counts.entry(shape).or_insert((0, parents)).0 += 1;
                }
            }
        }
        let mut ranked: Vec<GrowthCandidate> = counts
            .into_iter()
            .map(|(constraints, (count, parents))| GrowthCandidate {
                constraints,
                count,
                parents,
            })
            .collect();
        ranked.sort_by(|x, y| {
            y.count
                .cmp(&x.count)
                .then(x.constraints.cmp(&y.constraints))
        });
        ranked
    }

    /// Add the first `max_new` new, in-radius candidates from
    /// [`FeatureSet::growth_candidates`]. New features start at weight zero.
    pub fn grow_features(
        &mut self,
        samples: &[(GameState, PolicyDist, PolicyDist)],
        max_new: usize,
        per_sample: usize,
    ) -> Vec<FeatureId> {
        let ranked = self.growth_candidates(samples, per_sample);
        self.growth_rounds += 1;
        let generation = self.growth_rounds;
        let mut added = Vec::new();
        for GrowthCandidate {
            constraints: union,
            parents: (f, g),
            ..
        } in ranked
        {
            if added.len() >= max_new || self.features.len() >= self.max_features {
                break;
            }
            let inside = union.iter().all(|c| {
                (c.dx as i32).abs() <= self.layout.radius
                    && (c.dy as i32).abs() <= self.layout.radius
            });
            if !inside || self.known.contains(&canonical(&union)) {
                continue;
            }
            added.push(self.push_raw(union, 0.0, generation, Some((f, g))));
        }
        added
    }
}

/// A possible conjunction and how many high-error moves it matched.
#[derive(Clone, Debug, PartialEq)]
pub struct GrowthCandidate {
    pub constraints: Vec<Constraint>,
    pub count: usize,
    pub parents: (FeatureId, FeatureId),
}

/// Probability distribution over the legal moves of one state, in legal
/// move order.
#[derive(Clone, Debug, PartialEq)]
pub struct PolicyDist {
    pub actions: Vec<Action>,
    pub probs: Vec<f64>,
}

impl PolicyDist {
    pub fn uniform(actions: Vec<Action>) -> Self {
        let p = 1.0 / actions.len() as f64;
        let probs = alloc::vec![p; actions.len()];
        PolicyDist { actions, probs }
    }

    /// Numerically stable softmax of `scores`.
    pub fn softmax(actions: Vec<Action>, scores: &[f64]) -> Self {
        let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut probs: Vec<f64> = scores.iter().map(|&s| libm::exp(s - max)).collect();
        let sum: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|p| *p /= sum);
        PolicyDist { actions, probs }
    }

    pub fn one_hot(actions: Vec<Action>, chosen: Action) -> Self {
        let probs = actions
            .iter()
            .map(|&a| if a == chosen { 1.0 } else { 0.0 })
            .collect();
        PolicyDist { actions, probs }
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn prob_of(&self, a: Action) -> f64 {
        self.actions
            .iter()
            .position(|&b| b == a)
            .map_or(0.0, |i| self.probs[i])
    }

    /// Most probable move, earliest in legal order on ties.
    pub fn argmax(&self) -> Option<Action> {
        let mut best: Option<(f64, Action)> = None;
        for (&a, &p) in self.actions.iter().zip(&self.probs) {
            if best.is_none_or(|(bp, _)| p > bp) {
                best = Some((p, a));
            }
        }
        best.map(|(_, a)| a)
    }

    /// Moves by decreasing probability, ties in legal order.
    pub fn ranked(&self) -> Vec<Action> {
        let mut order: Vec<usize> = (0..self.actions.len()).collect();
        order.sort_by(|&x, &y| self.probs[y].total_cmp(&self.probs[x]).then(x.cmp(&y)));
        order.into_iter().map(|i| self.actions[i]).collect()
    }

    /// `-sum target(a) ln self(a)`.
    pub fn cross_entropy_from(&self, target: &PolicyDist) -> f64 {
        target
            .probs
            .iter()
            .zip(&self.probs)
            .filter(|(&t, _)| t > 0.0)
            .map(|(&t, &p)| -t * libm::log(p))
            .sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PartitionParams {
    /// Relative threshold against the best move's probability.
    pub tau: f64,
    /// Most moves kept as "good".
    pub chunk_cap: usize,
}

impl Default for PartitionParams {
    fn default() -> Self {
        PartitionParams {
            tau: 0.1,
            chunk_cap: 7,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Partition {
    /// Good moves, most probable first.
    pub good: Vec<Action>,
    pub certain: bool,
    pub tau: f64,
    pub chunk_cap: usize,
}

/// Split moves into good (probability at least `tau` times the best, at most
/// `chunk_cap` of them) and bad. A single good move makes the split certain.
pub fn partition(p: &PolicyDist, tau: f64, chunk_cap: usize) -> Partition {
    let max = p.probs.iter().copied().fold(0.0, f64::max);
    let cap = chunk_cap.max(1);
    let good: Vec<Action> = p
        .ranked()
        .into_iter()
        .filter(|&a| p.prob_of(a) >= tau * max)
        .take(cap)
        .collect();
    Partition {
        certain: good.len() == 1,
        good,
        tau,
        chunk_cap: cap,
    }
}

impl Partition {
    pub fn from_params(p: &PolicyDist, params: &PartitionParams) -> Self {
        partition(p, params.tau, params.chunk_cap)
    }
}
