//! Nondeducibility on strategies.
//!
//! A machine violates NDS when some H strategy excludes a possible L view.
//! It suffices to look for strategies whose choice depends only on the time
//! and on H's knowledge set, so the search runs over pairs `(U, K)`: `U` is
//! the set of states consistent with the L view built so far (keeping it
//! possible) and `K` is the collection of knowledge sets H may hold while the
//! view is still not excluded. Each step picks an H action for every member
//! of `K`, an L action and an L observation. Once every member of `K` is
//! empty the strategy assembled along the path excludes the view.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use thiserror::Error;

use crate::error::WitnessError;
use crate::model::{is_possible_view, AgentId, Machine, View};
use crate::stateset::StateSet;

/// States reached from `k` under `(a_h, a_l)` that show `o_h` to H and `o_l` to L.
pub fn knowledge_update(
    m: &Machine,
    k: &StateSet,
    a_h: usize,
    o_h: usize,
    a_l: usize,
    o_l: usize,
) -> StateSet {
    let mut out = StateSet::empty(m.num_states());
    for t in k.iter() {
        for &s in m.succ(t, a_h, a_l) {
            if m.obs_h(s) == o_h && m.obs_l(s) == o_l {
                out.insert(s);
            }
        }
    }
    out
}

/// A state `(U, K)` of the strategy search. `ksets` is sorted and
/// deduplicated and may contain the empty set. The search itself keeps
/// only the inclusion-maximal nonempty members.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct KnowledgeCollection {
    pub universe: StateSet,
    pub ksets: Vec<StateSet>,
}

impl KnowledgeCollection {
    pub fn initial(m: &Machine) -> Self {
        let s0 = StateSet::singleton(m.num_states(), m.initial());
        KnowledgeCollection {
            universe: s0.clone(),
            ksets: vec![s0],
        }
    }

    /// Every knowledge set is empty: the view built so far is excluded.
    pub fn is_exhausted(&self) -> bool {
        self.ksets.iter().all(StateSet::is_empty)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepResult {
    Next(KnowledgeCollection),
    /// No state consistent with the view so far shows the requested L observation.
    Infeasible,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NdsError {
    #[error("strategy choice missing for knowledge set {0:?}")]
    RhoPartial(StateSet),
}

fn next_universe(m: &Machine, universe: &StateSet, a_l: usize, o_l: usize) -> StateSet {
    let mut out = StateSet::empty(m.num_states());
    for s in universe.iter() {
        for a in 0..m.num_h_actions() {
            for &t in m.succ(s, a, a_l) {
                if m.obs_l(t) == o_l {
                    out.insert(t);
                }
            }
        }
    }
    out
}

/// One transition of the strategy search with H choices `rho`.
pub fn nds_step(
    m: &Machine,
    q: &KnowledgeCollection,
    rho: &BTreeMap<StateSet, usize>,
    a_l: usize,
    o_l: usize,
) -> Result<StepResult, NdsError> {
    let mut choices = Vec::with_capacity(q.ksets.len());
    for k in &q.ksets {
        match rho.get(k) {
            Some(&a) => choices.push(a),
            None => return Err(NdsError::RhoPartial(k.clone())),
        }
    }
    let universe = next_universe(m, &q.universe, a_l, o_l);
    if universe.is_empty() {
        return Ok(StepResult::Infeasible);
    }
    let mut ksets: Vec<StateSet> = Vec::new();
    for (k, &a) in q.ksets.iter().zip(&choices) {
        for o_h in 0..m.num_observations() {
            ksets.push(knowledge_update(m, k, a, o_h, a_l, o_l));
        }
    }
    ksets.sort();
    ksets.dedup();
    Ok(StepResult::Next(KnowledgeCollection { universe, ksets }))
}

/// H's choice per step, keyed by H's knowledge set at that step.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StrategyTable {
    pub levels: Vec<BTreeMap<StateSet, usize>>,
}

impl StrategyTable {
    pub fn action(&self, step: usize, kset: &StateSet) -> Option<usize> {
        self.levels.get(step).and_then(|level| level.get(kset)).copied()
    }

    pub fn set(&mut self, step: usize, kset: StateSet, action: usize) {
        if self.levels.len() <= step {
            self.levels.resize_with(step + 1, BTreeMap::new);
        }
        self.levels[step].insert(kset, action);
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NdsWitness {
    pub excluded_view: View,
    pub strategy: StrategyTable,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NdsVerdict {
    Satisfies,
    Violates(NdsWitness),
    ResourceExceeded(String),
}

#[derive(Clone, Copy, Debug)]
pub struct NdsLimits {
    /// Cap on distinct `(U, K)` states.
    pub max_visited: usize,
    /// Cap on strategy choices enumerated for a single expansion.
    pub max_branching: usize,
    /// Only look for excluded views of at most this length.
    pub max_depth: Option<usize>,
}

impl Default for NdsLimits {
    fn default() -> Self {
        NdsLimits {
            max_visited: 1 << 20,
            max_branching: 1 << 20,
            max_depth: None,
        }
    }
}

impl NdsLimits {
    pub fn with_max_visited(max_visited: usize) -> Self {
        NdsLimits {
            max_visited,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug)]
pub struct NdsReport {
    pub verdict: NdsVerdict,
    pub visited: usize,
    /// Set when `max_depth` cut the search short, so `Satisfies` only
    /// covers views up to that length.
    pub truncated: bool,
}

struct Node {
    q: KnowledgeCollection,
    parent: usize,
    depth: usize,
    // choice for each member of the parent's ksets, then (a_l, o_l)
    rho: Vec<usize>,
    a_l: usize,
    o_l: usize,
}

/// Images of `k` under H action `a`, one per H observation. Observations no
/// successor shows give the empty set.
fn images(m: &Machine, k: &StateSet, a: usize, a_l: usize, o_l: usize) -> Vec<StateSet> {
    let mut out = vec![StateSet::empty(m.num_states()); m.num_observations()];
    for t in k.iter() {
        for &s in m.succ(t, a, a_l) {
            if m.obs_l(s) == o_l {
                out[m.obs_h(s)].insert(s);
            }
        }
    }
    out
}

/// Knowledge sets whose H actions offer the same options, an option being
/// the set of images one action produces. Members of a group all take the
/// same option: a collection that is a subset of another reaches the
/// all-empty collection whenever the larger one does, and mixing options
/// inside a group only adds sets.
struct Group {
    options: Vec<Vec<StateSet>>,
    members: Vec<Member>,
}

/// Index into the collection and the action realizing each option.
type Member = (usize, Vec<usize>);

impl Group {
    fn assign(&self, option: usize, rho: &mut [usize]) {
        for (i, actions) in &self.members {
            rho[*i] = actions[option];
        }
    }
}

fn choice_groups(m: &Machine, ksets: &[StateSet], a_l: usize, o_l: usize) -> Vec<Group> {
    let mut by_options: BTreeMap<Vec<Vec<StateSet>>, Vec<Member>> = BTreeMap::new();
    for (i, k) in ksets.iter().enumerate() {
        let mut options: BTreeMap<Vec<StateSet>, usize> = BTreeMap::new();
        for a in 0..m.num_h_actions() {
            let mut imgs = images(m, k, a, a_l, o_l);
            imgs.sort();
            imgs.dedup();
            options.entry(imgs).or_insert(a);
        }
        let actions = options.values().copied().collect();
        by_options
            .entry(options.into_keys().collect())
            .or_default()
            .push((i, actions));
    }
    by_options
        .into_iter()
        .map(|(options, members)| Group { options, members })
        .collect()
}

/// Mixed-radix increment, last position fastest. False once every
/// combination has been produced.
fn advance(counter: &mut [usize], radix: impl Fn(usize) -> usize) -> bool {
    for pos in (0..counter.len()).rev() {
        counter[pos] += 1;
        if counter[pos] < radix(pos) {
            return true;
        }
        counter[pos] = 0;
    }
    false
}

pub fn check_nds(m: &Machine, limits: &NdsLimits) -> NdsReport {
    let root = KnowledgeCollection::initial(m);
    let mut index: HashMap<KnowledgeCollection, usize> = HashMap::from([(root.clone(), 0)]);
    let mut nodes = vec![Node {
        q: root,
        parent: usize::MAX,
        depth: 0,
        rho: Vec::new(),
        a_l: 0,
        o_l: 0,
    }];
    let mut queue = VecDeque::from([0usize]);
    let mut truncated = false;
    let no = m.num_observations();

    while let Some(idx) = queue.pop_front() {
        if limits.max_depth.is_some_and(|d| nodes[idx].depth >= d) {
            truncated = true;
            continue;
        }
        let q = nodes[idx].q.clone();
        let depth = nodes[idx].depth;
        for a_l in 0..m.num_l_actions() {
            for o_l in 0..no {
                let universe = next_universe(m, &q.universe, a_l, o_l);
                if universe.is_empty() {
                    continue;
                }
                let groups = choice_groups(m, &q.ksets, a_l, o_l);
                let branching = groups
                    .iter()
                    .try_fold(1u128, |acc, g| acc.checked_mul(g.options.len() as u128))
                    .unwrap_or(u128::MAX);
                if branching > limits.max_branching as u128 {
                    return NdsReport {
                        verdict: NdsVerdict::ResourceExceeded(format!(
                            "{branching} distinct strategy choices for {} knowledge sets exceed the branching cap {}",
                            q.ksets.len(),
                            limits.max_branching
                        )),
                        visited: nodes.len(),
                        truncated,
                    };
                }
                let mut counter = vec![0usize; groups.len()];
                loop {
                    let mut ksets: Vec<StateSet> = Vec::new();
                    for (g, &c) in groups.iter().zip(&counter) {
                        ksets.extend(g.options[c].iter().cloned());
                    }
                    let next = KnowledgeCollection {
                        universe: universe.clone(),
                        ksets: maximal_sets(ksets),
                    };
                    if !index.contains_key(&next) {
                        let exhausted = next.is_exhausted();
                        let mut rho = vec![0usize; q.ksets.len()];
                        for (g, &c) in groups.iter().zip(&counter) {
                            g.assign(c, &mut rho);
                        }
                        index.insert(next.clone(), nodes.len());
                        nodes.push(Node {
                            q: next,
                            parent: idx,
                            depth: depth + 1,
                            rho,
                            a_l,
                            o_l,
                        });
                        if exhausted {
                            let witness = reconstruct(m, &nodes, nodes.len() - 1);
                            return NdsReport {
                                verdict: NdsVerdict::Violates(witness),
                                visited: nodes.len(),
                                truncated: false,
                            };
                        }
                        if nodes.len() > limits.max_visited {
                            return NdsReport {
                                verdict: NdsVerdict::ResourceExceeded(format!(
                                    "visited more than {} knowledge-collection states",
                                    limits.max_visited
                                )),
                                visited: nodes.len(),
                                truncated,
                            };
                        }
                        queue.push_back(nodes.len() - 1);
                    }
                    if !advance(&mut counter, |i| groups[i].options.len()) {
                        break;
                    }
                }
            }
        }
    }
    NdsReport {
        verdict: NdsVerdict::Satisfies,
        visited: nodes.len(),
        truncated,
    }
}

/// The inclusion-maximal nonempty members, sorted.
fn maximal_sets(mut sets: Vec<StateSet>) -> Vec<StateSet> {
    sets.retain(|k| !k.is_empty());
    sets.sort();
    sets.dedup();
    // larger sets first so each candidate only meets possible supersets
    sets.sort_by_key(|k| std::cmp::Reverse(k.len()));
    let mut out: Vec<StateSet> = Vec::with_capacity(sets.len());
    for k in sets {
        if !out.iter().any(|big| k.is_subset(big)) {
            out.push(k);
        }
    }
    out.sort();
    out
}

/// Replays the path to node `idx` on full knowledge collections. A set
/// that the search dropped for being inside a kept set plays the kept set's
/// action; its images then stay inside the kept set's images.
fn reconstruct(m: &Machine, nodes: &[Node], mut idx: usize) -> NdsWitness {
    let mut path = Vec::new();
    while idx != 0 {
        path.push(idx);
        idx = nodes[idx].parent;
    }
    path.reverse();
    let mut view = View::new(AgentId::L, m.obs_l(m.initial()));
    let mut strategy = StrategyTable::default();
    let mut full: BTreeSet<StateSet> = BTreeSet::from([StateSet::singleton(m.num_states(), m.initial())]);
    for (step, &i) in path.iter().enumerate() {
        let node = &nodes[i];
        let kept = &nodes[node.parent].q.ksets;
        let mut next = BTreeSet::new();
        for k in full.iter().filter(|k| !k.is_empty()) {
            let j = kept
                .iter()
                .position(|big| k.is_subset(big))
                .expect("every knowledge set lies inside a kept one");
            let a = node.rho[j];
            strategy.set(step, k.clone(), a);
            for o_h in 0..m.num_observations() {
                next.insert(knowledge_update(m, k, a, o_h, node.a_l, node.o_l));
            }
        }
        full = next;
        view.push(node.a_l, node.o_l);
    }
    debug_assert!(full.iter().all(StateSet::is_empty));
    NdsWitness {
        excluded_view: view,
        strategy,
    }
}

/// Forward simulation of `pi` against `beta`: true iff no run consistent
/// with `pi` produces `beta`. Works from the transition relation directly.
pub fn strategy_excludes(
    m: &Machine,
    pi: &StrategyTable,
    beta: &View,
    horizon: usize,
) -> Result<bool, WitnessError> {
    if beta.agent != AgentId::L {
        return Err(WitnessError::WrongAgent(beta.agent));
    }
    if horizon < beta.len() {
        return Err(WitnessError::HorizonTooShort {
            horizon,
            view: beta.len(),
        });
    }
    if m.obs_l(m.initial()) != beta.observations[0] {
        return Ok(true);
    }
    let mut level: BTreeSet<BTreeSet<usize>> = BTreeSet::from([BTreeSet::from([m.initial()])]);
    for step in 0..beta.len() {
        let (b, o) = (beta.actions[step], beta.observations[step + 1]);
        let mut next: BTreeSet<BTreeSet<usize>> = BTreeSet::new();
        for k in &level {
            if k.is_empty() {
                continue;
            }
            let key = StateSet::from_states(m.num_states(), k.iter().copied());
            let a = pi.action(step, &key).ok_or_else(|| WitnessError::StrategyUndefined {
                step,
                knowledge: m.state_names(k.iter().copied()),
            })?;
            let mut by_h_obs: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
            for (src, ta, tb, dst) in m.transitions() {
                if ta == a && tb == b && k.contains(&src) && m.obs_l(dst) == o {
                    by_h_obs.entry(m.obs_h(dst)).or_default().insert(dst);
                }
            }
            next.extend(by_h_obs.into_values());
        }
        level = next;
    }
    Ok(level.iter().all(BTreeSet::is_empty))
}

/// A witness is valid when its view is possible and its strategy excludes it.
pub fn verify_nds_witness(m: &Machine, w: &NdsWitness) -> Result<bool, WitnessError> {
    if !is_possible_view(m, &w.excluded_view) {
        return Ok(false);
    }
    strategy_excludes(m, &w.strategy, &w.excluded_view, w.excluded_view.len())
}
