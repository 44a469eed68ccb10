//! Nondeducibility on inputs.
//!
//! A machine violates NDI when some possible L view `v` and some H action
//! sequence `alpha` of the same length are realized by no common run. The
//! checker searches the product of the machine with its L-knowledge sets:
//! a search state `(s, T)` pairs a concrete state `s` (keeping the generated
//! view possible) with the set `T` of end states of runs that match both the
//! view and the guessed H actions so far. Reaching `T = {}` is a violation.

use std::collections::{BTreeSet, HashSet, VecDeque};

use crate::error::{ResourceExceeded, WitnessError};
use crate::model::{AgentId, Machine, View};
use crate::stateset::StateSet;

/// States reached from `t_set` under `(a, b)` whose L observation is `o`.
pub fn delta_abo(m: &Machine, t_set: &StateSet, a: usize, b: usize, o: usize) -> StateSet {
    let mut out = StateSet::empty(m.num_states());
    for t in t_set.iter() {
        for &u in m.succ(t, a, b) {
            if m.obs_l(u) == o {
                out.insert(u);
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NdiSearchState {
    pub current: usize,
    pub kset: StateSet,
}

impl NdiSearchState {
    pub fn initial(m: &Machine) -> Self {
        NdiSearchState {
            current: m.initial(),
            kset: StateSet::singleton(m.num_states(), m.initial()),
        }
    }
}

/// An H action sequence that no run producing `l_view` can perform.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NdiWitness {
    pub h_actions: Vec<usize>,
    pub l_view: View,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NdiVerdict {
    Satisfies,
    Violates(NdiWitness),
}

impl NdiVerdict {
    pub fn is_satisfied(&self) -> bool {
        matches!(self, NdiVerdict::Satisfies)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct NdiLimits {
    pub max_visited: usize,
}

impl Default for NdiLimits {
    fn default() -> Self {
        NdiLimits { max_visited: 1 << 24 }
    }
}

#[derive(Clone, Debug)]
pub struct NdiReport {
    pub verdict: NdiVerdict,
    pub visited: usize,
}

struct Node {
    state: NdiSearchState,
    parent: usize,
    // (a, b, a'): run action pair and the guessed H action
    label: (usize, usize, usize),
}

/// Decides NDI with the default limits.
pub fn check_ndi(m: &Machine) -> Result<NdiVerdict, ResourceExceeded> {
    check_ndi_with(m, &NdiLimits::default()).map(|r| r.verdict)
}

/// Breadth-first search for a reachable empty knowledge set. The returned
/// witness is a shortest one; ties go to the lexicographically smallest
/// `(a, b, a')` label sequence.
pub fn check_ndi_with(m: &Machine, limits: &NdiLimits) -> Result<NdiReport, ResourceExceeded> {
    let root = NdiSearchState::initial(m);
    let mut visited: HashSet<NdiSearchState> = HashSet::from([root.clone()]);
    let mut nodes = vec![Node {
        state: root,
        parent: usize::MAX,
        label: (0, 0, 0),
    }];
    let mut queue = VecDeque::from([0usize]);

    while let Some(idx) = queue.pop_front() {
        let (s, kset) = (nodes[idx].state.current, nodes[idx].state.kset.clone());
        for a in 0..m.num_h_actions() {
            for b in 0..m.num_l_actions() {
                for &next in m.succ(s, a, b) {
                    let o = m.obs_l(next);
                    for guess in 0..m.num_h_actions() {
                        let state = NdiSearchState {
                            current: next,
                            kset: delta_abo(m, &kset, guess, b, o),
                        };
                        if visited.contains(&state) {
                            continue;
                        }
                        let found = state.kset.is_empty();
                        visited.insert(state.clone());
                        nodes.push(Node {
                            state,
                            parent: idx,
                            label: (a, b, guess),
                        });
                        if found {
                            let witness = reconstruct(m, &nodes, nodes.len() - 1);
                            return Ok(NdiReport {
                                verdict: NdiVerdict::Violates(witness),
                                visited: visited.len(),
                            });
                        }
                        if visited.len() > limits.max_visited {
                            return Err(ResourceExceeded::new(
                                "NDI search states",
                                limits.max_visited,
                            ));
                        }
                        queue.push_back(nodes.len() - 1);
                    }
                }
            }
        }
    }
    Ok(NdiReport {
        verdict: NdiVerdict::Satisfies,
        visited: visited.len(),
    })
}

fn reconstruct(m: &Machine, nodes: &[Node], mut idx: usize) -> NdiWitness {
    let mut steps = Vec::new();
    while idx != 0 {
        steps.push((nodes[idx].label, nodes[idx].state.current));
        idx = nodes[idx].parent;
    }
    steps.reverse();
    let mut l_view = View::new(AgentId::L, m.obs_l(m.initial()));
    let mut h_actions = Vec::with_capacity(steps.len());
    for ((_, b, guess), s) in steps {
        l_view.push(b, m.obs_l(s));
        h_actions.push(guess);
    }
    NdiWitness { h_actions, l_view }
}

/// Re-derives a violation directly from the transition relation: the view
/// must be produced by some run, and no run producing it may perform the
/// witness H actions.
pub fn ndi_witness_replay(m: &Machine, w: &NdiWitness) -> Result<bool, WitnessError> {
    if w.l_view.agent != AgentId::L {
        return Err(WitnessError::WrongAgent(w.l_view.agent));
    }
    if w.h_actions.len() != w.l_view.len() {
        return Err(WitnessError::LengthMismatch {
            actions: w.h_actions.len(),
            view: w.l_view.len(),
        });
    }
    if w.h_actions.iter().any(|&a| a >= m.num_h_actions())
        || w.l_view.actions.iter().any(|&b| b >= m.num_l_actions())
        || w.l_view.observations.iter().any(|&o| o >= m.num_observations())
    {
        return Err(WitnessError::Malformed("identifier out of range".into()));
    }
    if m.obs_l(m.initial()) != w.l_view.observations[0] {
        return Ok(false);
    }
    let mut possible: BTreeSet<usize> = BTreeSet::from([m.initial()]);
    let mut compatible: BTreeSet<usize> = BTreeSet::from([m.initial()]);
    for (i, &b) in w.l_view.actions.iter().enumerate() {
        let o = w.l_view.observations[i + 1];
        let mut next_possible = BTreeSet::new();
        let mut next_compatible = BTreeSet::new();
        for (src, a, lb, dst) in m.transitions() {
            if lb != b || m.obs_l(dst) != o {
                continue;
            }
            if possible.contains(&src) {
                next_possible.insert(dst);
            }
            if a == w.h_actions[i] && compatible.contains(&src) {
                next_compatible.insert(dst);
            }
        }
        possible = next_possible;
        compatible = next_compatible;
    }
    Ok(!possible.is_empty() && compatible.is_empty())
}
