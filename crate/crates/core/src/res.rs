//! Restrictiveness: existence of a synchronous unwinding relation.
//!
//! The largest unwinding, when one exists, is an equivalence on reachable
//! states and is computed by partition refinement starting from the
//! L-observation classes.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use crate::model::{Machine, MachineDef};

/// States reachable from the initial state, in increasing id order.
pub fn reachable_states(m: &Machine) -> Vec<usize> {
    let mut seen = vec![false; m.num_states()];
    seen[m.initial()] = true;
    let mut queue = VecDeque::from([m.initial()]);
    while let Some(s) = queue.pop_front() {
        for a in 0..m.num_h_actions() {
            for b in 0..m.num_l_actions() {
                for &t in m.succ(s, a, b) {
                    if !seen[t] {
                        seen[t] = true;
                        queue.push_back(t);
                    }
                }
            }
        }
    }
    (0..m.num_states()).filter(|&s| seen[s]).collect()
}

/// The machine restricted to its reachable states. Alphabets and
/// observations are kept as they are.
pub fn reachable_restriction(m: &Machine) -> Machine {
    let keep = reachable_states(m);
    let kept: BTreeSet<usize> = keep.iter().copied().collect();
    let full = m.to_def();
    let mut def = MachineDef::new(
        keep.iter().map(|&s| m.state_name(s).to_string()),
        m.state_name(m.initial()),
        full.actions_h.clone(),
        full.actions_l.clone(),
        full.observations.clone(),
    );
    for &s in &keep {
        def.set_obs(
            m.state_name(s),
            m.observation_name(m.obs_h(s)),
            m.observation_name(m.obs_l(s)),
        );
    }
    for (s, a, b, t) in m.transitions() {
        if kept.contains(&s) {
            def.add_transition(
                m.state_name(s),
                m.h_action_name(a),
                m.l_action_name(b),
                m.state_name(t),
            );
        }
    }
    Machine::from_def(&def).expect("restriction of a valid machine is valid")
}

/// A partition of the reachable states of a machine. Blocks are sorted
/// and ordered by their smallest state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    pub blocks: Vec<Vec<usize>>,
    block_of: Vec<Option<usize>>,
}

impl Partition {
    pub fn new(num_states: usize, mut blocks: Vec<Vec<usize>>) -> Self {
        for b in blocks.iter_mut() {
            b.sort_unstable();
        }
        blocks.retain(|b| !b.is_empty());
        blocks.sort();
        let mut block_of = vec![None; num_states];
        for (i, b) in blocks.iter().enumerate() {
            for &s in b {
                assert!(block_of[s].is_none(), "blocks overlap at state {s}");
                block_of[s] = Some(i);
            }
        }
        Partition { blocks, block_of }
    }

    pub fn block_of(&self, s: usize) -> Option<usize> {
        self.block_of.get(s).copied().flatten()
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// The equivalence relation induced by the partition.
    pub fn relation(&self) -> BTreeSet<(usize, usize)> {
        let mut rel = BTreeSet::new();
        for b in &self.blocks {
            for &s in b {
                for &t in b {
                    rel.insert((s, t));
                }
            }
        }
        rel
    }

    pub fn named_blocks(&self, m: &Machine) -> Vec<Vec<String>> {
        let mut out: Vec<Vec<String>> = self
            .blocks
            .iter()
            .map(|b| {
                let mut names = m.state_names(b.iter().copied());
                names.sort();
                names
            })
            .collect();
        out.sort();
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ResVerdict {
    /// The largest synchronous unwinding, as a partition.
    Satisfies(Partition),
    /// Successors of `state` under `(a1, a3)` and `(a2, a3)` reach
    /// different sets of blocks, so no unwinding relates `state` to itself.
    Violates {
        state: usize,
        a1: usize,
        a2: usize,
        a3: usize,
    },
}

#[derive(Clone, Debug)]
pub struct ResReport {
    pub verdict: ResVerdict,
    pub iterations: usize,
}

pub fn check_res(m: &Machine) -> ResVerdict {
    check_res_report(m).verdict
}

pub fn check_res_report(m: &Machine) -> ResReport {
    let reach = reachable_states(m);
    let nh = m.num_h_actions();
    let nl = m.num_l_actions();

    let mut by_obs: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &s in &reach {
        by_obs.entry(m.obs_l(s)).or_default().push(s);
    }
    let mut part = Partition::new(m.num_states(), by_obs.into_values().collect());
    let mut iterations = 0;
    let mut sig: Vec<Vec<usize>> = vec![Vec::new(); m.num_states() * nh * nl];
    let at = |s: usize, a: usize, b: usize| (s * nh + a) * nl + b;

    'refine: loop {
        iterations += 1;
        for &s in &reach {
            for a in 0..nh {
                for b in 0..nl {
                    let out = &mut sig[at(s, a, b)];
                    out.clear();
                    out.extend(m.succ(s, a, b).iter().map(|&t| part.block_of(t).unwrap()));
                    out.sort_unstable();
                    out.dedup();
                }
            }
        }
        for &s in &reach {
            for a3 in 0..nl {
                for a2 in 1..nh {
                    if sig[at(s, 0, a3)] != sig[at(s, a2, a3)] {
                        return ResReport {
                            verdict: ResVerdict::Violates {
                                state: s,
                                a1: 0,
                                a2,
                                a3,
                            },
                            iterations,
                        };
                    }
                }
            }
        }
        for (bi, block) in part.blocks.iter().enumerate() {
            for a3 in 0..nl {
                let mut groups: BTreeMap<&[usize], Vec<usize>> = BTreeMap::new();
                for &s in block {
                    groups.entry(&sig[at(s, 0, a3)]).or_default().push(s);
                }
                if groups.len() > 1 {
                    let mut blocks: Vec<Vec<usize>> = part
                        .blocks
                        .iter()
                        .enumerate()
                        .filter(|&(i, _)| i != bi)
                        .map(|(_, b)| b.clone())
                        .collect();
                    blocks.extend(groups.into_values());
                    part = Partition::new(m.num_states(), blocks);
                    continue 'refine;
                }
            }
        }
        break;
    }
    if cfg!(debug_assertions) && reach.len() <= 32 {
        debug_assert_eq!(is_unwinding(m, &part.relation()), Ok(true));
    }
    ResReport {
        verdict: ResVerdict::Satisfies(part),
        iterations,
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RelationError {
    #[error("relation is not symmetric: ({0}, {1}) present without its mirror")]
    NotSymmetric(usize, usize),
    #[error("relation mentions unknown state {0}")]
    UnknownState(usize),
}

/// Checks the three unwinding conditions on `rel` directly.
pub fn is_unwinding(m: &Machine, rel: &BTreeSet<(usize, usize)>) -> Result<bool, RelationError> {
    for &(s, t) in rel {
        for x in [s, t] {
            if x >= m.num_states() {
                return Err(RelationError::UnknownState(x));
            }
        }
        if !rel.contains(&(t, s)) {
            return Err(RelationError::NotSymmetric(s, t));
        }
    }
    if !rel.contains(&(m.initial(), m.initial())) {
        return Ok(false);
    }
    for &(s, t) in rel {
        if m.obs_l(s) != m.obs_l(t) {
            return Ok(false);
        }
        for a3 in 0..m.num_l_actions() {
            for a1 in 0..m.num_h_actions() {
                for &s2 in m.succ(s, a1, a3) {
                    for a2 in 0..m.num_h_actions() {
                        if !m.succ(t, a2, a3).iter().any(|&t2| rel.contains(&(s2, t2))) {
                            return Ok(false);
                        }
                    }
                }
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{fixture_fig1, fixture_fig2, self_loop_machine};

    #[test]
    fn self_loop_satisfies_with_single_block() {
        let m = self_loop_machine(&["0", "1"], &["0"]);
        match check_res(&m) {
            ResVerdict::Satisfies(p) => assert_eq!(p.blocks, vec![vec![0]]),
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn fig2_fails_reflexivity_at_s0() {
        let m = fixture_fig2();
        let ResVerdict::Violates { state, a1, a2, a3 } = check_res(&m) else {
            panic!("fig2 has no unwinding")
        };
        assert_eq!(m.state_name(state), "s0");
        assert_eq!((a1, a2, a3), (0, 1, 0));
    }

    #[test]
    fn fig1_violates() {
        let m = fixture_fig1();
        let ResVerdict::Violates { state, .. } = check_res(&m) else {
            panic!("fig1 has no unwinding")
        };
        assert_eq!(m.state_name(state), "s1");
    }

    #[test]
    fn restriction_drops_unreachable_state() {
        let mut def = MachineDef::new(["s0", "x"], "s0", ["0"], ["0"], ["0"]);
        def.set_obs("s0", "0", "0").set_obs("x", "0", "0");
        def.add_tau_transition("s0", "s0").add_tau_transition("x", "x");
        let m = Machine::from_def(&def).unwrap();
        let r = reachable_restriction(&m);
        assert_eq!(r.num_states(), 1);
        assert_eq!(r.state_name(0), "s0");
        assert_eq!(reachable_restriction(&fixture_fig1()).num_states(), 5);
        assert_eq!(reachable_restriction(&fixture_fig2()).num_states(), 6);
    }

    #[test]
    fn identity_on_fig2_is_not_an_unwinding() {
        let m = fixture_fig2();
        let id: BTreeSet<(usize, usize)> = (0..m.num_states()).map(|s| (s, s)).collect();
        assert_eq!(is_unwinding(&m, &id), Ok(false));
        assert_eq!(is_unwinding(&m, &BTreeSet::new()), Ok(false));
    }

    #[test]
    fn relation_errors() {
        let m = fixture_fig2();
        assert_eq!(
            is_unwinding(&m, &BTreeSet::from([(0, 1)])),
            Err(RelationError::NotSymmetric(0, 1))
        );
        assert_eq!(
            is_unwinding(&m, &BTreeSet::from([(9, 9)])),
            Err(RelationError::UnknownState(9))
        );
    }

    #[test]
    fn refinement_splits_by_future_observation() {
        // L cannot tell a from b now, but b leads to an observably different state.
        let mut def = MachineDef::new(["s0", "a", "b", "c"], "s0", ["0"], ["0"], ["0", "1"]);
        def.set_obs("s0", "0", "0").set_obs("a", "0", "0").set_obs("b", "0", "0").set_obs("c", "0", "1");
        def.add_tau_transition("s0", "a")
            .add_tau_transition("s0", "b")
            .add_tau_transition("a", "a")
            .add_tau_transition("b", "c")
            .add_tau_transition("c", "c");
        let m = Machine::from_def(&def).unwrap();
        let report = check_res_report(&m);
        let ResVerdict::Satisfies(p) = report.verdict else {
            panic!("H has a single action")
        };
        assert_eq!(
            p.named_blocks(&m),
            vec![vec!["a".to_string()], vec!["b".to_string()], vec!["c".to_string()], vec!["s0".to_string()]]
        );
        assert!(report.iterations > 1);
        assert_eq!(is_unwinding(&m, &p.relation()), Ok(true));
    }
}
