use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::ResourceExceeded;
use crate::model::{Machine, MachineDef};
use crate::stateset::StateSet;

/// A nondeterministic finite automaton without epsilon moves.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Nfa {
    pub states: Vec<String>,
    pub initial: Vec<String>,
    pub alphabet: Vec<String>,
    #[serde(rename = "final")]
    pub final_states: Vec<String>,
    pub trans: Vec<[String; 3]>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NfaError {
    #[error("alphabet is empty")]
    EmptyAlphabet,
    #[error("duplicate {kind} `{name}`")]
    Duplicate { kind: &'static str, name: String },
    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },
    #[error(transparent)]
    Resource(#[from] ResourceExceeded),
}

/// Index form used by the algorithms below.
struct Indexed {
    n: usize,
    initial: Vec<usize>,
    finals: Vec<bool>,
    // delta[q][a]
    delta: Vec<Vec<Vec<usize>>>,
}

impl Nfa {
    pub fn validate(&self) -> Result<(), NfaError> {
        self.indexed().map(|_| ())
    }

    fn indexed(&self) -> Result<Indexed, NfaError> {
        if self.alphabet.is_empty() {
            return Err(NfaError::EmptyAlphabet);
        }
        let states = index("state", &self.states)?;
        let letters = index("letter", &self.alphabet)?;
        let state = |name: &String| {
            states.get(name).copied().ok_or_else(|| NfaError::Unknown {
                kind: "state",
                name: name.clone(),
            })
        };
        let n = self.states.len();
        let mut initial = Vec::new();
        for q in &self.initial {
            initial.push(state(q)?);
        }
        initial.sort_unstable();
        initial.dedup();
        let mut finals = vec![false; n];
        for q in &self.final_states {
            finals[state(q)?] = true;
        }
        let mut delta = vec![vec![Vec::new(); self.alphabet.len()]; n];
        for [src, a, dst] in &self.trans {
            let a = letters.get(a).copied().ok_or_else(|| NfaError::Unknown {
                kind: "letter",
                name: a.clone(),
            })?;
            delta[state(src)?][a].push(state(dst)?);
        }
        for row in delta.iter_mut() {
            for targets in row.iter_mut() {
                targets.sort_unstable();
                targets.dedup();
            }
        }
        Ok(Indexed {
            n,
            initial,
            finals,
            delta,
        })
    }

    /// Direct simulation on one word, given as letter indices into `alphabet`.
    pub fn accepts(&self, word: &[usize]) -> Result<bool, NfaError> {
        let ix = self.indexed()?;
        let mut current: BTreeSet<usize> = ix.initial.iter().copied().collect();
        for &a in word {
            current = current.iter().flat_map(|&q| ix.delta[q][a].iter().copied()).collect();
        }
        Ok(current.iter().any(|&q| ix.finals[q]))
    }
}

fn index(kind: &'static str, names: &[String]) -> Result<BTreeMap<String, usize>, NfaError> {
    let mut out = BTreeMap::new();
    for (i, name) in names.iter().enumerate() {
        if out.insert(name.clone(), i).is_some() {
            return Err(NfaError::Duplicate {
                kind,
                name: name.clone(),
            });
        }
    }
    Ok(out)
}

/// Universality by subset construction: searches for a reachable subset
/// with no final state. The empty subset counts as rejecting.
pub fn nfa_universal(a: &Nfa, max_subsets: usize) -> Result<bool, NfaError> {
    let ix = a.indexed()?;
    let start = StateSet::from_states(ix.n, ix.initial.iter().copied());
    let accepting = |s: &StateSet| s.iter().any(|q| ix.finals[q]);
    let mut seen = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([start]);
    while let Some(set) = queue.pop_front() {
        if !accepting(&set) {
            return Ok(false);
        }
        for letter in 0..a.alphabet.len() {
            let mut next = StateSet::empty(ix.n);
            for q in set.iter() {
                for &t in &ix.delta[q][letter] {
                    next.insert(t);
                }
            }
            if seen.insert(next.clone()) {
                if seen.len() > max_subsets {
                    return Err(ResourceExceeded::new("determinized NFA states", max_subsets).into());
                }
                queue.push_back(next);
            }
        }
    }
    Ok(true)
}

const FRESH: [&str; 4] = ["s0", "s1", "s2", "s3"];

/// Machine names for the automaton states: unchanged unless they clash with
/// the four fresh states, in which case primes are appended.
fn machine_names(states: &[String]) -> Vec<String> {
    let mut taken: BTreeSet<String> = FRESH.iter().map(|s| s.to_string()).collect();
    taken.extend(states.iter().filter(|q| !FRESH.contains(&q.as_str())).cloned());
    states
        .iter()
        .map(|q| {
            if !FRESH.contains(&q.as_str()) {
                return q.clone();
            }
            let mut name = format!("{q}'");
            while taken.contains(&name) {
                name.push('\'');
            }
            taken.insert(name.clone());
            name
        })
        .collect()
}

/// The scheduled machine M(A): H picks at `s0` between simulating the
/// automaton (`h`) and a branch producing every view (`h'`); afterwards L's
/// actions are the input letters and L sees 1 exactly at `s2`.
pub fn nfa_to_machine(a: &Nfa) -> Result<Machine, NfaError> {
    let ix = a.indexed()?;
    let names = machine_names(&a.states);
    let mut all_states: Vec<String> = FRESH.iter().map(|s| s.to_string()).collect();
    all_states.extend(names.iter().cloned());
    let mut def = MachineDef::new(
        all_states.clone(),
        "s0",
        vec!["h".to_string(), "h'".to_string()],
        a.alphabet.clone(),
        vec!["0".to_string(), "1".to_string()],
    );
    for s in &all_states {
        let l = if s == "s2" { "1" } else { "0" };
        def.set_obs(s, "0", l);
    }
    for &q in &ix.initial {
        def.add_h_transition("s0", "h", &names[q]);
    }
    if ix.initial.iter().any(|&q| ix.finals[q]) {
        def.add_h_transition("s0", "h", "s2");
    }
    if ix.initial.is_empty() {
        def.add_h_transition("s0", "h", "s3");
    }
    def.add_h_transition("s0", "h'", "s1").add_h_transition("s0", "h'", "s2");
    for letter in &a.alphabet {
        def.add_l_transition("s1", letter, "s1")
            .add_l_transition("s1", letter, "s2")
            .add_l_transition("s2", letter, "s2")
            .add_l_transition("s3", letter, "s3");
    }
    for q in 0..ix.n {
        for (li, letter) in a.alphabet.iter().enumerate() {
            let targets = &ix.delta[q][li];
            for &t in targets {
                def.add_l_transition(&names[q], letter, &names[t]);
            }
            if targets.iter().any(|&t| ix.finals[t]) {
                def.add_l_transition(&names[q], letter, "s2");
            }
            if targets.is_empty() {
                def.add_l_transition(&names[q], letter, "s3");
            }
        }
    }
    Ok(Machine::from_def(&def).expect("construction is input-enabled"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{is_scheduled, validate_machine};
    use crate::ndi::{check_ndi, NdiVerdict};

    fn nfa(states: &[&str], initial: &[&str], alphabet: &[&str], finals: &[&str], trans: &[[&str; 3]]) -> Nfa {
        let own = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        Nfa {
            states: own(states),
            initial: own(initial),
            alphabet: own(alphabet),
            final_states: own(finals),
            trans: trans.iter().map(|t| t.map(str::to_string)).collect(),
        }
    }

    fn universal_one_state() -> Nfa {
        nfa(&["q"], &["q"], &["a", "b"], &["q"], &[["q", "a", "q"], ["q", "b", "q"]])
    }

    fn ends_in_a() -> Nfa {
        nfa(
            &["p", "q"],
            &["p"],
            &["a", "b"],
            &["q"],
            &[["p", "a", "p"], ["p", "b", "p"], ["p", "a", "q"]],
        )
    }

    #[test]
    fn universality() {
        assert_eq!(nfa_universal(&universal_one_state(), 1 << 10), Ok(true));
        assert_eq!(nfa_universal(&ends_in_a(), 1 << 10), Ok(false));
        let no_final = nfa(&["q"], &["q"], &["a"], &[], &[["q", "a", "q"]]);
        assert_eq!(nfa_universal(&no_final, 1 << 10), Ok(false));
    }

    #[test]
    fn machine_shape() {
        let m = nfa_to_machine(&ends_in_a()).unwrap();
        assert_eq!(m.num_states(), 6);
        assert!(is_scheduled(&m));
        assert!(validate_machine(&m.to_def()).is_empty());
    }

    #[test]
    fn universal_nfa_gives_ndi() {
        let m = nfa_to_machine(&universal_one_state()).unwrap();
        assert_eq!(check_ndi(&m).unwrap(), NdiVerdict::Satisfies);
    }

    #[test]
    fn rejected_empty_word_drops_edge_and_violates() {
        let a = ends_in_a();
        let m = nfa_to_machine(&a).unwrap();
        let s2 = m.state_id("s2").unwrap();
        let h = m.h_action_id("h").unwrap();
        assert!(!m.succ(m.initial(), h, 0).contains(&s2));
        assert!(matches!(check_ndi(&m).unwrap(), NdiVerdict::Violates(_)));
    }

    #[test]
    fn empty_initial_set_stays_input_enabled() {
        let a = nfa(&["q"], &[], &["a"], &["q"], &[["q", "a", "q"]]);
        let m = nfa_to_machine(&a).unwrap();
        assert!(matches!(check_ndi(&m).unwrap(), NdiVerdict::Violates(_)));
        assert_eq!(nfa_universal(&a, 16), Ok(false));
    }

    #[test]
    fn clashing_names_are_renamed() {
        let a = nfa(&["s0", "s0'"], &["s0"], &["a"], &["s0'"], &[["s0", "a", "s0'"], ["s0'", "a", "s0'"]]);
        let m = nfa_to_machine(&a).unwrap();
        assert_eq!(m.num_states(), 6);
        assert!(m.state_id("s0''").is_ok());
        assert!(m.state_id("s0'").is_ok());
    }

    #[test]
    fn accepts_matches_language() {
        let a = ends_in_a();
        assert!(!a.accepts(&[]).unwrap());
        assert!(a.accepts(&[1, 0]).unwrap());
        assert!(!a.accepts(&[0, 1]).unwrap());
    }

    #[test]
    fn malformed_nfa_rejected() {
        let bad = nfa(&["q"], &["r"], &["a"], &[], &[]);
        assert!(matches!(bad.validate(), Err(NfaError::Unknown { kind: "state", .. })));
        let dup = nfa(&["q", "q"], &["q"], &["a"], &[], &[]);
        assert!(matches!(dup.validate(), Err(NfaError::Duplicate { .. })));
        assert_eq!(nfa(&["q"], &["q"], &[], &[], &[]).validate(), Err(NfaError::EmptyAlphabet));
    }
}
