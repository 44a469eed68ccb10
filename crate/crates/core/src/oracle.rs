//! Brute-force deciders for tiny machines, kept independent of the
//! checkers so the two can be compared.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

use crate::error::ResourceExceeded;
use crate::model::{enumerate_runs, l_view_language, view_of_run, AgentId, Machine};
use crate::reductions::peek::{apply_move, PeekInstance, PeekMove, PeekState};
use crate::res::{is_unwinding, RelationError};

/// Oracle verdicts. For the depth-bounded oracles `Satisfies` only covers
/// views up to the given length.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleVerdict {
    Satisfies,
    Violates,
}

type Tuple = (usize, usize, usize, usize);

fn tuples(m: &Machine) -> Vec<Tuple> {
    m.transitions().collect()
}

/// NDI by layered enumeration of (L view, H action sequence) pairs up to
/// `depth`. Pairs are identified by the end states of runs producing the
/// view and the end states of those runs that also perform the H actions;
/// pairs with the same two sets have the same extensions.
pub fn brute_ndi(m: &Machine, depth: usize, max_classes: usize) -> Result<OracleVerdict, ResourceExceeded> {
    let trans = tuples(m);
    let obs_l: Vec<usize> = (0..m.num_states()).map(|s| m.obs_l(s)).collect();
    let root = (BTreeSet::from([m.initial()]), BTreeSet::from([m.initial()]));
    let mut seen: HashSet<(BTreeSet<usize>, BTreeSet<usize>)> = HashSet::from([root.clone()]);
    let mut layer = vec![root];
    for _ in 0..depth {
        let mut next_layer = Vec::new();
        for (possible, compatible) in &layer {
            for b in 0..m.num_l_actions() {
                for o in 0..m.num_observations() {
                    let step = |from: &BTreeSet<usize>, h: Option<usize>| -> BTreeSet<usize> {
                        trans
                            .iter()
                            .filter(|&&(s, a, lb, t)| {
                                lb == b && obs_l[t] == o && from.contains(&s) && h.is_none_or(|h| h == a)
                            })
                            .map(|&(_, _, _, t)| t)
                            .collect()
                    };
                    let next_possible = step(possible, None);
                    if next_possible.is_empty() {
                        continue;
                    }
                    for h in 0..m.num_h_actions() {
                        let next_compatible = step(compatible, Some(h));
                        if next_compatible.is_empty() {
                            return Ok(OracleVerdict::Violates);
                        }
                        let class = (next_possible.clone(), next_compatible);
                        if seen.insert(class.clone()) {
                            if seen.len() > max_classes {
                                return Err(ResourceExceeded::new("view classes", max_classes));
                            }
                            next_layer.push(class);
                        }
                    }
                }
            }
        }
        if next_layer.is_empty() {
            break;
        }
        layer = next_layer;
    }
    Ok(OracleVerdict::Satisfies)
}

/// NDI straight from the definition: enumerate every run up to `depth`,
/// group the H action sequences by L view and look for a view missing one.
pub fn brute_ndi_runs(m: &Machine, depth: usize, max_runs: usize) -> Result<OracleVerdict, ResourceExceeded> {
    let runs = enumerate_runs(m, depth, max_runs)?;
    let mut realized: BTreeMap<Vec<usize>, BTreeSet<Vec<usize>>> = BTreeMap::new();
    for r in &runs {
        let v = view_of_run(m, r, AgentId::L).expect("enumerated runs are runs");
        let key: Vec<usize> = v.observations.iter().chain(&v.actions).copied().collect();
        realized.entry(key).or_default().insert(r.h_actions());
    }
    for (key, alphas) in &realized {
        let len = (key.len() - 1) / 2;
        if alphas.len() as u128 != (m.num_h_actions() as u128).pow(len as u32) {
            return Ok(OracleVerdict::Violates);
        }
    }
    Ok(OracleVerdict::Satisfies)
}

/// A run prefix: current state, H view and L view as flat symbol lists.
type Partial = (usize, Vec<usize>, Vec<usize>);

/// NDS up to horizon `depth`: enumerates every H strategy, assigning an
/// action to each H view that the strategy itself can reach, and compares
/// the L views it allows with all possible L views.
pub fn brute_nds(m: &Machine, depth: usize, max_strategies: usize) -> Result<OracleVerdict, ResourceExceeded> {
    let language: BTreeSet<Vec<usize>> = l_view_language(m, depth, usize::MAX)?
        .into_iter()
        .map(|v| flat(&v.observations, &v.actions))
        .collect();
    let s0 = m.initial();
    let start: Vec<Partial> = vec![(s0, vec![m.obs_h(s0)], vec![m.obs_l(s0)])];
    let produced = BTreeSet::from([vec![m.obs_l(s0)]]);
    let mut leaves = 0usize;
    let found = strategies(m, &tuples(m), start, produced, depth, &language, &mut leaves, max_strategies)?;
    Ok(if found {
        OracleVerdict::Violates
    } else {
        OracleVerdict::Satisfies
    })
}

fn flat(obs: &[usize], actions: &[usize]) -> Vec<usize> {
    let mut out = vec![obs[0]];
    for (i, &a) in actions.iter().enumerate() {
        out.push(a);
        out.push(obs[i + 1]);
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn strategies(
    m: &Machine,
    trans: &[Tuple],
    live: Vec<Partial>,
    produced: BTreeSet<Vec<usize>>,
    remaining: usize,
    language: &BTreeSet<Vec<usize>>,
    leaves: &mut usize,
    max_strategies: usize,
) -> Result<bool, ResourceExceeded> {
    if remaining == 0 {
        *leaves += 1;
        if *leaves > max_strategies {
            return Err(ResourceExceeded::new("strategies", max_strategies));
        }
        return Ok(&produced != language);
    }
    let h_views: Vec<Vec<usize>> = live
        .iter()
        .map(|(_, h, _)| h.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let nh = m.num_h_actions();
    let mut choice = vec![0usize; h_views.len()];
    loop {
        let pick: BTreeMap<&Vec<usize>, usize> = h_views.iter().zip(choice.iter().copied()).collect();
        let mut next_live: BTreeSet<Partial> = BTreeSet::new();
        for (s, hv, lv) in &live {
            let a = pick[hv];
            for &(src, ta, b, t) in trans {
                if src == *s && ta == a {
                    let mut h = hv.clone();
                    h.extend([a, m.obs_h(t)]);
                    let mut l = lv.clone();
                    l.extend([b, m.obs_l(t)]);
                    next_live.insert((t, h, l));
                }
            }
        }
        let mut next_produced = produced.clone();
        next_produced.extend(next_live.iter().map(|(_, _, l)| l.clone()));
        let next_live: Vec<Partial> = next_live.into_iter().collect();
        if strategies(m, trans, next_live, next_produced, remaining - 1, language, leaves, max_strategies)? {
            return Ok(true);
        }
        // next choice vector, last position fastest
        let mut i = choice.len();
        loop {
            if i == 0 {
                return Ok(false);
            }
            i -= 1;
            choice[i] += 1;
            if choice[i] < nh {
                break;
            }
            choice[i] = 0;
        }
    }
}

#[derive(Clone, Debug)]
pub struct BruteRes {
    pub verdict: OracleVerdict,
    /// Every symmetric relation on reachable states that is an unwinding.
    pub survivors: Vec<BTreeSet<(usize, usize)>>,
}

/// RES by enumerating all symmetric relations over reachable states that
/// contain `(s0, s0)`. Pairs with different L observations can never occur
/// in an unwinding and are left out of the enumeration.
pub fn brute_res(m: &Machine, max_candidates: usize) -> Result<BruteRes, ResourceExceeded> {
    let mut seen = vec![false; m.num_states()];
    seen[m.initial()] = true;
    let mut queue = VecDeque::from([m.initial()]);
    while let Some(s) = queue.pop_front() {
        for (src, _, _, t) in m.transitions() {
            if src == s && !seen[t] {
                seen[t] = true;
                queue.push_back(t);
            }
        }
    }
    let reach: Vec<usize> = (0..m.num_states()).filter(|&s| seen[s]).collect();
    let mut optional: Vec<(usize, usize)> = Vec::new();
    for (i, &s) in reach.iter().enumerate() {
        if s != m.initial() {
            optional.push((s, s));
        }
        for &t in &reach[i + 1..] {
            if m.obs_l(s) == m.obs_l(t) {
                optional.push((s, t));
            }
        }
    }
    if optional.len() >= 63 || (1u64 << optional.len()) > max_candidates as u64 {
        return Err(ResourceExceeded::new("candidate relations", max_candidates));
    }
    let mut survivors = Vec::new();
    for mask in 0u64..(1 << optional.len()) {
        let mut rel = BTreeSet::from([(m.initial(), m.initial())]);
        for (bit, &(s, t)) in optional.iter().enumerate() {
            if mask >> bit & 1 == 1 {
                rel.insert((s, t));
                rel.insert((t, s));
            }
        }
        match is_unwinding(m, &rel) {
            Ok(true) => survivors.push(rel),
            Ok(false) => {}
            Err(RelationError::NotSymmetric(..) | RelationError::UnknownState(_)) => {
                unreachable!("candidates are symmetric over known states")
            }
        }
    }
    Ok(BruteRes {
        verdict: if survivors.is_empty() {
            OracleVerdict::Violates
        } else {
            OracleVerdict::Satisfies
        },
        survivors,
    })
}

/// Whether some player-1 move sequence of length at most `depth` wins
/// every play, checked by walking each play separately.
pub fn brute_peek(g: &PeekInstance, depth: usize) -> bool {
    let moves1 = g.moves(1);
    let moves2 = g.moves(2);
    let mut sequences: Vec<Vec<PeekMove>> = vec![Vec::new()];
    for _ in 0..depth {
        sequences = sequences
            .iter()
            .flat_map(|seq| {
                moves1.iter().map(move |&mv| {
                    let mut s = seq.clone();
                    s.push(mv);
                    s
                })
            })
            .collect();
        if sequences.iter().any(|seq| every_play_wins(g, &moves2, g.initial_state(), seq)) {
            return true;
        }
    }
    false
}

fn every_play_wins(g: &PeekInstance, moves2: &[PeekMove], state: PeekState, rest: &[PeekMove]) -> bool {
    let Some((&mv, tail)) = rest.split_first() else {
        return false;
    };
    let after = apply_move(state, mv);
    if g.satisfies(1, after) {
        return true;
    }
    moves2.iter().all(|&reply| {
        let w = apply_move(after, reply);
        !g.satisfies(2, w) && every_play_wins(g, moves2, w, tail)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{fixture_fig1, fixture_fig2, self_loop_machine};

    #[test]
    fn brute_ndi_on_fixtures() {
        for m in [fixture_fig1(), fixture_fig2(), self_loop_machine(&["0", "1"], &["0"])] {
            assert_eq!(brute_ndi(&m, 2, 1 << 20), Ok(OracleVerdict::Satisfies));
            assert_eq!(brute_ndi_runs(&m, 2, 1 << 20), Ok(OracleVerdict::Satisfies));
        }
    }

    #[test]
    fn brute_nds_on_fixtures() {
        assert_eq!(brute_nds(&fixture_fig1(), 2, 1 << 20), Ok(OracleVerdict::Violates));
        assert_eq!(brute_nds(&fixture_fig1(), 1, 1 << 20), Ok(OracleVerdict::Satisfies));
        assert_eq!(brute_nds(&fixture_fig2(), 3, 1 << 20), Ok(OracleVerdict::Satisfies));
        let lone = self_loop_machine(&["0", "1"], &["0"]);
        for d in 0..4 {
            assert_eq!(brute_nds(&lone, d, 1 << 20), Ok(OracleVerdict::Satisfies));
        }
    }

    #[test]
    fn brute_res_on_fixtures() {
        let lone = self_loop_machine(&["0", "1"], &["0"]);
        let r = brute_res(&lone, 1 << 10).unwrap();
        assert_eq!(r.verdict, OracleVerdict::Satisfies);
        assert_eq!(r.survivors, vec![BTreeSet::from([(0, 0)])]);
        assert_eq!(brute_res(&fixture_fig2(), 1 << 22).unwrap().verdict, OracleVerdict::Violates);
        assert_eq!(brute_res(&fixture_fig1(), 1 << 22).unwrap().verdict, OracleVerdict::Violates);
    }

    #[test]
    fn brute_peek_small() {
        let g = PeekInstance {
            n: 2,
            n1: 1,
            phi1: vec![vec![1]],
            phi2: vec![],
            nu0: vec![0, 0],
        };
        assert!(brute_peek(&g, 1));
        assert!(!brute_peek(&g, 0));
        let g = PeekInstance {
            phi1: vec![vec![1, 2]],
            ..g
        };
        assert!(!brute_peek(&g, 4));
    }
}
