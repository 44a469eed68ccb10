use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Machine, MachineDef};

/// A BLIND-PEEK game. Plates are numbered from 1; plates `1..=n1` belong
/// to player 1. Formulas are in DNF, each clause a list of signed plate
/// numbers (`k` for P_k, `-k` for its negation).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeekInstance {
    pub n: usize,
    pub n1: usize,
    pub phi1: Vec<Vec<i64>>,
    pub phi2: Vec<Vec<i64>>,
    pub nu0: Vec<u8>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PeekError {
    #[error("need 1 <= n <= {max} plates, got {0}", max = MAX_PLATES)]
    PlateCount(usize),
    #[error("player 1 must own fewer plates than exist (n1 = {n1}, n = {n})")]
    PlayerOnePlates { n1: usize, n: usize },
    #[error("literal {0} does not name a plate")]
    BadLiteral(i64),
    #[error("clause {clause} of player {player} mentions plate {plate} twice")]
    RepeatedPlate { player: u8, clause: usize, plate: usize },
    #[error("initial assignment must list {n} values in {{0, 1}}")]
    BadInitial { n: usize },
    #[error("{0} out of range")]
    OutOfRange(&'static str),
}

const MAX_PLATES: usize = 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PeekMove {
    /// Flip plate `k` (1-based).
    Move(usize),
    Pass,
}

impl fmt::Display for PeekMove {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PeekMove::Move(k) => write!(f, "move{k}"),
            PeekMove::Pass => f.write_str("pass"),
        }
    }
}

/// Game positions are bitmasks: bit `k - 1` is the position of plate `k`.
pub type PeekState = u32;

impl PeekInstance {
    pub fn validate(&self) -> Result<(), PeekError> {
        if self.n == 0 || self.n > MAX_PLATES {
            return Err(PeekError::PlateCount(self.n));
        }
        if self.n1 >= self.n {
            return Err(PeekError::PlayerOnePlates { n1: self.n1, n: self.n });
        }
        for (player, phi) in [(1u8, &self.phi1), (2, &self.phi2)] {
            for (ci, clause) in phi.iter().enumerate() {
                let mut seen = BTreeSet::new();
                for &lit in clause {
                    let plate = lit.unsigned_abs() as usize;
                    if lit == 0 || plate > self.n {
                        return Err(PeekError::BadLiteral(lit));
                    }
                    if !seen.insert(plate) {
                        return Err(PeekError::RepeatedPlate {
                            player,
                            clause: ci + 1,
                            plate,
                        });
                    }
                }
            }
        }
        if self.nu0.len() != self.n || self.nu0.iter().any(|&b| b > 1) {
            return Err(PeekError::BadInitial { n: self.n });
        }
        Ok(())
    }

    pub fn h1(&self) -> usize {
        self.phi1.len()
    }

    pub fn h2(&self) -> usize {
        self.phi2.len()
    }

    fn formula(&self, player: u8) -> &[Vec<i64>] {
        if player == 1 {
            &self.phi1
        } else {
            &self.phi2
        }
    }

    pub fn initial_state(&self) -> PeekState {
        self.nu0
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &b)| acc | ((b as u32) << i))
    }

    /// Whether `state` satisfies player `player`'s winning formula.
    pub fn satisfies(&self, player: u8, state: PeekState) -> bool {
        self.formula(player)
            .iter()
            .any(|clause| clause.iter().all(|&lit| literal_holds(lit, state)))
    }

    pub fn moves(&self, player: u8) -> Vec<PeekMove> {
        let plates = if player == 1 { 1..=self.n1 } else { self.n1 + 1..=self.n };
        plates.map(PeekMove::Move).chain([PeekMove::Pass]).collect()
    }
}

fn literal_holds(lit: i64, state: PeekState) -> bool {
    let bit = (state >> (lit.unsigned_abs() - 1)) & 1;
    (lit > 0) == (bit == 1)
}

pub fn apply_move(state: PeekState, mv: PeekMove) -> PeekState {
    match mv {
        PeekMove::Move(k) => state ^ (1 << (k - 1)),
        PeekMove::Pass => state,
    }
}

/// Plate `plate` in position `pos` does not block hole `hole` of `player`.
pub fn open_predicate(
    g: &PeekInstance,
    player: u8,
    hole: usize,
    plate: usize,
    pos: u8,
) -> Result<bool, PeekError> {
    if player != 1 && player != 2 {
        return Err(PeekError::OutOfRange("player"));
    }
    let clause = g
        .formula(player)
        .get(hole.wrapping_sub(1))
        .ok_or(PeekError::OutOfRange("hole"))?;
    if plate == 0 || plate > g.n {
        return Err(PeekError::OutOfRange("plate"));
    }
    if pos > 1 {
        return Err(PeekError::OutOfRange("position"));
    }
    let plate = plate as i64;
    let positive = clause.contains(&plate);
    let negative = clause.contains(&-plate);
    Ok((!positive && !negative) || (positive && pos == 1) || (negative && pos == 0))
}

fn stages(h2: usize) -> Vec<String> {
    let mut c: Vec<String> = ["L1", "H0", "L2", "bot"].iter().map(|s| s.to_string()).collect();
    c.extend((1..=h2).map(|j| format!("H{j}")));
    c
}

/// Stage component of a state name produced by [`peek_to_machine`];
/// `None` for the initial state.
pub fn peek_stage(name: &str) -> Option<&str> {
    name.strip_prefix('(')?.split(',').next()
}

const RESULTS: [(&str, &str); 5] = [
    ("win", "bot"),
    ("error", "bot"),
    ("win", "1"),
    ("error", "1"),
    ("error", "2"),
];

/// The scheduled machine M(G). Plate-monitoring states are named
/// `(c,i,k,a)`, result states `(c,r,x)`.
pub fn peek_to_machine(g: &PeekInstance) -> Result<Machine, PeekError> {
    g.validate()?;
    let n = g.n;
    let c = stages(g.h2());
    let next = |ci: usize| (ci + 1) % c.len();
    let mut last_moves: Vec<String> = (1..=n).map(|j| format!("move{j}")).collect();
    last_moves.extend(["pass".to_string(), "bot".to_string()]);

    let plate = |ci: usize, i: usize, k: u8, a: &str| format!("({},{i},{k},{a})", c[ci]);
    let result = |ci: usize, r: &str, x: &str| format!("({},{r},{x})", c[ci]);

    let mut states = vec!["s0".to_string()];
    for ci in 0..c.len() {
        for i in 1..=n {
            for k in 0..=1 {
                for a in &last_moves {
                    states.push(plate(ci, i, k, a));
                }
            }
        }
        for (r, x) in RESULTS {
            states.push(result(ci, r, x));
        }
    }
    let mut actions_l: Vec<String> = (1..=g.n1).map(|j| format!("move{j}")).collect();
    actions_l.push("checkwin".into());
    let mut actions_h: Vec<String> = (1..=g.h1()).map(|j| format!("isOpen{j}")).collect();
    actions_h.extend((1..=n).map(|j| format!("isBlocking{j}")));
    let mut observations = last_moves.clone();
    observations.extend(["1".to_string(), "2".to_string(), "end".to_string()]);

    let mut def = MachineDef::new(states, "s0", actions_h, actions_l, observations);
    def.set_obs("s0", "bot", "bot");
    for ci in 0..c.len() {
        for i in 1..=n {
            for k in 0..=1 {
                for a in &last_moves {
                    def.set_obs(&plate(ci, i, k, a), a, "bot");
                }
            }
        }
        for (r, x) in RESULTS {
            def.set_obs(&result(ci, r, x), "end", x);
        }
    }

    let (l1, h0, l2, bot) = (0, 1, 2, 3);
    let flip = |i: usize, j: usize, k: u8| if i == j { 1 - k } else { k };
    for i in 1..=n {
        def.add_tau_transition("s0", &plate(l1, i, g.nu0[i - 1], "bot"));
    }
    for i in 1..=n {
        for k in 0..=1u8 {
            for a in &last_moves {
                let src = plate(l1, i, k, a);
                for j in 1..=g.n1 {
                    let mv = format!("move{j}");
                    def.add_l_transition(&src, &mv, &plate(h0, i, flip(i, j, k), &mv));
                }
                def.add_l_transition(&src, "checkwin", &plate(h0, i, k, "pass"));

                let src = plate(h0, i, k, a);
                for j in 1..=g.h1() {
                    let r = if open_predicate(g, 1, j, i, k)? { "win" } else { "error" };
                    def.add_h_transition(&src, &format!("isOpen{j}"), &result(l2, r, "bot"));
                }
                for j in 1..=n {
                    def.add_h_transition(&src, &format!("isBlocking{j}"), &plate(l2, i, k, "bot"));
                }

                let src = plate(l2, i, k, a);
                def.add_l_transition(&src, "checkwin", &result(bot, "error", "1"))
                    .add_l_transition(&src, "checkwin", &result(bot, "error", "2"));
                for j in 1..=g.n1 {
                    def.add_l_transition(&src, &format!("move{j}"), &plate(bot, i, k, "bot"));
                }

                let src = plate(bot, i, k, a);
                for j in g.n1 + 1..=n {
                    let mv = format!("move{j}");
                    def.add_tau_transition(&src, &plate(next(bot), i, flip(i, j, k), &mv));
                }
                def.add_tau_transition(&src, &plate(next(bot), i, k, "pass"));

                for hole in 1..=g.h2() {
                    let ci = bot + hole;
                    let src = plate(ci, i, k, a);
                    for j in 1..=n {
                        let dst = if j != i || !open_predicate(g, 2, hole, i, k)? {
                            plate(next(ci), i, k, "bot")
                        } else {
                            result(next(ci), "error", "bot")
                        };
                        def.add_h_transition(&src, &format!("isBlocking{j}"), &dst);
                    }
                    for j in 1..=g.h1() {
                        def.add_h_transition(&src, &format!("isOpen{j}"), &result(next(ci), "error", "bot"));
                    }
                }
            }
        }
    }
    for ci in 0..c.len() {
        for (r, x) in RESULTS {
            let src = result(ci, r, x);
            if ci == l2 && x == "bot" {
                if r == "win" {
                    def.add_l_transition(&src, "checkwin", &result(bot, "win", "1"));
                } else {
                    def.add_l_transition(&src, "checkwin", &result(bot, "error", "1"))
                        .add_l_transition(&src, "checkwin", &result(bot, "error", "2"));
                }
                for j in 1..=g.n1 {
                    def.add_l_transition(&src, &format!("move{j}"), &result(bot, r, "bot"));
                }
            } else {
                def.add_tau_transition(&src, &result(next(ci), r, x));
            }
        }
    }
    Ok(Machine::from_def(&def).expect("construction is input-enabled"))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PeekOutcome {
    /// A blindfold sequence of player-1 moves that wins against every reply.
    Win(Vec<PeekMove>),
    /// No move sequence of any length wins.
    NoWin,
    /// Neither a win nor a proof of its absence within the bound.
    Unknown,
}

pub fn solve_peek(g: &PeekInstance, move_bound: usize) -> Result<PeekOutcome, PeekError> {
    solve_peek_with(g, move_bound, false)
}

/// Breadth-first search over player 1's belief: the set of positions of
/// plays that are still undecided after a given move sequence. With
/// `initial_state_decides` a winning formula already true at the initial
/// position ends the game before any move.
pub fn solve_peek_with(
    g: &PeekInstance,
    move_bound: usize,
    initial_state_decides: bool,
) -> Result<PeekOutcome, PeekError> {
    g.validate()?;
    let start = g.initial_state();
    if initial_state_decides {
        if g.satisfies(1, start) {
            return Ok(PeekOutcome::Win(Vec::new()));
        }
        if g.satisfies(2, start) {
            return Ok(PeekOutcome::NoWin);
        }
    }
    let (moves1, moves2) = (g.moves(1), g.moves(2));
    let mut seen: HashSet<Vec<PeekState>> = HashSet::from([vec![start]]);
    // (parent, move) per search node; node 0 is the root
    let mut nodes: Vec<(usize, Option<PeekMove>)> = vec![(usize::MAX, None)];
    let mut frontier = vec![(vec![start], 0usize)];
    let path = |nodes: &[(usize, Option<PeekMove>)], mut idx: usize, last: PeekMove| {
        let mut out = vec![last];
        while let (parent, Some(mv)) = nodes[idx] {
            out.push(mv);
            idx = parent;
        }
        out.reverse();
        out
    };
    for _ in 0..move_bound {
        let mut next_frontier = Vec::new();
        for (belief, node) in &frontier {
            for &mv in &moves1 {
                let undecided: BTreeSet<PeekState> = belief
                    .iter()
                    .map(|&v| apply_move(v, mv))
                    .filter(|&v| !g.satisfies(1, v))
                    .collect();
                if undecided.is_empty() {
                    return Ok(PeekOutcome::Win(path(&nodes, *node, mv)));
                }
                let mut next = BTreeSet::new();
                let lost = undecided.iter().any(|&v| {
                    moves2.iter().any(|&reply| {
                        let w = apply_move(v, reply);
                        next.insert(w);
                        g.satisfies(2, w)
                    })
                });
                if lost {
                    continue;
                }
                let next: Vec<PeekState> = next.into_iter().collect();
                if seen.insert(next.clone()) {
                    nodes.push((*node, Some(mv)));
                    next_frontier.push((next, nodes.len() - 1));
                }
            }
        }
        if next_frontier.is_empty() {
            return Ok(PeekOutcome::NoWin);
        }
        frontier = next_frontier;
    }
    Ok(PeekOutcome::Unknown)
}
