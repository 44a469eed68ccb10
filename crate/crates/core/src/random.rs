//! Seeded generators for machines, automata and games. The same seed
//! always gives the same output.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{Machine, MachineDef};
use crate::reductions::{Nfa, PeekInstance};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MachineParams {
    pub states: usize,
    pub h_actions: usize,
    pub l_actions: usize,
    pub observations: usize,
    /// Each joint action gets between 1 and this many successors.
    pub max_successors: usize,
    /// Successors ignore the H action.
    pub h_blind: bool,
    /// Probability that a single (state, L action) pair ignores the H action
    /// when `h_blind` is off.
    pub blind_pairs: f64,
}

impl MachineParams {
    pub fn new(states: usize, h_actions: usize, l_actions: usize, observations: usize) -> Self {
        MachineParams {
            states,
            h_actions,
            l_actions,
            observations,
            max_successors: 2,
            h_blind: false,
            blind_pairs: 0.0,
        }
    }
}

fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

pub fn random_machine(p: &MachineParams, seed: u64) -> Machine {
    assert!(p.states > 0 && p.h_actions > 0 && p.l_actions > 0 && p.observations > 0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let states = names("s", p.states);
    let hs = names("h", p.h_actions);
    let ls = names("l", p.l_actions);
    let os = names("", p.observations);
    let mut def = MachineDef::new(states.clone(), "s0", hs.clone(), ls.clone(), os.clone());
    for s in &states {
        let h = &os[rng.gen_range(0..p.observations)];
        let l = &os[rng.gen_range(0..p.observations)];
        def.set_obs(s, h, l);
    }
    let fanout = p.max_successors.clamp(1, p.states);
    for s in &states {
        for b in &ls {
            let blind = p.h_blind || (p.blind_pairs > 0.0 && rng.gen_bool(p.blind_pairs));
            let mut shared: Option<Vec<usize>> = None;
            for a in &hs {
                let targets = match (&shared, blind) {
                    (Some(t), true) => t.clone(),
                    _ => {
                        let k = rng.gen_range(1..=fanout);
                        let t = sample(&mut rng, p.states, k).into_vec();
                        shared = Some(t.clone());
                        t
                    }
                };
                for t in targets {
                    def.add_transition(s, a, b, &states[t]);
                }
            }
        }
    }
    Machine::from_def(&def).expect("generated machine is input-enabled")
}

/// Bounds for [`random_small_machine`]. The state count is uniform in
/// `1..=max_states`; the other dimensions take their maximum three times in
/// four and are uniform otherwise.
#[derive(Clone, Copy, Debug)]
pub struct Envelope {
    pub max_states: usize,
    pub max_h: usize,
    pub max_l: usize,
    pub max_obs: usize,
}

pub fn random_small_machine(env: &Envelope, seed: u64) -> Machine {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x005e_ed0f_5a11);
    let mut dim = |max: usize| {
        if rng.gen_bool(0.75) {
            max
        } else {
            rng.gen_range(1..=max)
        }
    };
    let (h, l, o) = (dim(env.max_h), dim(env.max_l), dim(env.max_obs));
    let mut p = MachineParams::new(rng.gen_range(1..=env.max_states), h, l, o);
    p.max_successors = rng.gen_range(1..=2);
    p.blind_pairs = [0.0, 0.5, 0.9][rng.gen_range(0..3)];
    random_machine(&p, seed)
}

/// Each transition `(q, a, q')` is present with probability `density`.
pub fn random_nfa(states: usize, letters: usize, density: f64, seed: u64) -> Nfa {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let qs = names("q", states);
    let alphabet: Vec<String> = (0..letters).map(|i| ((b'a' + i as u8) as char).to_string()).collect();
    let initial = qs.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect();
    let final_states = qs.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect();
    let mut trans = Vec::new();
    for q in &qs {
        for a in &alphabet {
            for t in &qs {
                if rng.gen_bool(density) {
                    trans.push([q.clone(), a.clone(), t.clone()]);
                }
            }
        }
    }
    Nfa {
        states: qs,
        initial,
        alphabet,
        final_states,
        trans,
    }
}

/// A game with `n` plates, `n1` of them for player 1, and `h1`/`h2` holes.
/// Each plate is absent from a clause, or present positively or negatively,
/// with equal odds; clauses are redrawn until nonempty.
pub fn random_peek(n: usize, n1: usize, h1: usize, h2: usize, seed: u64) -> PeekInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let clause = |rng: &mut ChaCha8Rng| -> Vec<i64> {
        loop {
            let c: Vec<i64> = (1..=n as i64)
                .filter_map(|k| match rng.gen_range(0..3) {
                    0 => None,
                    1 => Some(k),
                    _ => Some(-k),
                })
                .collect();
            if !c.is_empty() || n == 0 {
                return c;
            }
        }
    };
    let phi1 = (0..h1).map(|_| clause(&mut rng)).collect();
    let phi2 = (0..h2).map(|_| clause(&mut rng)).collect();
    let nu0 = (0..n).map(|_| rng.gen_range(0..=1)).collect();
    PeekInstance { n, n1, phi1, phi2, nu0 }
}
