//! Bundled example machines.
//!
//! `fixture_fig1` is secure for NDI but lets H signal one bit to L through a
//! strategy. `fixture_fig2` is secure for NDS but admits no synchronous
//! unwinding. Sink states carry self-loops on every joint action so both are
//! input-enabled.

use crate::model::{Machine, MachineDef};

/// Five states, `A_H = {0, 1}`, `A_L = {0}`.
///
/// `s0` branches nondeterministically to `s1` (H sees 0) or `s2` (H sees 1).
/// From there L's next observation is H's observation xor H's action:
/// `s3` shows 0 to L and `s4` shows 1.
pub fn fixture_fig1() -> Machine {
    let mut def = MachineDef::new(
        ["s0", "s1", "s2", "s3", "s4"],
        "s0",
        ["0", "1"],
        ["0"],
        ["0", "1"],
    );
    def.set_obs("s0", "0", "0")
        .set_obs("s1", "0", "0")
        .set_obs("s2", "1", "0")
        .set_obs("s3", "0", "0")
        .set_obs("s4", "0", "1");
    for a in ["0", "1"] {
        def.add_transition("s0", a, "0", "s1");
        def.add_transition("s0", a, "0", "s2");
    }
    def.add_transition("s1", "0", "0", "s3")
        .add_transition("s1", "1", "0", "s4")
        .add_transition("s2", "0", "0", "s4")
        .add_transition("s2", "1", "0", "s3");
    def.add_tau_transition("s3", "s3").add_tau_transition("s4", "s4");
    Machine::from_def(&def).expect("fixture is valid")
}

/// Six states, `A_H = {0, 1}`, `A_L = {0}`; L views are `000((00)*+(01)*)`.
///
/// `s0 -(0,0)-> s1`, `s0 -(1,0)-> s2 | s3`. From `s1` both futures remain
/// open, `s2` leads only to the all-0 sink `s4`, `s3` only to the 1 sink `s5`.
pub fn fixture_fig2() -> Machine {
    let mut def = MachineDef::new(
        ["s0", "s1", "s2", "s3", "s4", "s5"],
        "s0",
        ["0", "1"],
        ["0"],
        ["0", "1"],
    );
    for s in ["s0", "s1", "s2", "s3", "s4"] {
        def.set_obs(s, "0", "0");
    }
    def.set_obs("s5", "0", "1");
    def.add_transition("s0", "0", "0", "s1")
        .add_transition("s0", "1", "0", "s2")
        .add_transition("s0", "1", "0", "s3");
    def.add_tau_transition("s1", "s4")
        .add_tau_transition("s1", "s5")
        .add_tau_transition("s2", "s4")
        .add_tau_transition("s3", "s5")
        .add_tau_transition("s4", "s4")
        .add_tau_transition("s5", "s5");
    Machine::from_def(&def).expect("fixture is valid")
}

/// One state `s0` with a self-loop on every joint action.
pub fn self_loop_machine(actions_h: &[&str], actions_l: &[&str]) -> Machine {
    let mut def = MachineDef::new(
        vec!["s0"],
        "s0",
        actions_h.to_vec(),
        actions_l.to_vec(),
        vec!["0"],
    );
    def.set_obs("s0", "0", "0");
    def.add_tau_transition("s0", "s0");
    Machine::from_def(&def).expect("fixture is valid")
}
