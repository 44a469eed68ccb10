//! Machines built from hard source problems, with exact solvers for the
//! source problems themselves.
//!
//! [`nfa`] turns an NFA into a machine that satisfies NDI exactly when the
//! automaton is universal. [`peek`] turns a BLIND-PEEK game into a machine
//! that violates NDS exactly when player 1 has a blindfold winning strategy.

pub mod nfa;
pub mod peek;

pub use nfa::{nfa_to_machine, nfa_universal, Nfa, NfaError};
pub use peek::{open_predicate, peek_to_machine, solve_peek, PeekError, PeekInstance, PeekOutcome};
