use proptest::prelude::*;

use syncsec::format::ResDoc;
use syncsec::model::{enumerate_runs, l_view_language};
use syncsec::ndi::{check_ndi, delta_abo};
use syncsec::nds::{check_nds, knowledge_update, NdsLimits, NdsVerdict};
use syncsec::random::{random_nfa, random_peek, random_small_machine, Envelope};
use syncsec::reductions::{nfa_universal, peek_to_machine, peek::peek_stage};
use syncsec::res::{check_res, is_unwinding, reachable_restriction, ResVerdict};
use syncsec::{fixtures::fixture_fig2, Machine, StateSet};

const ENV: Envelope = Envelope {
    max_states: 5,
    max_h: 2,
    max_l: 2,
    max_obs: 3,
};

fn set_of(m: &Machine, mask: u32) -> StateSet {
    StateSet::from_states(m.num_states(), (0..m.num_states()).filter(|s| mask >> s & 1 == 1))
}

fn union(a: &StateSet, b: &StateSet) -> StateSet {
    let mut u = a.clone();
    u.union_with(b);
    u
}

proptest! {
    #[test]
    fn delta_distributes_over_union(seed in any::<u64>(), x in any::<u32>(), y in any::<u32>(), pick in any::<u64>()) {
        let m = random_small_machine(&ENV, seed);
        let (t1, t2) = (set_of(&m, x), set_of(&m, y));
        let a = pick as usize % m.num_h_actions();
        let b = (pick >> 8) as usize % m.num_l_actions();
        let o = (pick >> 16) as usize % m.num_observations();
        let whole = delta_abo(&m, &union(&t1, &t2), a, b, o);
        prop_assert_eq!(&whole, &union(&delta_abo(&m, &t1, a, b, o), &delta_abo(&m, &t2, a, b, o)));
        prop_assert!(delta_abo(&m, &t1, a, b, o).is_subset(&whole));
    }

    #[test]
    fn knowledge_update_refines_delta(seed in any::<u64>(), x in any::<u32>(), y in any::<u32>(), pick in any::<u64>()) {
        let m = random_small_machine(&ENV, seed);
        let (k1, k2) = (set_of(&m, x), set_of(&m, y));
        let a = pick as usize % m.num_h_actions();
        let b = (pick >> 8) as usize % m.num_l_actions();
        let o_l = (pick >> 16) as usize % m.num_observations();
        let mut all = StateSet::empty(m.num_states());
        for o_h in 0..m.num_observations() {
            let part = knowledge_update(&m, &k1, a, o_h, b, o_l);
            let whole = knowledge_update(&m, &union(&k1, &k2), a, o_h, b, o_l);
            prop_assert_eq!(&whole, &union(&part, &knowledge_update(&m, &k2, a, o_h, b, o_l)));
            prop_assert!(part.is_subset(&whole));
            all.union_with(&part);
        }
        prop_assert_eq!(all, delta_abo(&m, &k1, a, b, o_l));
    }

    #[test]
    fn runs_are_prefix_closed(seed in any::<u64>()) {
        let m = random_small_machine(&ENV, seed);
        let runs = enumerate_runs(&m, 3, 100_000).unwrap();
        let set: std::collections::BTreeSet<_> = runs.iter().cloned().collect();
        prop_assert_eq!(set.len(), runs.len());
        for r in &runs {
            prop_assert_eq!(r.states[0], m.initial());
            for (i, &(a, b)) in r.actions.iter().enumerate() {
                prop_assert!(m.succ(r.states[i], a, b).contains(&r.states[i + 1]));
            }
            if !r.actions.is_empty() {
                let mut p = r.clone();
                p.actions.pop();
                p.states.pop();
                prop_assert!(set.contains(&p));
            }
        }
    }

    #[test]
    fn containment_holds(seed in any::<u64>()) {
        let m = random_small_machine(&ENV, seed);
        let res = matches!(check_res(&m), ResVerdict::Satisfies(_));
        let ndi = check_ndi(&m).unwrap().is_satisfied();
        match check_nds(&m, &NdsLimits::with_max_visited(1 << 16)).verdict {
            NdsVerdict::Satisfies => prop_assert!(ndi),
            NdsVerdict::Violates(_) => prop_assert!(!res),
            NdsVerdict::ResourceExceeded(_) => prop_assert!(!res || ndi),
        }
    }

    #[test]
    fn res_ignores_unreachable_states(seed in any::<u64>()) {
        let m = random_small_machine(&ENV, seed);
        let r = reachable_restriction(&m);
        prop_assert_eq!(
            ResDoc::from_verdict(&m, &check_res(&m)),
            ResDoc::from_verdict(&r, &check_res(&r))
        );
    }

    #[test]
    fn res_partition_is_an_unwinding(seed in any::<u64>()) {
        let m = random_small_machine(&ENV, seed);
        if let ResVerdict::Satisfies(p) = check_res(&m) {
            prop_assert_eq!(is_unwinding(&m, &p.relation()), Ok(true));
        }
    }

    #[test]
    fn universality_matches_short_words(states in 1usize..=3, seed in any::<u64>()) {
        let a = random_nfa(states, 2, 0.4, seed);
        let mut all = true;
        // a shortest rejected word is no longer than 2^states
        'len: for len in 0..=8usize {
            for w in 0..1usize << len {
                let word: Vec<usize> = (0..len).map(|i| w >> i & 1).collect();
                if !a.accepts(&word).unwrap() {
                    all = false;
                    break 'len;
                }
            }
        }
        prop_assert_eq!(nfa_universal(&a, 1 << 12).unwrap(), all);
    }

    #[test]
    fn peek_machine_follows_stage_cycle(seed in any::<u64>(), h2 in 0usize..=2) {
        let g = random_peek(2, 1, 1, h2, seed);
        let m = peek_to_machine(&g).unwrap();
        let mut cycle: Vec<String> = ["L1", "H0", "L2", "bot"].map(String::from).to_vec();
        cycle.extend((1..=h2).map(|i| format!("H{i}")));
        for (s, _, _, t) in m.transitions() {
            let to = peek_stage(m.state_name(t)).expect("initial state is never re-entered");
            match peek_stage(m.state_name(s)) {
                None => prop_assert_eq!(to, "L1"),
                Some(from) => {
                    let i = cycle.iter().position(|c| c == from).unwrap();
                    prop_assert_eq!(to, cycle[(i + 1) % cycle.len()].as_str());
                }
            }
        }
    }
}

fn in_fig2_language(v: &str) -> bool {
    if v == "0" {
        return true;
    }
    let Some(rest) = v.strip_prefix("000") else {
        return false;
    };
    let pairs: Vec<&str> = (0..rest.len() / 2).map(|i| &rest[2 * i..2 * i + 2]).collect();
    rest.len() % 2 == 0 && (pairs.iter().all(|p| *p == "00") || pairs.iter().all(|p| *p == "01"))
}

#[test]
fn fig2_view_language() {
    let m = fixture_fig2();
    for d in 0..=8 {
        let views = l_view_language(&m, d, 10_000).unwrap();
        let words: Vec<String> = views.iter().map(|v| v.compact(&m)).collect();
        assert!(words.iter().all(|w| in_fig2_language(w)), "{words:?}");
        // one view of each length below 2, two of each length from 2 on
        let expected = (0..=d).map(|l| if l < 2 { 1 } else { 2 }).sum::<usize>();
        assert_eq!(words.len(), expected);
    }
}
