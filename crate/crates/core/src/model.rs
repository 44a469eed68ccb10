//! Synchronous two-agent machines, runs and views.
//!
//! A machine is first described by a [`MachineDef`] (plain identifiers, the
//! interchange format) and then frozen into a [`Machine`], which interns
//! every identifier into its position in the canonical (lexicographic) order
//! and precomputes the successor table. A `Machine` only exists for
//! definitions whose [`validate_machine`] report is empty, so every checker
//! can rely on input-enabledness.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, ResourceExceeded};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AgentId {
    H,
    L,
}

/// Observation entry of one state in the interchange format.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObsEntry {
    #[serde(rename = "H", default, skip_serializing_if = "Option::is_none")]
    pub h: Option<String>,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub l: Option<String>,
}

/// Unvalidated machine description; mirrors the machine file format.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachineDef {
    pub states: Vec<String>,
    pub initial: String,
    pub actions_h: Vec<String>,
    pub actions_l: Vec<String>,
    pub observations: Vec<String>,
    pub obs: BTreeMap<String, ObsEntry>,
    pub trans: Vec<[String; 4]>,
}

fn owned<I, S>(items: I) -> Vec<String>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    items.into_iter().map(Into::into).collect()
}

impl MachineDef {
    pub fn new<S: Into<String>>(
        states: impl IntoIterator<Item = S>,
        initial: impl Into<String>,
        actions_h: impl IntoIterator<Item = S>,
        actions_l: impl IntoIterator<Item = S>,
        observations: impl IntoIterator<Item = S>,
    ) -> Self {
        MachineDef {
            states: owned(states),
            initial: initial.into(),
            actions_h: owned(actions_h),
            actions_l: owned(actions_l),
            observations: owned(observations),
            obs: BTreeMap::new(),
            trans: Vec::new(),
        }
    }

    pub fn set_obs(&mut self, state: &str, h: &str, l: &str) -> &mut Self {
        self.obs.insert(
            state.to_owned(),
            ObsEntry {
                h: Some(h.to_owned()),
                l: Some(l.to_owned()),
            },
        );
        self
    }

    pub fn add_transition(&mut self, src: &str, a_h: &str, a_l: &str, dst: &str) -> &mut Self {
        self.trans
            .push([src.to_owned(), a_h.to_owned(), a_l.to_owned(), dst.to_owned()]);
        self
    }

    /// Adds `src -(a_h, b)-> dst` for every L action `b`.
    pub fn add_h_transition(&mut self, src: &str, a_h: &str, dst: &str) -> &mut Self {
        for b in self.actions_l.clone() {
            self.add_transition(src, a_h, &b, dst);
        }
        self
    }

    /// Adds `src -(a, a_l)-> dst` for every H action `a`.
    pub fn add_l_transition(&mut self, src: &str, a_l: &str, dst: &str) -> &mut Self {
        for a in self.actions_h.clone() {
            self.add_transition(src, &a, a_l, dst);
        }
        self
    }

    /// Adds `src -(a, b)-> dst` for every joint action.
    pub fn add_tau_transition(&mut self, src: &str, dst: &str) -> &mut Self {
        for a in self.actions_h.clone() {
            for b in self.actions_l.clone() {
                self.add_transition(src, &a, &b, dst);
            }
        }
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    MissingTransition,
    DanglingReference,
    PartialObservation,
    /// Empty or duplicated declarations (no states, empty alphabet, repeated identifier).
    MalformedDeclaration,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub element: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, kind: ViolationKind) -> usize {
        self.violations.iter().filter(|v| v.kind == kind).count()
    }

    fn push(&mut self, kind: ViolationKind, element: String) {
        self.violations.push(Violation { kind, element });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "no violations");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{:?}: {}", v.kind, v.element)?;
        }
        Ok(())
    }
}

fn sorted_unique(
    items: &[String],
    what: &str,
    report: &mut ValidationReport,
) -> Vec<String> {
    let set: BTreeSet<&String> = items.iter().collect();
    if set.len() != items.len() {
        let mut seen = BTreeSet::new();
        for it in items {
            if !seen.insert(it) {
                report.push(
                    ViolationKind::MalformedDeclaration,
                    format!("duplicate {what} `{it}`"),
                );
            }
        }
    }
    if items.is_empty() {
        report.push(
            ViolationKind::MalformedDeclaration,
            format!("no {what} declared"),
        );
    }
    set.into_iter().cloned().collect()
}

/// Lists every way in which `def` fails to be an input-enabled machine with
/// total observations. The report is empty exactly when the definition is a
/// well-formed synchronous machine.
pub fn validate_machine(def: &MachineDef) -> ValidationReport {
    let mut report = ValidationReport::default();
    let states = sorted_unique(&def.states, "state", &mut report);
    let hs = sorted_unique(&def.actions_h, "H action", &mut report);
    let ls = sorted_unique(&def.actions_l, "L action", &mut report);
    let os: BTreeSet<&String> = def.observations.iter().collect();
    if os.len() != def.observations.len() {
        report.push(
            ViolationKind::MalformedDeclaration,
            "duplicate observation".to_owned(),
        );
    }
    let state_set: BTreeSet<&String> = states.iter().collect();
    let h_set: BTreeSet<&String> = hs.iter().collect();
    let l_set: BTreeSet<&String> = ls.iter().collect();

    if !state_set.contains(&def.initial) {
        report.push(
            ViolationKind::DanglingReference,
            format!("initial state `{}`", def.initial),
        );
    }

    for (state, entry) in &def.obs {
        if !state_set.contains(state) {
            report.push(
                ViolationKind::DanglingReference,
                format!("observation entry for unknown state `{state}`"),
            );
        }
        for (agent, o) in [("H", &entry.h), ("L", &entry.l)] {
            if let Some(o) = o {
                if !os.contains(o) {
                    report.push(
                        ViolationKind::DanglingReference,
                        format!("observation `{o}` of state `{state}` for {agent}"),
                    );
                }
            }
        }
    }
    for s in &states {
        let entry = def.obs.get(s);
        for (agent, o) in [
            ("H", entry.and_then(|e| e.h.as_ref())),
            ("L", entry.and_then(|e| e.l.as_ref())),
        ] {
            if o.is_none() {
                report.push(
                    ViolationKind::PartialObservation,
                    format!("state `{s}` has no {agent} observation"),
                );
            }
        }
    }

    let mut enabled: BTreeSet<(&str, &str, &str)> = BTreeSet::new();
    for [src, a, b, dst] in &def.trans {
        let mut ok = true;
        for (what, name, set) in [
            ("source state", src, &state_set),
            ("H action", a, &h_set),
            ("L action", b, &l_set),
            ("target state", dst, &state_set),
        ] {
            if !set.contains(name) {
                ok = false;
                report.push(
                    ViolationKind::DanglingReference,
                    format!("{what} `{name}` in transition [{src}, {a}, {b}, {dst}]"),
                );
            }
        }
        if ok {
            enabled.insert((src, a, b));
        }
    }
    for s in &states {
        for a in &hs {
            for b in &ls {
                if !enabled.contains(&(s.as_str(), a.as_str(), b.as_str())) {
                    report.push(
                        ViolationKind::MissingTransition,
                        format!("state `{s}` has no successor under ({a}, {b})"),
                    );
                }
            }
        }
    }
    report
}

/// A validated synchronous machine with interned identifiers.
///
/// States, actions and observations are numbered by their position in the
/// lexicographic order of their identifiers; every enumeration in the crate
/// follows this numbering.
#[derive(Clone, Debug)]
pub struct Machine {
    states: Vec<String>,
    h_actions: Vec<String>,
    l_actions: Vec<String>,
    observations: Vec<String>,
    state_index: HashMap<String, usize>,
    h_index: HashMap<String, usize>,
    l_index: HashMap<String, usize>,
    obs_index: HashMap<String, usize>,
    initial: usize,
    obs_h: Vec<usize>,
    obs_l: Vec<usize>,
    succ: Vec<Vec<usize>>,
}

fn index_of(names: &[String]) -> HashMap<String, usize> {
    names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.clone(), i))
        .collect()
}

impl Machine {
    pub fn from_def(def: &MachineDef) -> Result<Machine, ModelError> {
        let report = validate_machine(def);
        if !report.is_empty() {
            return Err(ModelError::Invalid(report));
        }
        let sorted = |v: &[String]| -> Vec<String> {
            v.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect()
        };
        let states = sorted(&def.states);
        let h_actions = sorted(&def.actions_h);
        let l_actions = sorted(&def.actions_l);
        let observations = sorted(&def.observations);
        let state_index = index_of(&states);
        let h_index = index_of(&h_actions);
        let l_index = index_of(&l_actions);
        let obs_index = index_of(&observations);

        let n = states.len();
        let (nh, nl) = (h_actions.len(), l_actions.len());
        let mut obs_h = vec![0; n];
        let mut obs_l = vec![0; n];
        for (s, entry) in &def.obs {
            let si = state_index[s];
            obs_h[si] = obs_index[entry.h.as_ref().expect("validated")];
            obs_l[si] = obs_index[entry.l.as_ref().expect("validated")];
        }
        let mut succ = vec![Vec::new(); n * nh * nl];
        for [src, a, b, dst] in &def.trans {
            let slot = (state_index[src] * nh + h_index[a]) * nl + l_index[b];
            succ[slot].push(state_index[dst]);
        }
        for targets in &mut succ {
            targets.sort_unstable();
            targets.dedup();
        }
        Ok(Machine {
            initial: state_index[&def.initial],
            states,
            h_actions,
            l_actions,
            observations,
            state_index,
            h_index,
            l_index,
            obs_index,
            obs_h,
            obs_l,
            succ,
        })
    }

    /// Converts back to the interchange form, in canonical order.
    pub fn to_def(&self) -> MachineDef {
        let mut def = MachineDef::new(
            self.states.iter().cloned(),
            self.states[self.initial].clone(),
            self.h_actions.iter().cloned(),
            self.l_actions.iter().cloned(),
            self.observations.iter().cloned(),
        );
        for s in 0..self.num_states() {
            def.set_obs(
                &self.states[s],
                &self.observations[self.obs_h[s]],
                &self.observations[self.obs_l[s]],
            );
        }
        for (s, a, b, t) in self.transitions() {
            def.add_transition(
                &self.states[s],
                &self.h_actions[a],
                &self.l_actions[b],
                &self.states[t],
            );
        }
        def
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }
    pub fn num_h_actions(&self) -> usize {
        self.h_actions.len()
    }
    pub fn num_l_actions(&self) -> usize {
        self.l_actions.len()
    }
    pub fn num_observations(&self) -> usize {
        self.observations.len()
    }
    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn state_name(&self, s: usize) -> &str {
        &self.states[s]
    }
    pub fn h_action_name(&self, a: usize) -> &str {
        &self.h_actions[a]
    }
    pub fn l_action_name(&self, b: usize) -> &str {
        &self.l_actions[b]
    }
    pub fn observation_name(&self, o: usize) -> &str {
        &self.observations[o]
    }
    pub fn action_name(&self, agent: AgentId, a: usize) -> &str {
        match agent {
            AgentId::H => self.h_action_name(a),
            AgentId::L => self.l_action_name(a),
        }
    }

    pub fn state_id(&self, name: &str) -> Result<usize, ModelError> {
        lookup(&self.state_index, "state", name)
    }
    pub fn h_action_id(&self, name: &str) -> Result<usize, ModelError> {
        lookup(&self.h_index, "H action", name)
    }
    pub fn l_action_id(&self, name: &str) -> Result<usize, ModelError> {
        lookup(&self.l_index, "L action", name)
    }
    pub fn observation_id(&self, name: &str) -> Result<usize, ModelError> {
        lookup(&self.obs_index, "observation", name)
    }
    pub fn action_id(&self, agent: AgentId, name: &str) -> Result<usize, ModelError> {
        match agent {
            AgentId::H => self.h_action_id(name),
            AgentId::L => self.l_action_id(name),
        }
    }

    #[inline]
    pub fn obs(&self, s: usize, agent: AgentId) -> usize {
        match agent {
            AgentId::H => self.obs_h[s],
            AgentId::L => self.obs_l[s],
        }
    }
    #[inline]
    pub fn obs_h(&self, s: usize) -> usize {
        self.obs_h[s]
    }
    #[inline]
    pub fn obs_l(&self, s: usize) -> usize {
        self.obs_l[s]
    }

    /// Successor states of `s` under the joint action `(a_h, a_l)`, sorted.
    #[inline]
    pub fn succ(&self, s: usize, a_h: usize, a_l: usize) -> &[usize] {
        &self.succ[(s * self.h_actions.len() + a_h) * self.l_actions.len() + a_l]
    }

    /// Name-level successor lookup.
    pub fn successors(&self, s: &str, a_h: &str, a_l: &str) -> Result<BTreeSet<String>, ModelError> {
        let (s, a, b) = (self.state_id(s)?, self.h_action_id(a_h)?, self.l_action_id(a_l)?);
        Ok(self
            .succ(s, a, b)
            .iter()
            .map(|&t| self.states[t].clone())
            .collect())
    }

    /// All transitions `(src, a_h, a_l, dst)` in canonical order.
    pub fn transitions(&self) -> impl Iterator<Item = (usize, usize, usize, usize)> + '_ {
        let (nh, nl) = (self.h_actions.len(), self.l_actions.len());
        (0..self.num_states()).flat_map(move |s| {
            (0..nh).flat_map(move |a| {
                (0..nl).flat_map(move |b| self.succ(s, a, b).iter().map(move |&t| (s, a, b, t)))
            })
        })
    }

    pub fn state_names<'a>(&'a self, set: impl IntoIterator<Item = usize> + 'a) -> Vec<String> {
        set.into_iter().map(|s| self.states[s].clone()).collect()
    }
}

fn lookup(map: &HashMap<String, usize>, kind: &'static str, name: &str) -> Result<usize, ModelError> {
    map.get(name).copied().ok_or_else(|| ModelError::UnknownIdentifier {
        kind,
        name: name.to_owned(),
    })
}

/// Transitions from each state are controlled by at most one agent.
pub fn is_scheduled(m: &Machine) -> bool {
    let (nh, nl) = (m.num_h_actions(), m.num_l_actions());
    (0..m.num_states()).all(|s| {
        let ignores_l = (0..nh).all(|a| (1..nl).all(|b| m.succ(s, a, b) == m.succ(s, a, 0)));
        let ignores_h = (0..nl).all(|b| (1..nh).all(|a| m.succ(s, a, b) == m.succ(s, 0, b)));
        ignores_l || ignores_h
    })
}

/// `s_0 a_1 s_1 ... a_n s_n`, with each `a_i` an (H action, L action) pair.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Run {
    pub states: Vec<usize>,
    pub actions: Vec<(usize, usize)>,
}

impl Run {
    pub fn initial(m: &Machine) -> Run {
        Run {
            states: vec![m.initial()],
            actions: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn last_state(&self) -> usize {
        *self.states.last().expect("a run has at least one state")
    }

    pub fn extended(&self, a_h: usize, a_l: usize, t: usize) -> Run {
        let mut r = self.clone();
        r.actions.push((a_h, a_l));
        r.states.push(t);
        r
    }

    pub fn h_actions(&self) -> Vec<usize> {
        self.actions.iter().map(|&(a, _)| a).collect()
    }

    fn check(&self, m: &Machine) -> Result<(), ModelError> {
        if self.states.len() != self.actions.len() + 1 {
            return Err(ModelError::NotARun(format!(
                "{} states for {} actions",
                self.states.len(),
                self.actions.len()
            )));
        }
        if self.states[0] != m.initial() {
            return Err(ModelError::NotARun("does not start at the initial state".into()));
        }
        for (i, &(a, b)) in self.actions.iter().enumerate() {
            let (s, t) = (self.states[i], self.states[i + 1]);
            if s >= m.num_states()
                || t >= m.num_states()
                || a >= m.num_h_actions()
                || b >= m.num_l_actions()
                || !m.succ(s, a, b).contains(&t)
            {
                return Err(ModelError::NotARun(format!("step {} is not a transition", i + 1)));
            }
        }
        Ok(())
    }
}

/// An agent's history `o_0 b_1 o_1 ... b_n o_n` of observations and own actions.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct View {
    pub agent: AgentId,
    pub observations: Vec<usize>,
    pub actions: Vec<usize>,
}

impl View {
    pub fn new(agent: AgentId, first_obs: usize) -> View {
        View {
            agent,
            observations: vec![first_obs],
            actions: Vec::new(),
        }
    }

    /// Number of actions in the view.
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn push(&mut self, action: usize, obs: usize) {
        self.actions.push(action);
        self.observations.push(obs);
    }

    pub fn extended(&self, action: usize, obs: usize) -> View {
        let mut v = self.clone();
        v.push(action, obs);
        v
    }

    pub fn prefix(&self, len: usize) -> View {
        View {
            agent: self.agent,
            observations: self.observations[..=len].to_vec(),
            actions: self.actions[..len].to_vec(),
        }
    }

    /// Alternating identifier list `o_0, b_1, o_1, ...`.
    pub fn symbols(&self, m: &Machine) -> Vec<String> {
        let mut out = Vec::with_capacity(2 * self.len() + 1);
        out.push(m.observation_name(self.observations[0]).to_owned());
        for (i, &a) in self.actions.iter().enumerate() {
            out.push(m.action_name(self.agent, a).to_owned());
            out.push(m.observation_name(self.observations[i + 1]).to_owned());
        }
        out
    }

    /// Concatenation of [`View::symbols`], e.g. `00001`.
    pub fn compact(&self, m: &Machine) -> String {
        self.symbols(m).concat()
    }

    /// Concatenated observations only, dropping the actions.
    pub fn observation_string(&self, m: &Machine) -> String {
        self.observations
            .iter()
            .map(|&o| m.observation_name(o))
            .collect()
    }

    pub fn from_symbols<S: AsRef<str>>(
        m: &Machine,
        agent: AgentId,
        symbols: &[S],
    ) -> Result<View, ModelError> {
        if symbols.len().is_multiple_of(2) {
            return Err(ModelError::MalformedView(format!(
                "a view alternates observations and actions and has odd length, got {}",
                symbols.len()
            )));
        }
        let mut view = View::new(agent, m.observation_id(symbols[0].as_ref())?);
        for pair in symbols[1..].chunks(2) {
            let a = m.action_id(agent, pair[0].as_ref())?;
            let o = m.observation_id(pair[1].as_ref())?;
            view.push(a, o);
        }
        Ok(view)
    }
}

pub fn view_of_run(m: &Machine, r: &Run, agent: AgentId) -> Result<View, ModelError> {
    r.check(m)?;
    let mut v = View::new(agent, m.obs(r.states[0], agent));
    for (i, &(a, b)) in r.actions.iter().enumerate() {
        let own = match agent {
            AgentId::H => a,
            AgentId::L => b,
        };
        v.push(own, m.obs(r.states[i + 1], agent));
    }
    Ok(v)
}

/// Every run of length at most `depth`, shortest first, each length in
/// lexicographic order of (H action, L action, target) choices.
pub fn enumerate_runs(m: &Machine, depth: usize, max_runs: usize) -> Result<Vec<Run>, ResourceExceeded> {
    let mut all = vec![Run::initial(m)];
    let mut layer_start = 0;
    for _ in 0..depth {
        let layer_end = all.len();
        for i in layer_start..layer_end {
            let s = all[i].last_state();
            for a in 0..m.num_h_actions() {
                for b in 0..m.num_l_actions() {
                    for &t in m.succ(s, a, b) {
                        if all.len() >= max_runs {
                            return Err(ResourceExceeded::new("enumerated runs", max_runs));
                        }
                        let r = all[i].extended(a, b, t);
                        all.push(r);
                    }
                }
            }
        }
        layer_start = layer_end;
    }
    Ok(all)
}

/// The possible L views of length at most `depth`.
pub fn l_view_language(
    m: &Machine,
    depth: usize,
    max_views: usize,
) -> Result<BTreeSet<View>, ResourceExceeded> {
    // Each frontier entry pairs an L view with the end states of runs producing it.
    let mut frontier: BTreeMap<View, BTreeSet<usize>> = BTreeMap::new();
    frontier.insert(
        View::new(AgentId::L, m.obs_l(m.initial())),
        BTreeSet::from([m.initial()]),
    );
    let mut out: BTreeSet<View> = frontier.keys().cloned().collect();
    for _ in 0..depth {
        let mut next: BTreeMap<View, BTreeSet<usize>> = BTreeMap::new();
        for (view, ends) in &frontier {
            for &s in ends {
                for a in 0..m.num_h_actions() {
                    for b in 0..m.num_l_actions() {
                        for &t in m.succ(s, a, b) {
                            next.entry(view.extended(b, m.obs_l(t))).or_default().insert(t);
                        }
                    }
                }
            }
        }
        out.extend(next.keys().cloned());
        if out.len() > max_views {
            return Err(ResourceExceeded::new("L views", max_views));
        }
        frontier = next;
    }
    Ok(out)
}

/// Whether `view` is produced by some run of `m`.
pub fn is_possible_view(m: &Machine, view: &View) -> bool {
    let mut current: BTreeSet<usize> = BTreeSet::new();
    if m.obs(m.initial(), view.agent) == view.observations[0] {
        current.insert(m.initial());
    }
    for (i, &own) in view.actions.iter().enumerate() {
        let o = view.observations[i + 1];
        let mut next = BTreeSet::new();
        for &s in &current {
            for a in 0..m.num_h_actions() {
                for b in 0..m.num_l_actions() {
                    let acted = match view.agent {
                        AgentId::H => a,
                        AgentId::L => b,
                    };
                    if acted != own {
                        continue;
                    }
                    next.extend(m.succ(s, a, b).iter().copied().filter(|&t| m.obs(t, view.agent) == o));
                }
            }
        }
        current = next;
    }
    !current.is_empty()
}
