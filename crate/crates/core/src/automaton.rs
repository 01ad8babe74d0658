//! Deterministic finite automata with partial transition functions.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::sync::Arc;

use crate::alphabet::{Alphabet, EventId, EventSet};
use crate::error::{Error, Result};

pub type StateId = usize;

/// A deterministic automaton over a subset of an [`Alphabet`].
///
/// The automaton's own event set matters for synchronous composition:
/// events outside it are private to the other operand.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Automaton {
    alphabet: Arc<Alphabet>,
    events: EventSet,
    labels: Vec<String>,
    delta: Vec<BTreeMap<EventId, StateId>>,
    marked: Vec<bool>,
    initial: StateId,
}

#[derive(Clone, Debug)]
pub struct AutomatonBuilder {
    alphabet: Arc<Alphabet>,
    events: EventSet,
    labels: Vec<String>,
    delta: Vec<BTreeMap<EventId, StateId>>,
    marked: Vec<bool>,
}

impl AutomatonBuilder {
    pub fn new(alphabet: &Arc<Alphabet>, events: EventSet) -> Self {
        AutomatonBuilder {
            alphabet: Arc::clone(alphabet),
            events,
            labels: Vec::new(),
            delta: Vec::new(),
            marked: Vec::new(),
        }
    }

    pub fn add_state(&mut self, label: impl Into<String>, marked: bool) -> StateId {
        self.labels.push(label.into());
        self.delta.push(BTreeMap::new());
        self.marked.push(marked);
        self.labels.len() - 1
    }

    pub fn num_states(&self) -> usize {
        self.labels.len()
    }

    pub fn next(&self, q: StateId, e: EventId) -> Option<StateId> {
        self.delta.get(q).and_then(|m| m.get(&e).copied())
    }

    pub fn set_marked(&mut self, q: StateId, marked: bool) {
        self.marked[q] = marked;
    }

    /// Adds `from --e--> to`. Re-adding an identical transition is a no-op.
    pub fn add_transition(&mut self, from: StateId, e: EventId, to: StateId) -> Result<()> {
        let n = self.labels.len();
        if from >= n {
            return Err(Error::UnknownState(from));
        }
        if to >= n {
            return Err(Error::UnknownState(to));
        }
        if !self.events.contains(&e) {
            return Err(Error::EventNotInAutomaton(self.alphabet.name(e).to_string()));
        }
        match self.delta[from].insert(e, to) {
            Some(old) if old != to => Err(Error::Nondeterministic {
                state: from,
                event: self.alphabet.name(e).to_string(),
            }),
            _ => Ok(()),
        }
    }

    pub fn build(self, initial: StateId) -> Result<Automaton> {
        if initial >= self.labels.len() {
            return Err(Error::UnknownState(initial));
        }
        Ok(Automaton {
            alphabet: self.alphabet,
            events: self.events,
            labels: self.labels,
            delta: self.delta,
            marked: self.marked,
            initial,
        })
    }
}

impl Automaton {
    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn events(&self) -> &EventSet {
        &self.events
    }

    pub fn num_states(&self) -> usize {
        self.labels.len()
    }

    pub fn states(&self) -> std::ops::Range<StateId> {
        0..self.labels.len()
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn label(&self, q: StateId) -> &str {
        &self.labels[q]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn state_by_label(&self, label: &str) -> Option<StateId> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn is_marked(&self, q: StateId) -> bool {
        self.marked[q]
    }

    pub fn marked_states(&self) -> BTreeSet<StateId> {
        self.states().filter(|&q| self.marked[q]).collect()
    }

    pub fn next(&self, q: StateId, e: EventId) -> Option<StateId> {
        self.delta[q].get(&e).copied()
    }

    pub fn transitions(&self, q: StateId) -> impl Iterator<Item = (EventId, StateId)> + '_ {
        self.delta[q].iter().map(|(&e, &t)| (e, t))
    }

    pub fn enabled(&self, q: StateId) -> EventSet {
        self.delta[q].keys().copied().collect()
    }

    pub fn num_transitions(&self) -> usize {
        self.delta.iter().map(BTreeMap::len).sum()
    }

    /// State reached by `s` from the initial state.
    pub fn run(&self, s: &[EventId]) -> Option<StateId> {
        self.run_from(self.initial, s)
    }

    pub fn run_from(&self, q: StateId, s: &[EventId]) -> Option<StateId> {
        s.iter().try_fold(q, |q, &e| self.next(q, e))
    }

    pub fn accepts(&self, s: &[EventId]) -> bool {
        self.run(s).is_some()
    }

    pub fn same_alphabet(&self, other: &Automaton) -> bool {
        Arc::ptr_eq(&self.alphabet, &other.alphabet) || *self.alphabet == *other.alphabet
    }

    /// Copy with a new marking.
    pub fn with_marking(&self, marked: impl Fn(StateId) -> bool) -> Automaton {
        let mut a = self.clone();
        a.marked = self.states().map(marked).collect();
        a
    }

    pub fn with_all_marked(&self) -> Automaton {
        self.with_marking(|_| true)
    }

    /// Copy with every state relabelled.
    pub fn with_labels(&self, label: impl Fn(StateId) -> String) -> Automaton {
        let mut a = self.clone();
        a.labels = self.states().map(label).collect();
        a
    }

    /// Copy retaining only transitions accepted by `keep`.
    pub fn filter_transitions(&self, keep: impl Fn(StateId, EventId, StateId) -> bool) -> Automaton {
        let mut a = self.clone();
        for (q, m) in a.delta.iter_mut().enumerate() {
            m.retain(|&e, &mut t| keep(q, e, t));
        }
        a
    }

    /// Rebuilds the automaton over an equal alphabet given by another handle.
    pub fn rebind(&self, alphabet: &Arc<Alphabet>) -> Result<Automaton> {
        if *self.alphabet != **alphabet {
            return Err(Error::AlphabetMismatch);
        }
        let mut a = self.clone();
        a.alphabet = Arc::clone(alphabet);
        Ok(a)
    }

    pub fn builder(&self) -> AutomatonBuilder {
        AutomatonBuilder {
            alphabet: Arc::clone(&self.alphabet),
            events: self.events.clone(),
            labels: self.labels.clone(),
            delta: self.delta.clone(),
            marked: self.marked.clone(),
        }
    }

    /// States reachable from the initial state, in breadth-first order.
    pub fn reachable(&self) -> Vec<StateId> {
        let mut seen = vec![false; self.num_states()];
        let mut order = vec![self.initial];
        seen[self.initial] = true;
        let mut i = 0;
        while i < order.len() {
            for (_, t) in self.transitions(order[i]) {
                if !seen[t] {
                    seen[t] = true;
                    order.push(t);
                }
            }
            i += 1;
        }
        order
    }

    /// Shortest string from the initial state to a state satisfying `goal`.
    pub fn find_path(&self, goal: impl Fn(StateId) -> bool) -> Option<Vec<EventId>> {
        let mut parent: Vec<Option<(StateId, EventId)>> = vec![None; self.num_states()];
        let mut seen = vec![false; self.num_states()];
        let mut queue = VecDeque::from([self.initial]);
        seen[self.initial] = true;
        while let Some(q) = queue.pop_front() {
            if goal(q) {
                let mut path = Vec::new();
                let mut cur = q;
                while let Some((p, e)) = parent[cur] {
                    path.push(e);
                    cur = p;
                }
                path.reverse();
                return Some(path);
            }
            for (e, t) in self.transitions(q) {
                if !seen[t] {
                    seen[t] = true;
                    parent[t] = Some((q, e));
                    queue.push_back(t);
                }
            }
        }
        None
    }

    /// Keeps the states listed in `order` (first entry becomes the initial
    /// state) and renumbers them in that order.
    fn restrict(&self, order: &[StateId]) -> Automaton {
        let mut index = vec![usize::MAX; self.num_states()];
        for (i, &q) in order.iter().enumerate() {
            index[q] = i;
        }
        let delta = order
            .iter()
            .map(|&q| {
                self.delta[q]
                    .iter()
                    .filter(|(_, &t)| index[t] != usize::MAX)
                    .map(|(&e, &t)| (e, index[t]))
                    .collect()
            })
            .collect();
        Automaton {
            alphabet: Arc::clone(&self.alphabet),
            events: self.events.clone(),
            labels: order.iter().map(|&q| self.labels[q].clone()).collect(),
            delta,
            marked: order.iter().map(|&q| self.marked[q]).collect(),
            initial: 0,
        }
    }

    pub fn format_string(&self, s: &[EventId]) -> String {
        if s.is_empty() {
            return "ε".to_string();
        }
        self.alphabet.names(s).join(" ")
    }
}

/// Reachable part, renumbered breadth-first from the initial state.
pub fn trim_reachable(a: &Automaton) -> Automaton {
    a.restrict(&a.reachable())
}

/// Whether some marked state is reachable, i.e. `L_m(a) ≠ ∅`.
pub fn is_marker_reachable(a: &Automaton) -> bool {
    a.reachable().into_iter().any(|q| a.is_marked(q))
}

/// Deletes `bad` and trims; `None` when the initial state is deleted.
pub fn remove_states(a: &Automaton, bad: &BTreeSet<StateId>) -> Option<Automaton> {
    if bad.contains(&a.initial) {
        return None;
    }
    let kept = a.filter_transitions(|_, _, t| !bad.contains(&t));
    Some(trim_reachable(&kept))
}

/// Adds a fresh unmarked `dump` state receiving every undefined transition
/// over `over`; the dump state self-loops on all of `over`.
pub fn complete(a: &Automaton, dump: &str, over: &EventSet) -> Result<Automaton> {
    if a.state_by_label(dump).is_some() {
        return Err(Error::LabelCollision(dump.to_string()));
    }
    let events: EventSet = a.events.union(over).copied().collect();
    let mut b = AutomatonBuilder::new(&a.alphabet, events);
    for q in a.states() {
        b.add_state(a.label(q), a.is_marked(q));
    }
    let d = b.add_state(dump, false);
    for q in a.states() {
        for (e, t) in a.transitions(q) {
            b.add_transition(q, e, t)?;
        }
        for &e in over {
            if a.next(q, e).is_none() {
                b.add_transition(q, e, d)?;
            }
        }
    }
    for &e in over {
        b.add_transition(d, e, d)?;
    }
    b.build(a.initial)
}

/// Every string of `L(a)` of length at most `max_len` (including ε).
pub fn enumerate_language(a: &Automaton, max_len: usize) -> BTreeSet<Vec<EventId>> {
    enumerate(a, max_len, false)
}

/// Every string of `L_m(a)` of length at most `max_len`.
pub fn enumerate_marked_language(a: &Automaton, max_len: usize) -> BTreeSet<Vec<EventId>> {
    enumerate(a, max_len, true)
}

fn enumerate(a: &Automaton, max_len: usize, marked_only: bool) -> BTreeSet<Vec<EventId>> {
    let mut out = BTreeSet::new();
    let mut frontier = vec![(a.initial, Vec::new())];
    for depth in 0..=max_len {
        let mut next = Vec::new();
        for (q, s) in frontier {
            if !marked_only || a.is_marked(q) {
                out.insert(s.clone());
            }
            if depth < max_len {
                for (e, t) in a.transitions(q) {
                    let mut s2 = s.clone();
                    s2.push(e);
                    next.push((t, s2));
                }
            }
        }
        frontier = next;
    }
    out
}

/// `L(a) ⊆ L(b)`.
pub fn is_included(a: &Automaton, b: &Automaton) -> bool {
    inclusion_counterexample(a, b).is_none()
}

/// A shortest string of `L(a) − L(b)`, if any.
pub fn inclusion_counterexample(a: &Automaton, b: &Automaton) -> Option<Vec<EventId>> {
    let mut parent: BTreeMap<(StateId, StateId), Option<((StateId, StateId), EventId)>> =
        BTreeMap::new();
    let start = (a.initial, b.initial);
    parent.insert(start, None);
    let mut queue = VecDeque::from([start]);
    let trace = |parent: &BTreeMap<_, Option<((StateId, StateId), EventId)>>,
                 mut cur: (StateId, StateId),
                 last: EventId| {
        let mut path = vec![last];
        while let Some(Some((p, e))) = parent.get(&cur) {
            path.push(*e);
            cur = *p;
        }
        path.reverse();
        path
    };
    while let Some((p, r)) = queue.pop_front() {
        for (e, p2) in a.transitions(p) {
            match b.next(r, e) {
                None => return Some(trace(&parent, (p, r), e)),
                Some(r2) => {
                    if !parent.contains_key(&(p2, r2)) {
                        parent.insert((p2, r2), Some(((p, r), e)));
                        queue.push_back((p2, r2));
                    }
                }
            }
        }
    }
    None
}

/// `L_m(a) ⊆ L_m(b)`.
pub fn is_marked_included(a: &Automaton, b: &Automaton) -> bool {
    let coreach = coreachable(a);
    let mut seen = BTreeSet::from([(a.initial, b.initial)]);
    let mut queue = VecDeque::from([(a.initial, b.initial)]);
    while let Some((p, r)) = queue.pop_front() {
        if a.is_marked(p) && !b.is_marked(r) {
            return false;
        }
        for (e, p2) in a.transitions(p) {
            if !coreach[p2] {
                continue;
            }
            match b.next(r, e) {
                None => return false,
                Some(r2) => {
                    if seen.insert((p2, r2)) {
                        queue.push_back((p2, r2));
                    }
                }
            }
        }
    }
    true
}

/// `L(a) = L(b)`.
pub fn language_equal(a: &Automaton, b: &Automaton) -> bool {
    is_included(a, b) && is_included(b, a)
}

/// States from which a marked state is reachable.
pub fn coreachable(a: &Automaton) -> Vec<bool> {
    let mut rev: Vec<Vec<StateId>> = vec![Vec::new(); a.num_states()];
    for q in a.states() {
        for (_, t) in a.transitions(q) {
            rev[t].push(q);
        }
    }
    let mut seen: Vec<bool> = a.states().map(|q| a.is_marked(q)).collect();
    let mut stack: Vec<StateId> = a.states().filter(|&q| seen[q]).collect();
    while let Some(q) = stack.pop() {
        for &p in &rev[q] {
            if !seen[p] {
                seen[p] = true;
                stack.push(p);
            }
        }
    }
    seen
}

/// Minimal automaton with the same closed and marked languages.
pub fn minimize(a: &Automaton) -> Automaton {
    minimize_with_classes(a, &vec![0; a.num_states()]).0
}

/// Minimization that never merges states of different `classes`.
/// Returns the minimized automaton (states labelled by their index, numbered
/// breadth-first) and, for each original state, its image when reachable.
pub fn minimize_with_classes(a: &Automaton, classes: &[usize]) -> (Automaton, Vec<Option<StateId>>) {
    let order = a.reachable();
    let mut block: Vec<usize> = vec![usize::MAX; a.num_states()];
    {
        let mut ids: BTreeMap<(bool, usize), usize> = BTreeMap::new();
        for &q in &order {
            let n = ids.len();
            block[q] = *ids.entry((a.is_marked(q), classes[q])).or_insert(n);
        }
    }
    let mut count = order.iter().map(|&q| block[q]).collect::<BTreeSet<_>>().len();
    loop {
        let mut ids: BTreeMap<(usize, Vec<(EventId, usize)>), usize> = BTreeMap::new();
        let mut next = block.clone();
        for &q in &order {
            let sig: Vec<(EventId, usize)> = a.transitions(q).map(|(e, t)| (e, block[t])).collect();
            let n = ids.len();
            next[q] = *ids.entry((block[q], sig)).or_insert(n);
        }
        block = next;
        if ids.len() == count {
            break;
        }
        count = ids.len();
    }

    // Renumber blocks breadth-first from the initial block.
    let mut new_id: BTreeMap<usize, StateId> = BTreeMap::new();
    let mut reps: Vec<StateId> = Vec::new();
    let mut queue = VecDeque::from([a.initial]);
    new_id.insert(block[a.initial], 0);
    reps.push(a.initial);
    while let Some(q) = queue.pop_front() {
        for (_, t) in a.transitions(q) {
            if !new_id.contains_key(&block[t]) {
                new_id.insert(block[t], reps.len());
                reps.push(t);
                queue.push_back(t);
            }
        }
    }
    let mut b = AutomatonBuilder::new(&a.alphabet, a.events.clone());
    for (i, &r) in reps.iter().enumerate() {
        b.add_state(i.to_string(), a.is_marked(r));
    }
    for (i, &r) in reps.iter().enumerate() {
        for (e, t) in a.transitions(r) {
            b.add_transition(i, e, new_id[&block[t]])
                .expect("minimization preserves determinism");
        }
    }
    let image = (0..a.num_states())
        .map(|q| {
            if block[q] == usize::MAX {
                None
            } else {
                Some(new_id[&block[q]])
            }
        })
        .collect();
    (b.build(0).expect("initial state exists"), image)
}
