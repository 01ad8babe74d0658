//! Natural projection, unobservable reach and the observer `P_Σ'(G)`.

use std::collections::{BTreeSet, HashMap};

use crate::alphabet::{EventId, EventSet};
use crate::automaton::{Automaton, AutomatonBuilder, StateId};
use crate::error::{Error, Result};

/// A non-empty, sorted set of states of some source automaton.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateSubset(Vec<StateId>);

impl StateSubset {
    /// `None` for the empty set.
    pub fn new(states: impl IntoIterator<Item = StateId>) -> Option<Self> {
        let set: BTreeSet<StateId> = states.into_iter().collect();
        if set.is_empty() {
            None
        } else {
            Some(StateSubset(set.into_iter().collect()))
        }
    }

    pub fn states(&self) -> &[StateId] {
        &self.0
    }

    pub fn contains(&self, q: StateId) -> bool {
        self.0.binary_search(&q).is_ok()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Erases events outside `keep`.
pub fn project_string(s: &[EventId], keep: &EventSet) -> Vec<EventId> {
    s.iter().copied().filter(|e| keep.contains(e)).collect()
}

/// States reachable from `q` using only events outside `observed`.
pub fn unobservable_reach(a: &Automaton, q: StateId, observed: &EventSet) -> Result<StateSubset> {
    if q >= a.num_states() {
        return Err(Error::UnknownState(q));
    }
    Ok(StateSubset(closure(a, [q], observed)))
}

fn closure(a: &Automaton, seeds: impl IntoIterator<Item = StateId>, observed: &EventSet) -> Vec<StateId> {
    let mut seen: BTreeSet<StateId> = BTreeSet::new();
    let mut stack: Vec<StateId> = Vec::new();
    for q in seeds {
        if seen.insert(q) {
            stack.push(q);
        }
    }
    while let Some(q) = stack.pop() {
        for (e, t) in a.transitions(q) {
            if !observed.contains(&e) && seen.insert(t) {
                stack.push(t);
            }
        }
    }
    seen.into_iter().collect()
}

/// Observer together with the source states each of its states stands for.
#[derive(Clone, Debug)]
pub struct Observer {
    pub automaton: Automaton,
    pub subsets: Vec<StateSubset>,
}

/// `P_Σ'(a)`: subset construction over `observed`, with every event of `a`
/// outside `observed` self-looping at every state. All states are marked.
pub fn observer_project(a: &Automaton, observed: &EventSet) -> Observer {
    let seen_events: Vec<EventId> = a.events().iter().copied().filter(|e| observed.contains(e)).collect();
    let hidden: Vec<EventId> = a.events().iter().copied().filter(|e| !observed.contains(e)).collect();

    let mut builder = AutomatonBuilder::new(a.alphabet(), a.events().clone());
    let mut index: HashMap<StateSubset, StateId> = HashMap::new();
    let mut subsets: Vec<StateSubset> = Vec::new();
    let label = |s: &StateSubset| -> String {
        let inner: Vec<&str> = s.states().iter().map(|&q| a.label(q)).collect();
        format!("{{{}}}", inner.join(","))
    };

    let init = StateSubset(closure(a, [a.initial()], observed));
    builder.add_state(label(&init), true);
    index.insert(init.clone(), 0);
    subsets.push(init);

    let mut i = 0;
    while i < subsets.len() {
        for &e in &seen_events {
            let succ: Vec<StateId> = subsets[i].states().iter().filter_map(|&q| a.next(q, e)).collect();
            if succ.is_empty() {
                continue;
            }
            let target = StateSubset(closure(a, succ, observed));
            let t = match index.get(&target) {
                Some(&t) => t,
                None => {
                    let t = builder.add_state(label(&target), true);
                    index.insert(target.clone(), t);
                    subsets.push(target);
                    t
                }
            };
            builder.add_transition(i, e, t).expect("observer is deterministic");
        }
        for &e in &hidden {
            builder.add_transition(i, e, i).expect("self-loop");
        }
        i += 1;
    }
    Observer {
        automaton: builder.build(0).expect("initial state exists"),
        subsets,
    }
}
