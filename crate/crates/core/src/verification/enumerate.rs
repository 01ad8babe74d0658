//! Bounded enumeration of safe supervisors consistent with observations.
//!
//! Supervisors are built lazily as partial transition tables over `Σ`.
//! The closed loop with the plant is explored breadth-first and the first
//! undecided reachable slot is branched on. New states are numbered in
//! creation order, so each table is produced once. Supervisors are
//! generated by increasing size and kept only when their closed loop
//! differs from every one kept before.

use std::collections::{BTreeSet, HashSet, VecDeque};

use crate::alphabet::EventId;
use crate::automaton::{is_included, minimize, Automaton, AutomatonBuilder, StateId};
use crate::error::{Error, Result};
use crate::models::ObservationSet;
use crate::observer::observer_project;
use crate::synthesis::Mode;

use super::{closed_loop, Bounds};

#[derive(Clone, Debug)]
pub struct Enumeration {
    pub supervisors: Vec<Automaton>,
    /// The count bound was hit before the search space was exhausted.
    pub truncated: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Slot {
    Unset,
    Off,
    /// Enabled, target not chosen yet.
    On,
    To(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    ObsUc,
    ObsC,
    UoUc,
    UoC,
}

struct Search<'a> {
    g: &'a Automaton,
    m_o: &'a ObservationSet,
    kind: Vec<Kind>,
    bounds: Bounds,
    /// Size of the supervisors currently generated.
    size: usize,
    seen: HashSet<Vec<Vec<(EventId, StateId)>>>,
    out: Vec<Automaton>,
    truncated: bool,
}

type Pair = (StateId, usize);

/// An undecided slot; `exercised` when the plant can take the event there.
#[derive(Clone, Copy, Debug)]
struct Open {
    state: usize,
    event: usize,
    exercised: bool,
}

/// Safe supervisors with at most `bounds.state_bound` states whose closed
/// loop can produce every string of `M_o`, one per closed-loop behavior.
/// Supervisors are complete in uncontrollable events and self-loop on
/// unobservable ones. Unobservable controllable events are only handled in
/// sound-only mode.
pub fn enumerate_consistent_supervisors(
    g: &Automaton,
    m_o: &ObservationSet,
    bounds: Bounds,
    mode: Mode,
) -> Result<Enumeration> {
    let al = g.alphabet();
    if g.events() != al.sigma() {
        return Err(Error::InvalidAlphabet("the plant must be defined over exactly the plant events".into()));
    }
    if !g.same_alphabet(m_o.automaton()) {
        return Err(Error::AlphabetMismatch);
    }
    if mode == Mode::Strict && !al.controllable_observed() {
        return Err(Error::ConstraintViolation(
            "some controllable events are unobservable; use sound-only mode".into(),
        ));
    }
    let kind = al
        .sigma()
        .iter()
        .map(|&e| match (al.is_observable(e), al.is_controllable(e)) {
            (true, false) => Kind::ObsUc,
            (true, true) => Kind::ObsC,
            (false, false) => Kind::UoUc,
            (false, true) => Kind::UoC,
        })
        .collect();
    let mut s = Search {
        g,
        m_o,
        kind,
        bounds,
        size: 0,
        seen: HashSet::new(),
        out: Vec::new(),
        truncated: false,
    };
    for size in 1..=bounds.state_bound {
        s.size = size;
        let mut table = vec![vec![Slot::Unset; s.kind.len()]];
        if s.search(&mut table)? {
            break;
        }
    }
    Ok(Enumeration {
        supervisors: s.out,
        truncated: s.truncated,
    })
}

impl Search<'_> {
    fn ev(i: usize) -> EventId {
        EventId::new(i)
    }

    /// Explores the closed loop. Returns `None` when a damage state is
    /// reachable, else the first undecided reachable slot. A controllable
    /// event the plant cannot take still changes the issued command, so its
    /// slot counts as reachable.
    fn explore(&self, table: &[Vec<Slot>]) -> Option<Option<Open>> {
        let start = (self.g.initial(), 0);
        let mut seen: BTreeSet<Pair> = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        let mut first = None;
        while let Some((x, q)) = queue.pop_front() {
            if first.is_none() {
                first = (0..self.kind.len())
                    .find(|&i| {
                        matches!(self.kind[i], Kind::ObsC | Kind::UoC)
                            && table[q][i] == Slot::Unset
                            && self.g.next(x, Self::ev(i)).is_none()
                    })
                    .map(|i| Open {
                        state: q,
                        event: i,
                        exercised: false,
                    });
            }
            for (e, x2) in self.g.transitions(x) {
                let i = e.index();
                let q2 = match (self.kind[i], table[q][i]) {
                    (Kind::UoUc, _) => q,
                    (_, Slot::Off) => continue,
                    (_, Slot::Unset | Slot::On) => {
                        first.get_or_insert(Open {
                            state: q,
                            event: i,
                            exercised: true,
                        });
                        continue;
                    }
                    (Kind::UoC, Slot::To(_)) => q,
                    (_, Slot::To(t)) => t,
                };
                if self.g.is_marked(x2) {
                    return None;
                }
                if seen.insert((x2, q2)) {
                    queue.push_back((x2, q2));
                }
            }
        }
        Some(first)
    }

    /// Adds unobservable moves, optimistically taking undecided ones.
    fn closure(&self, table: &[Vec<Slot>], set: BTreeSet<Pair>) -> BTreeSet<Pair> {
        let mut stack: Vec<Pair> = set.iter().copied().collect();
        let mut set = set;
        while let Some((x, q)) = stack.pop() {
            for (e, x2) in self.g.transitions(x) {
                let i = e.index();
                let go = match self.kind[i] {
                    Kind::UoUc => true,
                    Kind::UoC => table[q][i] != Slot::Off,
                    _ => false,
                };
                if go && set.insert((x2, q)) {
                    stack.push((x2, q));
                }
            }
        }
        set
    }

    /// Whether every string of `M_o` can still be produced. Branches that
    /// depend on undecided slots are not descended into.
    fn feasible(&self, table: &[Vec<Slot>]) -> bool {
        let mo = self.m_o.automaton();
        let root = self.closure(table, BTreeSet::from([(self.g.initial(), 0)]));
        let mut stack = vec![(mo.initial(), root)];
        while let Some((m, set)) = stack.pop() {
            for (e, m2) in mo.transitions(m) {
                let i = e.index();
                let mut child = BTreeSet::new();
                let mut unknown = false;
                for &(x, q) in &set {
                    let Some(x2) = self.g.next(x, e) else { continue };
                    match (self.kind[i], table[q][i]) {
                        (Kind::ObsUc | Kind::ObsC, Slot::Unset | Slot::On) => unknown = true,
                        (_, Slot::Off) => {}
                        (_, Slot::To(t)) => {
                            child.insert((x2, t));
                        }
                        _ => unreachable!("observation events are observable"),
                    }
                }
                if unknown {
                    continue;
                }
                if child.is_empty() {
                    return false;
                }
                stack.push((m2, self.closure(table, child)));
            }
        }
        true
    }

    /// Returns `true` to stop the search.
    fn search(&mut self, table: &mut Vec<Vec<Slot>>) -> Result<bool> {
        let Some(unset) = self.explore(table) else {
            return Ok(false);
        };
        if !self.feasible(table) {
            return Ok(false);
        }
        let Some(Open { state: q, event: i, exercised }) = unset else {
            return self.emit(table);
        };
        let n = table.len();
        let mut options: Vec<Slot> = Vec::new();
        match self.kind[i] {
            Kind::UoC => {
                options.push(Slot::Off);
                options.push(Slot::To(q));
            }
            Kind::ObsC if !exercised => {
                options.push(Slot::Off);
                options.push(Slot::On);
            }
            k => {
                if k == Kind::ObsC && table[q][i] == Slot::Unset {
                    options.push(Slot::Off);
                }
                options.extend((0..n).map(Slot::To));
                if n < self.size {
                    options.push(Slot::To(n));
                }
            }
        }
        let previous = table[q][i];
        for opt in options {
            let fresh = opt == Slot::To(n) && self.kind[i] != Kind::UoC;
            if fresh {
                table.push(vec![Slot::Unset; self.kind.len()]);
            }
            table[q][i] = opt;
            let stop = self.search(table)?;
            table[q][i] = previous;
            if fresh {
                table.pop();
            }
            if stop {
                return Ok(true);
            }
        }
        Ok(false)
    }

    fn emit(&mut self, table: &[Vec<Slot>]) -> Result<bool> {
        if table.len() != self.size {
            return Ok(false);
        }
        let al = self.g.alphabet();
        let mut b = AutomatonBuilder::new(al, al.sigma().clone());
        for q in 0..table.len() {
            b.add_state(q.to_string(), true);
        }
        for (q, row) in table.iter().enumerate() {
            for (i, slot) in row.iter().enumerate() {
                let target = match (self.kind[i], *slot) {
                    (Kind::ObsUc, Slot::Unset) | (Kind::UoUc, _) => Some(q),
                    (Kind::UoC, Slot::To(_)) | (_, Slot::On) => Some(q),
                    (_, Slot::To(t)) => Some(t),
                    _ => None,
                };
                if let Some(t) = target {
                    b.add_transition(q, Self::ev(i), t)?;
                }
            }
        }
        let s = b.build(0)?;
        if s.states().any(|q| al.command_for(&s.enabled(q)).is_none()) {
            return Ok(false);
        }
        let p = closed_loop(self.g, &s)?;
        if p.components.iter().any(|t| self.g.is_marked(t[0])) {
            return Ok(false);
        }
        let obs = observer_project(&p.automaton, al.observable());
        if !is_included(self.m_o.automaton(), &obs.automaton) {
            return Ok(false);
        }
        let m = minimize(&p.automaton.with_all_marked());
        let key = m.states().map(|q| m.transitions(q).collect()).collect();
        if self.seen.contains(&key) {
            return Ok(false);
        }
        if self.out.len() >= self.bounds.count_bound {
            self.truncated = true;
            return Ok(true);
        }
        self.seen.insert(key);
        self.out.push(s);
        Ok(false)
    }
}
