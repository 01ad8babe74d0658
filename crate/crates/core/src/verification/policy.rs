//! Bounded search over attacker policies.
//!
//! A policy maps each observed attacker string to the controllable attacker
//! events it enables. Policies are decided up to a fixed observation depth;
//! past it the attacker enables only events it cannot disable. Used as an
//! independent reference for the synthesized attacker.

use std::collections::{BTreeMap, BTreeSet};

use crate::alphabet::{EventId, EventSet};
use crate::automaton::{Automaton, AutomatonBuilder, StateId};
use crate::error::{Error, Result};
use crate::models::{build_ac, build_cea, AttackConstraint, DETECT};
use crate::product::sync_product_all;

use super::attacked_supervisor;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PolicySearch {
    /// Longest observed string at which the attacker still decides.
    pub depth: usize,
    /// Stop after this many successful policies.
    pub limit: usize,
}

#[derive(Clone, Debug)]
pub struct PolicyOutcome {
    /// Policies covert and damage-reachable against every supervisor.
    pub successful: Vec<Automaton>,
    /// Every policy within the depth was examined.
    pub exhausted: bool,
    pub examined: usize,
}

struct System {
    a: Automaton,
    bad: Vec<bool>,
    damage: Vec<bool>,
}

#[derive(Clone, Debug)]
struct Node {
    path: Vec<EventId>,
    sets: Vec<Vec<StateId>>,
}

struct Searcher<'a> {
    g: &'a Automaton,
    systems: Vec<System>,
    observable: EventSet,
    controllable: EventSet,
    search: PolicySearch,
    out: Vec<Automaton>,
    examined: usize,
}

/// Enumerates policies (up to the depth) that are covert and reach damage
/// against each of `supervisors`.
pub fn successful_policies(g: &Automaton, supervisors: &[Automaton], search: PolicySearch) -> Result<PolicyOutcome> {
    let al = g.alphabet();
    let c = AttackConstraint::from_alphabet(al).control_constraint();
    if !c.is_strict() {
        return Err(Error::ConstraintViolation(
            "policy search needs observable attackable events".into(),
        ));
    }
    let ce_a = build_cea(al);
    let ac = build_ac(al);
    let mut systems = Vec::with_capacity(supervisors.len());
    for s in supervisors {
        let bts_a = attacked_supervisor(g, s)?;
        let detect = bts_a.state_by_label(DETECT).expect("attacked supervisor has a detect state");
        let p = sync_product_all(&[g, &ce_a, &ac, &bts_a])?;
        systems.push(System {
            bad: p.components.iter().map(|t| !g.is_marked(t[0]) && t[3] == detect).collect(),
            damage: p.components.iter().map(|t| g.is_marked(t[0])).collect(),
            a: p.automaton,
        });
    }
    let mut searcher = Searcher {
        g,
        systems,
        observable: c.observable,
        controllable: c.controllable,
        search,
        out: Vec::new(),
        examined: 0,
    };
    let root = Node {
        path: Vec::new(),
        sets: (0..searcher.systems.len())
            .map(|i| searcher.close(i, vec![searcher.systems[i].a.initial()], false))
            .collect(),
    };
    let stopped = if searcher.any_bad(&root.sets) {
        false
    } else {
        let damaged = searcher.damaged(&vec![false; supervisors.len()], &root.sets);
        searcher.go(vec![root], Vec::new(), damaged)
    };
    Ok(PolicyOutcome {
        successful: searcher.out,
        exhausted: !stopped,
        examined: searcher.examined,
    })
}

impl Searcher<'_> {
    /// Closure under events the attacker cannot see, or, past the
    /// horizon, under every event it cannot disable.
    fn close(&self, i: usize, seeds: Vec<StateId>, horizon: bool) -> Vec<StateId> {
        let a = &self.systems[i].a;
        let mut seen: BTreeSet<StateId> = seeds.iter().copied().collect();
        let mut stack = seeds;
        while let Some(q) = stack.pop() {
            for (e, t) in a.transitions(q) {
                let free = if horizon {
                    !self.controllable.contains(&e)
                } else {
                    !self.observable.contains(&e)
                };
                if free && seen.insert(t) {
                    stack.push(t);
                }
            }
        }
        seen.into_iter().collect()
    }

    fn any_bad(&self, sets: &[Vec<StateId>]) -> bool {
        sets.iter()
            .enumerate()
            .any(|(i, s)| s.iter().any(|&q| self.systems[i].bad[q]))
    }

    fn damaged(&self, prev: &[bool], sets: &[Vec<StateId>]) -> Vec<bool> {
        prev.iter()
            .enumerate()
            .map(|(i, &d)| d || sets[i].iter().any(|&q| self.systems[i].damage[q]))
            .collect()
    }

    fn child(&self, node: &Node, e: EventId) -> Node {
        let mut path = node.path.clone();
        path.push(e);
        let sets = node
            .sets
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let seeds: Vec<StateId> = s.iter().filter_map(|&q| self.systems[i].a.next(q, e)).collect();
                self.close(i, seeds, false)
            })
            .collect();
        Node { path, sets }
    }

    /// Returns `true` once the limit is reached.
    fn go(&mut self, mut pending: Vec<Node>, decisions: Vec<(Vec<EventId>, EventSet)>, damaged: Vec<bool>) -> bool {
        let Some(node) = pending.pop() else {
            self.examined += 1;
            if damaged.iter().all(|&d| d) {
                self.out.push(self.policy_automaton(&decisions));
                return self.out.len() >= self.search.limit;
            }
            return false;
        };
        if node.path.len() > self.search.depth {
            let sets: Vec<Vec<StateId>> = node
                .sets
                .iter()
                .enumerate()
                .map(|(i, s)| self.close(i, s.clone(), true))
                .collect();
            if self.any_bad(&sets) {
                return false;
            }
            let damaged = self.damaged(&damaged, &sets);
            return self.go(pending, decisions, damaged);
        }

        let mut possible = EventSet::new();
        for (i, s) in node.sets.iter().enumerate() {
            for &q in s {
                possible.extend(
                    self.systems[i]
                        .a
                        .transitions(q)
                        .map(|(e, _)| e)
                        .filter(|e| self.observable.contains(e)),
                );
            }
        }
        let mut forced = Vec::new();
        let mut optional = Vec::new();
        for e in possible {
            let child = self.child(&node, e);
            let covert = !self.any_bad(&child.sets);
            if self.controllable.contains(&e) {
                if covert {
                    optional.push(child);
                }
            } else if covert {
                forced.push(child);
            } else {
                return false;
            }
        }
        for mask in (0..1usize << optional.len()).rev() {
            let mut next = pending.clone();
            let mut enabled = EventSet::new();
            let mut dmg = damaged.clone();
            for (j, child) in optional.iter().enumerate() {
                if mask & (1 << j) != 0 {
                    enabled.insert(*child.path.last().expect("child has an event"));
                    dmg = self.damaged(&dmg, &child.sets);
                    next.push(child.clone());
                }
            }
            for child in &forced {
                dmg = self.damaged(&dmg, &child.sets);
                next.push(child.clone());
            }
            let mut dec = decisions.clone();
            dec.push((node.path.clone(), enabled));
            if self.go(next, dec, dmg) {
                return true;
            }
        }
        false
    }

    fn policy_automaton(&self, decisions: &[(Vec<EventId>, EventSet)]) -> Automaton {
        let al = self.g.alphabet();
        let mut b = AutomatonBuilder::new(al, al.attacker_events());
        let mut index: BTreeMap<&[EventId], StateId> = BTreeMap::new();
        let mut order: Vec<&(Vec<EventId>, EventSet)> = decisions.iter().collect();
        order.sort_by(|x, y| (x.0.len(), &x.0).cmp(&(y.0.len(), &y.0)));
        for (path, _) in &order {
            let label = if path.is_empty() { "ε".to_string() } else { al.names(path).join(".") };
            index.insert(path.as_slice(), b.add_state(label, true));
        }
        let sink = b.add_state("beyond", true);
        let add = |b: &mut AutomatonBuilder, p, e, t| b.add_transition(p, e, t).expect("policy is deterministic");
        for (path, enabled) in &order {
            let q = index[path.as_slice()];
            for e in al.ids() {
                if !self.observable.contains(&e) {
                    add(&mut b, q, e, q);
                } else if !self.controllable.contains(&e) || enabled.contains(&e) {
                    let mut p = path.clone();
                    p.push(e);
                    let t = index.get(p.as_slice()).copied().unwrap_or(sink);
                    add(&mut b, q, e, t);
                }
            }
        }
        for e in al.ids() {
            if !self.controllable.contains(&e) {
                add(&mut b, sink, e, sink);
            }
        }
        let root = index[&[][..]];
        b.build(root).expect("root exists")
    }
}
