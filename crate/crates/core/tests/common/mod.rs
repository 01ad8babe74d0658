//! Shared helpers: instance generators and brute-force oracles that only use
//! the public automaton accessors (no products, observers or synthesis).

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::sync::Arc;

use covsynth::alphabet::{Alphabet, EventId, EventSet, EventSpec};
use covsynth::automaton::{enumerate_language, Automaton, AutomatonBuilder, StateId};
use covsynth::models::ObservationSet;
use covsynth::observer::project_string;
use covsynth::verification::{closed_loop, enumerate_consistent_supervisors, Bounds};
use covsynth::Mode;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Every string over `events` of length at most `n`.
pub fn all_strings(events: &[EventId], n: usize) -> Vec<Vec<EventId>> {
    let mut out = vec![Vec::new()];
    let mut layer = vec![Vec::new()];
    for _ in 0..n {
        let mut next = Vec::new();
        for s in &layer {
            for &e in events {
                let mut t: Vec<EventId> = s.clone();
                t.push(e);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// Runs `s` on `a`, ignoring events outside `a`'s event set.
pub fn run_sync(a: &Automaton, s: &[EventId]) -> Option<StateId> {
    let mut q = a.initial();
    for e in s {
        if a.events().contains(e) {
            q = a.next(q, *e)?;
        }
    }
    Some(q)
}

/// Strings of length at most `n` accepted by every automaton (each one
/// ignoring events outside its own event set).
pub fn joint_language(parts: &[&Automaton], n: usize) -> BTreeSet<Vec<EventId>> {
    let events: BTreeSet<EventId> = parts.iter().flat_map(|a| a.events().iter().copied()).collect();
    let events: Vec<EventId> = events.into_iter().collect();
    all_strings(&events, n)
        .into_iter()
        .filter(|s| parts.iter().all(|a| run_sync(a, s).is_some()))
        .collect()
}

/// Random engine instance: a plant with a set of bad states, `Σ_ctl ⊆ Σ_obs`.
pub struct EngineInstance {
    pub plant: Automaton,
    pub bad: BTreeSet<StateId>,
}

pub fn random_alphabet(r: &mut ChaCha8Rng, k: usize) -> Arc<Alphabet> {
    let specs = (0..k)
        .map(|i| {
            let obs = r.gen_bool(0.75);
            let ctl = obs && r.gen_bool(0.5);
            EventSpec::new(format!("e{i}")).observable(obs).controllable(ctl)
        })
        .collect();
    Arc::new(Alphabet::new(specs, None, None).expect("valid alphabet"))
}

pub fn random_plant(r: &mut ChaCha8Rng, al: &Arc<Alphabet>, n: usize, density: f64) -> Automaton {
    let mut b = AutomatonBuilder::new(al, al.sigma().clone());
    for q in 0..n {
        b.add_state(q.to_string(), false);
    }
    for q in 0..n {
        for &e in al.sigma() {
            if r.gen_bool(density) {
                b.add_transition(q, e, r.gen_range(0..n)).unwrap();
            }
        }
    }
    b.build(0).unwrap()
}

pub fn random_engine_instance(seed: u64) -> EngineInstance {
    let mut r = rng(seed);
    let k = r.gen_range(2..=3);
    let al = random_alphabet(&mut r, k);
    let n = r.gen_range(2..=5);
    let plant = random_plant(&mut r, &al, n, 0.5);
    let bad = (1..n).filter(|_| r.gen_bool(0.3)).collect();
    EngineInstance { plant, bad }
}

/// Strings of length at most `n` that some safe supervisor (controllable
/// events observable, decisions per observed string) allows.
///
/// A string is allowed by some safe supervisor iff the least permissive
/// supervisor allowing it is safe: that supervisor enables a controllable
/// event only where the string uses it and disables every other one.
pub fn oracle_safe_union(plant: &Automaton, bad: &BTreeSet<StateId>, n: usize) -> BTreeSet<Vec<EventId>> {
    let al = plant.alphabet();
    oracle_safe_union_with(plant, bad, al.controllable(), al.observable(), n)
}

/// [`oracle_safe_union`] for explicit controllable and observable sets.
pub fn oracle_safe_union_with(
    plant: &Automaton,
    bad: &BTreeSet<StateId>,
    ctl: &EventSet,
    obs: &EventSet,
    n: usize,
) -> BTreeSet<Vec<EventId>> {
    let events: Vec<EventId> = plant.events().iter().copied().collect();
    let mut out = BTreeSet::new();
    for s in all_strings(&events, n) {
        if plant.run(&s).is_none() {
            continue;
        }
        // Enabled controllable events per observed prefix.
        let mut policy: BTreeMap<Vec<EventId>, BTreeSet<EventId>> = BTreeMap::new();
        let mut w = Vec::new();
        for &e in &s {
            policy.entry(w.clone()).or_default();
            if ctl.contains(&e) {
                policy.get_mut(&w).unwrap().insert(e);
            }
            if obs.contains(&e) {
                w.push(e);
            }
        }
        policy.entry(w).or_default();
        if policy_is_safe(plant, bad, ctl, obs, &policy) {
            out.insert(s);
        }
    }
    out
}

/// Explores the plant under a finite policy; observed strings outside the
/// policy enable no controllable event.
fn policy_is_safe(
    plant: &Automaton,
    bad: &BTreeSet<StateId>,
    ctl: &EventSet,
    obs: &EventSet,
    policy: &BTreeMap<Vec<EventId>, BTreeSet<EventId>>,
) -> bool {
    let start: (StateId, Option<Vec<EventId>>) = (plant.initial(), Some(Vec::new()));
    let mut seen = BTreeSet::from([start.clone()]);
    let mut queue = VecDeque::from([start]);
    while let Some((x, node)) = queue.pop_front() {
        if bad.contains(&x) {
            return false;
        }
        for (e, y) in plant.transitions(x) {
            let allowed = !ctl.contains(&e)
                || node.as_ref().is_some_and(|w| policy.get(w).is_some_and(|d| d.contains(&e)));
            if !allowed {
                continue;
            }
            let next = if obs.contains(&e) {
                node.as_ref().and_then(|w| {
                    let mut w2 = w.clone();
                    w2.push(e);
                    policy.contains_key(&w2).then_some(w2)
                })
            } else {
                node.clone()
            };
            let item = (y, next);
            if seen.insert(item.clone()) {
                queue.push_back(item);
            }
        }
    }
    true
}

/// An attack instance: plant with damage states and observations derived
/// from a safe supervisor's closed loop.
pub struct AttackInstance {
    pub alphabet: Arc<Alphabet>,
    pub plant: Automaton,
    pub observations: ObservationSet,
}

/// Random toy attack instance with at most 5 plant states, or `None` when
/// the sampled plant admits no safe supervisor.
pub fn random_attack_instance(seed: u64) -> Option<AttackInstance> {
    let mut r = rng(seed);
    let specs = vec![
        EventSpec::new("a").compromised(r.gen_bool(0.7)),
        EventSpec::new("b")
            .controllable(true)
            .attackable(r.gen_bool(0.5))
            .compromised(r.gen_bool(0.3)),
        EventSpec::new("c")
            .controllable(r.gen_bool(0.5))
            .compromised(r.gen_bool(0.3)),
    ];
    let al = Arc::new(Alphabet::new(specs, None, None).ok()?);
    let n = r.gen_range(3..=5);
    let mut b = AutomatonBuilder::new(&al, al.sigma().clone());
    for q in 0..n {
        b.add_state(q.to_string(), q == n - 1);
    }
    for q in 0..n - 1 {
        for &e in al.sigma() {
            if r.gen_bool(0.55) {
                b.add_transition(q, e, r.gen_range(0..n)).unwrap();
            }
        }
    }
    let plant = b.build(0).unwrap();
    let trivial = ObservationSet::from_strings(&al, &[Vec::new()]).unwrap();
    let en = enumerate_consistent_supervisors(
        &plant,
        &trivial,
        Bounds {
            state_bound: 2,
            count_bound: 8,
        },
        Mode::Strict,
    )
    .ok()?;
    // Prefer the most permissive of the sampled supervisors.
    let s = en.supervisors.iter().max_by_key(|s| {
        let p = closed_loop(&plant, s).unwrap();
        p.automaton.num_transitions()
    })?;
    let p = closed_loop(&plant, s).unwrap();
    let strings: BTreeSet<Vec<EventId>> = enumerate_language(&p.automaton, 6)
        .into_iter()
        .map(|t| project_string(&t, al.observable()))
        .filter(|t| t.len() <= 2)
        .collect();
    let strings: Vec<Vec<EventId>> = strings.into_iter().collect();
    let observations = ObservationSet::from_strings(&al, &strings).ok()?;
    Some(AttackInstance {
        alphabet: al,
        plant,
        observations,
    })
}

/// The first `count` seeds from `start` yielding attack instances.
pub fn attack_instances(start: u64, count: usize) -> Vec<(u64, AttackInstance)> {
    (start..)
        .filter_map(|s| random_attack_instance(s).map(|i| (s, i)))
        .take(count)
        .collect()
}

/// Events by name.
pub fn ev(al: &Alphabet, names: &str) -> Vec<EventId> {
    names.split_whitespace().map(|n| al.lookup(n).unwrap()).collect()
}

/// Copies `a` onto another alphabet, matching events by name.
pub fn translate(a: &Automaton, al: &Arc<Alphabet>) -> Automaton {
    let from = a.alphabet();
    let map = |e: EventId| al.lookup(from.name(e)).unwrap();
    let mut b = AutomatonBuilder::new(al, a.events().iter().map(|&e| map(e)).collect());
    for q in a.states() {
        b.add_state(a.label(q), a.is_marked(q));
    }
    for q in a.states() {
        for (e, t) in a.transitions(q) {
            b.add_transition(q, map(e), t).unwrap();
        }
    }
    b.build(a.initial()).unwrap()
}
