//! Builders for the component automata of the attacked closed loop and of
//! the synthesis reduction.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::alphabet::{Alphabet, EventId, EventSet};
use crate::automaton::{complete, trim_reachable, Automaton, AutomatonBuilder, StateId};
use crate::error::{Error, Result};
use crate::observer::observer_project;
use crate::product::{sync_product, sync_product_all};
use crate::synthesis::ControlConstraint;

/// Label of the sink reached when the supervisor detects an attack.
pub const DETECT: &str = "detect";
/// Label of the sink reached when covertness is broken against every
/// consistent supervisor.
pub const COV_BRK: &str = "cov_brk";
/// Label of the sink of the attacked least permissive supervisor.
pub const RISK: &str = "risk";
/// Label of completion sinks.
pub const DUMP: &str = "dump";

/// State labels that user-supplied automata may not use.
pub const RESERVED_LABELS: [&str; 5] = [DETECT, COV_BRK, RISK, DUMP, crate::alphabet::STOP];

/// The attack-relevant event sets of an alphabet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AttackConstraint {
    pub observable: EventSet,
    pub compromised: EventSet,
    pub attackable: EventSet,
    pub relabelled: EventSet,
    pub stop: EventId,
}

impl AttackConstraint {
    pub fn from_alphabet(al: &Alphabet) -> Self {
        AttackConstraint {
            observable: al.observable().clone(),
            compromised: al.compromised().clone(),
            attackable: al.attackable().clone(),
            relabelled: al.relabelled().clone(),
            stop: al.stop(),
        }
    }

    /// `(Σ_c,a ∪ Σ_s,a^# ∪ {stop}, Σ_o ∪ Σ_s,a^# ∪ {stop})`.
    pub fn control_constraint(&self) -> ControlConstraint {
        let mut ctl: EventSet = self.attackable.union(&self.relabelled).copied().collect();
        ctl.insert(self.stop);
        let mut obs: EventSet = self.observable.union(&self.relabelled).copied().collect();
        obs.insert(self.stop);
        ControlConstraint::new(ctl, obs)
    }
}

/// A finite, prefix-closed set of observed strings, given by an acyclic
/// automaton over `Σ_o` with a unique deadlocked state.
#[derive(Clone, Debug)]
pub struct ObservationSet {
    automaton: Automaton,
    deadlock: StateId,
}

impl ObservationSet {
    pub fn new(m_o: Automaton) -> Result<Self> {
        let al = m_o.alphabet().clone();
        if let Some(&e) = m_o.events().iter().find(|e| !al.is_observable(**e)) {
            return Err(Error::InvalidObservations(format!(
                "event `{}` is not an observable plant event",
                al.name(e)
            )));
        }
        let a = trim_reachable(&m_o);
        if has_cycle(&a) {
            return Err(Error::InvalidObservations("the observed language is infinite".into()));
        }
        let dead: Vec<StateId> = a.states().filter(|&q| a.transitions(q).next().is_none()).collect();
        match dead.as_slice() {
            [d] => Ok(ObservationSet {
                deadlock: *d,
                automaton: a.with_all_marked(),
            }),
            _ => Err(Error::InvalidObservations(format!(
                "expected exactly one deadlocked state, found {}",
                dead.len()
            ))),
        }
    }

    /// Prefix closure of `strings`, as a trie whose leaves are merged.
    pub fn from_strings(alphabet: &Arc<Alphabet>, strings: &[Vec<EventId>]) -> Result<Self> {
        let mut children: Vec<BTreeMap<EventId, usize>> = vec![BTreeMap::new()];
        for s in strings {
            let mut node = 0;
            for &e in s {
                node = match children[node].get(&e) {
                    Some(&n) => n,
                    None => {
                        children.push(BTreeMap::new());
                        let n = children.len() - 1;
                        children[node].insert(e, n);
                        n
                    }
                };
            }
        }
        let mut b = AutomatonBuilder::new(alphabet, alphabet.observable().clone());
        let mut id = vec![usize::MAX; children.len()];
        for (n, c) in children.iter().enumerate() {
            if !c.is_empty() {
                id[n] = b.add_state(n.to_string(), true);
            }
        }
        let dl = b.add_state("dl", true);
        for i in id.iter_mut().filter(|i| **i == usize::MAX) {
            *i = dl;
        }
        for (n, c) in children.iter().enumerate() {
            for (&e, &m) in c {
                b.add_transition(id[n], e, id[m])?;
            }
        }
        ObservationSet::new(b.build(id[0])?)
    }

    pub fn automaton(&self) -> &Automaton {
        &self.automaton
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        self.automaton.alphabet()
    }

    /// `q_o^dl`.
    pub fn deadlock(&self) -> StateId {
        self.deadlock
    }

    pub fn num_states(&self) -> usize {
        self.automaton.num_states()
    }
}

fn has_cycle(a: &Automaton) -> bool {
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut color = vec![0u8; a.num_states()];
    for root in a.states() {
        if color[root] != 0 {
            continue;
        }
        let mut stack: Vec<(StateId, Vec<StateId>)> =
            vec![(root, a.transitions(root).map(|(_, t)| t).collect())];
        color[root] = 1;
        while let Some((q, succ)) = stack.last_mut() {
            match succ.pop() {
                Some(t) => match color[t] {
                    1 => return true,
                    0 => {
                        color[t] = 1;
                        let next = a.transitions(t).map(|(_, u)| u).collect();
                        stack.push((t, next));
                    }
                    _ => {}
                },
                None => {
                    color[*q] = 2;
                    stack.pop();
                }
            }
        }
    }
    false
}

/// An automaton whose states are split into reaction states (only plant
/// events defined) and control states (only commands defined).
#[derive(Clone, Debug)]
pub struct Bipartite {
    pub automaton: Automaton,
    pub reaction: Vec<bool>,
}

impl Bipartite {
    /// Checks the given partition against the transition structure.
    pub fn new(automaton: Automaton, reaction: Vec<bool>) -> Result<Self> {
        if reaction.len() != automaton.num_states() {
            return Err(Error::InvalidBipartite("partition size mismatch".into()));
        }
        let al = automaton.alphabet().clone();
        for q in automaton.states() {
            for (e, _) in automaton.transitions(q) {
                if reaction[q] == al.is_command(e) {
                    return Err(Error::InvalidBipartite(format!(
                        "{} state `{}` defines `{}`",
                        if reaction[q] { "reaction" } else { "control" },
                        automaton.label(q),
                        al.name(e)
                    )));
                }
            }
        }
        Ok(Bipartite { automaton, reaction })
    }

    /// Partition derived from structure alone: a state is a control state
    /// iff it defines some command. Ambiguous for deadlocked states.
    pub fn structural(automaton: Automaton) -> Result<Self> {
        let al = automaton.alphabet().clone();
        let reaction = automaton
            .states()
            .map(|q| !automaton.transitions(q).any(|(e, _)| al.is_command(e)))
            .collect();
        Bipartite::new(automaton, reaction)
    }

    pub fn reaction_states(&self) -> Vec<StateId> {
        self.automaton.states().filter(|&q| self.reaction[q]).collect()
    }

    pub fn control_states(&self) -> Vec<StateId> {
        self.automaton.states().filter(|&q| !self.reaction[q]).collect()
    }

    fn trimmed(automaton: &Automaton, reaction: &[bool]) -> Result<Self> {
        let order = automaton.reachable();
        let r = order.iter().map(|&q| reaction[q]).collect();
        Bipartite::new(trim_reachable(automaton), r)
    }
}

/// Sensor attack constraint template over `Σ ∪ Σ_s,a^# ∪ Γ ∪ {stop}`.
pub fn build_ac(al: &Arc<Alphabet>) -> Automaton {
    let mut b = AutomatonBuilder::new(al, al.attacker_events());
    let init = b.add_state("init", true);
    let q0 = b.add_state("q0", true);
    let q1 = b.add_state("q1", true);
    let add = |b: &mut AutomatonBuilder, p, e, t| b.add_transition(p, e, t).expect("AC is deterministic");
    for e in al.unobservable().iter().chain(al.gamma()) {
        add(&mut b, init, *e, init);
    }
    for &e in al.observable() {
        if al.compromised().contains(&e) {
            add(&mut b, init, e, q0);
            add(&mut b, q0, al.relabel(e).expect("copy exists"), q1);
        } else {
            add(&mut b, init, e, q1);
        }
    }
    add(&mut b, q0, al.stop(), init);
    add(&mut b, q1, al.stop(), init);
    let ac = b.build(init).expect("initial state exists");
    assert_eq!(ac.num_states(), 3);
    ac
}

/// Command execution automaton.
pub fn build_ce(al: &Arc<Alphabet>) -> Automaton {
    build_command_execution(al, false)
}

/// Command execution under actuator attack.
pub fn build_cea(al: &Arc<Alphabet>) -> Automaton {
    build_command_execution(al, true)
}

fn build_command_execution(al: &Arc<Alphabet>, attacked: bool) -> Automaton {
    let mut b = AutomatonBuilder::new(al, al.plant_and_commands());
    let init = b.add_state("init", true);
    let add = |b: &mut AutomatonBuilder, p, e, t| b.add_transition(p, e, t).expect("CE is deterministic");
    for cmd in al.commands() {
        let q = b.add_state(cmd.name.clone(), true);
        add(&mut b, init, cmd.id, q);
        let mut fire: EventSet = cmd.members.clone();
        if attacked {
            fire.extend(al.attackable().iter().copied());
        }
        for &e in &fire {
            let target = if al.is_observable(e) { init } else { q };
            add(&mut b, q, e, target);
        }
    }
    if attacked {
        for e in al.uncontrollable() {
            add(&mut b, init, e, init);
        }
    }
    let ce = b.build(init).expect("initial state exists");
    assert_eq!(ce.num_states(), al.gamma().len() + 1);
    ce
}

/// Bipartite form of a supervisor over `Σ`.
pub fn build_bts(s: &Automaton) -> Result<Bipartite> {
    let al = s.alphabet().clone();
    validate_supervisor(s)?;
    let mut b = AutomatonBuilder::new(&al, al.plant_and_commands());
    for q in s.states() {
        b.add_state(format!("{}^com", s.label(q)), true);
        b.add_state(s.label(q).to_string(), true);
    }
    let com = |q: StateId| 2 * q;
    let rea = |q: StateId| 2 * q + 1;
    for q in s.states() {
        let gamma = al
            .command_for(&s.enabled(q))
            .ok_or_else(|| Error::InvalidSupervisor(format!(
                "enabled set {} at `{}` is not a command",
                al.display_set(&s.enabled(q)),
                s.label(q)
            )))?;
        b.add_transition(com(q), gamma, rea(q))?;
        for (e, t) in s.transitions(q) {
            if al.is_observable(e) {
                b.add_transition(rea(q), e, com(t))?;
            } else {
                b.add_transition(rea(q), e, rea(q))?;
            }
        }
    }
    let a = b.build(com(s.initial()))?;
    let reaction: Vec<bool> = a.states().map(|q| q % 2 == 1).collect();
    Bipartite::trimmed(&a, &reaction)
}

/// Checks the controllability and observability conditions on a
/// supervisor: uncontrollable events are defined everywhere and
/// unobservable events, where defined, self-loop.
pub fn validate_supervisor(s: &Automaton) -> Result<()> {
    let al = s.alphabet();
    if s.events() != al.sigma() {
        return Err(Error::InvalidSupervisor("event set differs from the plant events".into()));
    }
    for q in s.states() {
        for e in al.uncontrollable() {
            if s.next(q, e).is_none() {
                return Err(Error::InvalidSupervisor(format!(
                    "uncontrollable `{}` undefined at `{}`",
                    al.name(e),
                    s.label(q)
                )));
            }
        }
        for (e, t) in s.transitions(q) {
            if !al.is_observable(e) && t != q {
                return Err(Error::InvalidSupervisor(format!(
                    "unobservable `{}` changes state at `{}`",
                    al.name(e),
                    s.label(q)
                )));
            }
        }
    }
    Ok(())
}

/// `P_{Σ_o ∪ Γ}(G ‖ CE)`, the universal monitor.
pub fn build_monitor(g: &Automaton, ce: &Automaton) -> Result<Automaton> {
    let al = g.alphabet();
    let observed: EventSet = al.observable().union(al.gamma()).copied().collect();
    Ok(observer_project(&sync_product(g, ce)?, &observed).automaton)
}

/// `BT(S)^M = BT(S) ‖ P_{Σ_o ∪ Γ}(G ‖ CE)`.
pub fn build_bts_m(bts: &Bipartite, g: &Automaton, ce: &Automaton) -> Result<Bipartite> {
    build_bts_m_with(bts, &build_monitor(g, ce)?)
}

/// [`build_bts_m`] with a precomputed monitor.
pub fn build_bts_m_with(bts: &Bipartite, monitor: &Automaton) -> Result<Bipartite> {
    let p = sync_product_all(&[&bts.automaton, monitor])?;
    let reaction = p.components.iter().map(|t| bts.reaction[t[0]]).collect();
    Bipartite::new(p.automaton, reaction)
}

/// `BT(S)^A`, with the sink [`DETECT`] as its last state.
pub fn build_bts_a(bts_m: &Bipartite) -> Result<Automaton> {
    encode_attack(&bts_m.automaton, &bts_m.reaction, DETECT)
}

/// Command-consistency automaton for the observations.
pub fn build_oc(m_o: &ObservationSet) -> Automaton {
    let mo = m_o.automaton();
    let al = mo.alphabet().clone();
    let n = mo.num_states();
    let mut b = AutomatonBuilder::new(&al, al.plant_and_commands());
    for q in mo.states() {
        b.add_state(mo.label(q), true);
    }
    for q in mo.states() {
        b.add_state(format!("{}^com", mo.label(q)), true);
    }
    let dump = b.add_state(DUMP, true);
    let add = |b: &mut AutomatonBuilder, p, e, t| b.add_transition(p, e, t).expect("OC is deterministic");
    for q in mo.states() {
        let en = mo.enabled(q);
        for cmd in al.commands() {
            if en.is_subset(&cmd.members) {
                add(&mut b, n + q, cmd.id, q);
            }
        }
        for &e in al.sigma() {
            if al.is_observable(e) {
                match mo.next(q, e) {
                    Some(t) => add(&mut b, q, e, n + t),
                    None => add(&mut b, q, e, dump),
                }
            } else {
                add(&mut b, q, e, q);
            }
        }
    }
    for e in al.plant_and_commands() {
        add(&mut b, dump, e, dump);
    }
    b.build(n + mo.initial()).expect("initial state exists")
}

/// `OCNS = NS ‖ OC`; the partition is inherited from `NS`.
pub fn build_ocns(ns: &Bipartite, oc: &Automaton) -> Result<Bipartite> {
    let p = sync_product_all(&[&ns.automaton, oc])?;
    let reaction = p.components.iter().map(|t| ns.reaction[t[0]]).collect();
    Bipartite::new(p.automaton, reaction)
}

/// `OCNS^A`, with the sink [`COV_BRK`] as its last state.
pub fn build_ocnsa(ocns: &Bipartite) -> Result<Automaton> {
    let a = encode_attack(&ocns.automaton, &ocns.reaction, COV_BRK)?;
    assert_eq!(a.num_states(), ocns.automaton.num_states() + 1);
    Ok(a)
}

/// The least permissive supervisor consistent with the observations.
pub fn build_sdown(m_o: &ObservationSet) -> Automaton {
    let mo = m_o.automaton();
    let al = mo.alphabet().clone();
    let dl = m_o.deadlock();
    let mut b = AutomatonBuilder::new(&al, al.sigma().clone());
    for q in mo.states() {
        b.add_state(mo.label(q), true);
    }
    let add = |b: &mut AutomatonBuilder, p, e, t| b.add_transition(p, e, t).expect("S↓ is deterministic");
    for q in mo.states() {
        for (e, t) in mo.transitions(q) {
            add(&mut b, q, e, t);
        }
        for e in al.uncontrollable() {
            if !al.is_observable(e) {
                add(&mut b, q, e, q);
            } else if mo.next(q, e).is_none() {
                add(&mut b, q, e, dl);
            }
        }
    }
    b.build(mo.initial()).expect("initial state exists")
}

/// `S↓,A`, with the sink [`RISK`] as its last state.
pub fn build_sdowna(sdown: &Automaton) -> Result<Automaton> {
    encode_attack(sdown, &vec![true; sdown.num_states()], RISK)
}

/// `S̄↓,A`: completion of `S↓,A` over `Σ ∪ Σ_s,a^#`; every state except
/// the sink [`DUMP`] is marked.
///
/// A controllable event outside `Σ_c,a` that `S↓` does not enable cannot
/// occur against `S↓`, so it leads to [`DUMP`] rather than [`RISK`].
pub fn build_sdowna_bar(sdown_a: &Automaton) -> Result<Automaton> {
    let al = sdown_a.alphabet();
    let over: EventSet = al.sigma().union(al.relabelled()).copied().collect();
    let risk = sdown_a.state_by_label(RISK);
    let pruned = sdown_a.filter_transitions(|q, e, t| {
        Some(t) != risk || q == t || !al.is_controllable(e) || al.attackable().contains(&e)
    });
    complete(&pruned.with_all_marked(), DUMP, &over)
}

/// Encodes sensor replacement/deletion and actuator enablement into an
/// automaton over plant events (and possibly commands): transitions on a
/// compromised `σ` move on `σ^#` instead while `σ` itself self-loops;
/// attackable events that are unobservable or compromised self-loop at
/// reaction states; observations that the automaton cannot accept at a
/// reaction state lead to the fresh `sink`.
pub fn encode_attack(a: &Automaton, reaction: &[bool], sink: &str) -> Result<Automaton> {
    if a.state_by_label(sink).is_some() {
        return Err(Error::LabelCollision(sink.to_string()));
    }
    let al = a.alphabet().clone();
    let mut events = a.events().clone();
    for &e in a.events() {
        if let Some(c) = al.relabel(e) {
            events.insert(c);
        }
    }
    let mut b = AutomatonBuilder::new(&al, events);
    for q in a.states() {
        b.add_state(a.label(q), a.is_marked(q));
    }
    let z = b.add_state(sink, true);
    let compromised = al.compromised();
    for q in a.states() {
        for (e, t) in a.transitions(q) {
            match al.relabel(e) {
                Some(c) => {
                    b.add_transition(q, c, t)?;
                    b.add_transition(q, e, q)?;
                }
                None => b.add_transition(q, e, t)?,
            }
        }
        if !reaction[q] {
            continue;
        }
        for &e in al.attackable() {
            if a.events().contains(&e) && (!al.is_observable(e) || compromised.contains(&e)) {
                b.add_transition(q, e, q)?;
            }
        }
        for &e in al.observable() {
            if !a.events().contains(&e) || a.next(q, e).is_some() {
                continue;
            }
            match al.relabel(e) {
                Some(c) => b.add_transition(q, c, z)?,
                None => b.add_transition(q, e, z)?,
            }
        }
    }
    b.build(a.initial())
}
