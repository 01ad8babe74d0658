//! Supremal safe supervisors under partial observation.
//!
//! The engine works on the observer of the plant. Whenever the controllable
//! events are observable, the state estimate after an observation does not
//! depend on the supervisor, so a fixpoint that deletes observer states
//! which uncontrollably reach a bad estimate yields the supremal safe,
//! controllable and normal supervisor.

use std::collections::BTreeSet;

use crate::alphabet::EventSet;
use crate::automaton::{Automaton, AutomatonBuilder, StateId};
use crate::error::{Error, Result};
use crate::observer::{observer_project, StateSubset};
use crate::product::sync_product_all;

/// A pair `(Σ_ctl, Σ_obs)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ControlConstraint {
    pub controllable: EventSet,
    pub observable: EventSet,
}

impl ControlConstraint {
    pub fn new(controllable: EventSet, observable: EventSet) -> Self {
        ControlConstraint {
            controllable,
            observable,
        }
    }

    /// Whether every controllable event is observable.
    pub fn is_strict(&self) -> bool {
        self.controllable.is_subset(&self.observable)
    }
}

/// Strict mode requires `Σ_ctl ⊆ Σ_obs`. Sound-only mode accepts any
/// constraint and returns a safe but possibly non-supremal supervisor.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Mode {
    #[default]
    Strict,
    SoundOnly,
}

#[derive(Clone, Debug)]
pub struct Synthesized {
    /// Marked everywhere; unobservable events self-loop at every state.
    pub supervisor: Automaton,
    /// Plant states each supervisor state may correspond to.
    pub estimates: Vec<StateSubset>,
    /// Deletion rounds performed before the fixpoint.
    pub rounds: usize,
}

#[derive(Clone, Debug)]
pub enum SynthesisResult {
    Supervisor(Synthesized),
    /// No safe supervisor; `round` is the deletion round that removed the
    /// initial estimate (0 when it is bad itself).
    Empty { round: usize },
}

impl SynthesisResult {
    pub fn supervisor(&self) -> Option<&Automaton> {
        match self {
            SynthesisResult::Supervisor(s) => Some(&s.supervisor),
            SynthesisResult::Empty { .. } => None,
        }
    }

    pub fn into_synthesized(self) -> Option<Synthesized> {
        match self {
            SynthesisResult::Supervisor(s) => Some(s),
            SynthesisResult::Empty { .. } => None,
        }
    }
}

pub fn supremal_safe_supervisor(
    plant: &Automaton,
    bad: &BTreeSet<StateId>,
    c: &ControlConstraint,
    mode: Mode,
) -> Result<SynthesisResult> {
    if let Some(&q) = bad.iter().find(|&&q| q >= plant.num_states()) {
        return Err(Error::UnknownState(q));
    }
    let observable: EventSet = c.observable.intersection(plant.events()).copied().collect();
    let controllable: EventSet = c.controllable.intersection(plant.events()).copied().collect();
    if mode == Mode::Strict && !controllable.is_subset(&observable) {
        let names: Vec<&str> = controllable
            .difference(&observable)
            .map(|&e| plant.alphabet().name(e))
            .collect();
        return Err(Error::ConstraintViolation(format!(
            "controllable events {names:?} are unobservable"
        )));
    }

    let obs = observer_project(plant, &observable);
    let graph = &obs.automaton;
    let n = graph.num_states();
    let mut deleted: Vec<bool> = obs
        .subsets
        .iter()
        .map(|s| s.states().iter().any(|q| bad.contains(q)))
        .collect();
    if deleted[0] {
        return Ok(SynthesisResult::Empty { round: 0 });
    }

    let mut round = 0;
    loop {
        let newly: Vec<StateId> = (0..n)
            .filter(|&x| !deleted[x])
            .filter(|&x| {
                graph.transitions(x).any(|(e, y)| {
                    observable.contains(&e) && !controllable.contains(&e) && deleted[y]
                })
            })
            .collect();
        if newly.is_empty() {
            break;
        }
        round += 1;
        for x in newly {
            deleted[x] = true;
        }
        if deleted[0] {
            return Ok(SynthesisResult::Empty { round });
        }
    }

    let kept = graph.filter_transitions(|_, _, y| !deleted[y]);
    let order = kept.reachable();
    let mut index = vec![usize::MAX; n];
    for (i, &x) in order.iter().enumerate() {
        index[x] = i;
    }
    let mut b = AutomatonBuilder::new(plant.alphabet(), plant.events().clone());
    for i in 0..order.len() {
        b.add_state(format!("s{i}"), true);
    }
    for (i, &x) in order.iter().enumerate() {
        for (e, y) in kept.transitions(x) {
            b.add_transition(i, e, index[y])?;
        }
    }
    let estimates = order.iter().map(|&x| obs.subsets[x].clone()).collect();
    Ok(SynthesisResult::Supervisor(Synthesized {
        supervisor: b.build(0)?,
        estimates,
        rounds: round,
    }))
}

/// No state of `bad` is reachable in `plant ‖ sup`.
pub fn check_safety(plant: &Automaton, bad: &BTreeSet<StateId>, sup: &Automaton) -> Result<bool> {
    let p = sync_product_all(&[plant, sup])?;
    Ok(!p.components.iter().any(|t| bad.contains(&t[0])))
}

/// Every event outside `Σ_ctl` that the plant can execute in the closed loop
/// is enabled by the supervisor.
pub fn check_controllability(plant: &Automaton, sup: &Automaton, c: &ControlConstraint) -> Result<bool> {
    let p = sync_product_all(&[plant, sup])?;
    for t in &p.components {
        for (e, _) in plant.transitions(t[0]) {
            if !c.controllable.contains(&e) && sup.events().contains(&e) && sup.next(t[1], e).is_none() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// The supervisor changes state only on observable events.
pub fn check_normality(sup: &Automaton, c: &ControlConstraint) -> bool {
    sup.states()
        .all(|q| sup.transitions(q).all(|(e, t)| c.observable.contains(&e) || t == q))
}
