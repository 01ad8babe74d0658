//! Checks of synthesized attackers against concrete supervisors.

mod enumerate;
pub mod policy;

use rayon::prelude::*;

use crate::alphabet::EventId;
use crate::automaton::{is_included, Automaton, StateId};
use crate::error::{Error, Result};
use crate::models::{
    build_ac, build_bts, build_bts_a, build_bts_m_with, build_ce, build_cea, build_monitor, ObservationSet, DETECT,
};
use crate::observer::observer_project;
use crate::product::{sync_product_all, Product};
use crate::synthesis::Mode;

pub use enumerate::{enumerate_consistent_supervisors, Enumeration};

/// Limits for supervisor enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bounds {
    /// Largest number of supervisor states considered.
    pub state_bound: usize,
    /// Enumeration stops (and reports truncation) past this many supervisors.
    pub count_bound: usize,
}

impl Bounds {
    pub const DEFAULT_COUNT: usize = 10_000;

    /// `|Q_o| + 1` states, default count bound.
    pub fn for_observations(m_o: &ObservationSet) -> Self {
        Bounds {
            state_bound: m_o.num_states() + 1,
            count_bound: Self::DEFAULT_COUNT,
        }
    }
}

/// `G ‖ CE ‖ BT(S)`.
pub fn closed_loop(g: &Automaton, s: &Automaton) -> Result<Product> {
    let bts = build_bts(s)?;
    let ce = build_ce(g.alphabet());
    sync_product_all(&[g, &ce, &bts.automaton])
}

/// No damage state is reachable under `S` without attack.
pub fn check_safe(g: &Automaton, s: &Automaton) -> Result<bool> {
    let p = closed_loop(g, s)?;
    Ok(!p.components.iter().any(|t| g.is_marked(t[0])))
}

/// `M_o ⊆ P_o(L(G ‖ CE ‖ BT(S)))`.
pub fn check_consistency(g: &Automaton, s: &Automaton, m_o: &ObservationSet) -> Result<bool> {
    let p = closed_loop(g, s)?;
    let obs = observer_project(&p.automaton, g.alphabet().observable());
    Ok(is_included(m_o.automaton(), &obs.automaton))
}

/// `BT(S)^A` for a supervisor.
pub fn attacked_supervisor(g: &Automaton, s: &Automaton) -> Result<Automaton> {
    let monitor = build_monitor(g, &build_ce(g.alphabet()))?;
    attacked_supervisor_with(s, &monitor)
}

fn attacked_supervisor_with(s: &Automaton, monitor: &Automaton) -> Result<Automaton> {
    build_bts_a(&build_bts_m_with(&build_bts(s)?, monitor)?)
}

/// `G ‖ CE^A ‖ AC ‖ BT(S)^A ‖ 𝒜`, components in that order.
pub fn attacked_closed_loop(g: &Automaton, bts_a: &Automaton, attacker: &Automaton) -> Result<Product> {
    let al = g.alphabet();
    let ce_a = build_cea(al);
    let ac = build_ac(al);
    sync_product_all(&[g, &ce_a, &ac, bts_a, attacker])
}

fn detect_state(bts_a: &Automaton) -> Result<StateId> {
    bts_a
        .state_by_label(DETECT)
        .ok_or_else(|| Error::InvalidSupervisor(format!("no `{DETECT}` state")))
}

/// A string of the attacked closed loop reaching detection before damage.
pub fn covertness_violation(g: &Automaton, bts_a: &Automaton, attacker: &Automaton) -> Result<Option<Vec<EventId>>> {
    let detect = detect_state(bts_a)?;
    let p = attacked_closed_loop(g, bts_a, attacker)?;
    Ok(p.automaton
        .find_path(|q| !g.is_marked(p.component(q, 0)) && p.component(q, 3) == detect))
}

/// A string of the attacked closed loop reaching damage.
pub fn damage_witness(g: &Automaton, bts_a: &Automaton, attacker: &Automaton) -> Result<Option<Vec<EventId>>> {
    let p = attacked_closed_loop(g, bts_a, attacker)?;
    Ok(p.automaton.find_path(|q| g.is_marked(p.component(q, 0))))
}

pub fn check_covert(g: &Automaton, s: &Automaton, attacker: &Automaton) -> Result<bool> {
    Ok(covertness_violation(g, &attacked_supervisor(g, s)?, attacker)?.is_none())
}

pub fn check_damage(g: &Automaton, s: &Automaton, attacker: &Automaton) -> Result<bool> {
    Ok(damage_witness(g, &attacked_supervisor(g, s)?, attacker)?.is_some())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FailureKind {
    /// The supervisor can detect the attack.
    Detected,
    /// Damage is unreachable under the supervisor.
    NoDamage,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Failure {
    /// Index into the enumerated supervisors.
    pub supervisor: usize,
    pub kind: FailureKind,
    /// Counterexample for [`FailureKind::Detected`].
    pub trace: Option<Vec<String>>,
}

#[derive(Clone, Debug)]
pub struct Report {
    pub supervisors: Vec<Automaton>,
    pub truncated: bool,
    pub failures: Vec<Failure>,
}

impl Report {
    pub fn is_success(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks covertness and damage-reachability of `attacker` against every
/// enumerated safe supervisor consistent with the observations.
pub fn verify_successful(
    attacker: &Automaton,
    g: &Automaton,
    m_o: &ObservationSet,
    bounds: Bounds,
    mode: Mode,
) -> Result<Report> {
    let en = enumerate_consistent_supervisors(g, m_o, bounds, mode)?;
    let monitor = build_monitor(g, &build_ce(g.alphabet()))?;
    let failures: Vec<Vec<Failure>> = en
        .supervisors
        .par_iter()
        .enumerate()
        .map(|(i, s)| -> Result<Vec<Failure>> {
            let bts_a = attacked_supervisor_with(s, &monitor)?;
            let mut out = Vec::new();
            if let Some(t) = covertness_violation(g, &bts_a, attacker)? {
                out.push(Failure {
                    supervisor: i,
                    kind: FailureKind::Detected,
                    trace: Some(g.alphabet().names(&t)),
                });
            }
            if damage_witness(g, &bts_a, attacker)?.is_none() {
                out.push(Failure {
                    supervisor: i,
                    kind: FailureKind::NoDamage,
                    trace: None,
                });
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(Report {
        supervisors: en.supervisors,
        truncated: en.truncated,
        failures: failures.into_iter().flatten().collect(),
    })
}
