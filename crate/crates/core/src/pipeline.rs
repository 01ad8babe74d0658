//! From a plant, observations and attack capabilities to the supremal
//! covert damage-reachable attacker.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use crate::alphabet::EventSet;
use crate::automaton::{is_marker_reachable, minimize_with_classes, Automaton, StateId};
use crate::error::{Error, Result};
use crate::models::{
    build_ac, build_ce, build_cea, build_oc, build_ocns, build_ocnsa, build_sdown, build_sdowna,
    build_sdowna_bar, AttackConstraint, Bipartite, ObservationSet, COV_BRK,
};
use crate::product::sync_product_all;
use crate::synthesis::{supremal_safe_supervisor, ControlConstraint, Mode, SynthesisResult};

#[derive(Clone, Copy, Debug, Default)]
pub struct PipelineOptions {
    pub mode: Mode,
    pub keep_intermediates: bool,
}

#[derive(Clone, Debug)]
pub struct Intermediates {
    pub ns: Bipartite,
    pub oc: Automaton,
    pub ocns: Bipartite,
    pub ocns_a: Automaton,
    pub ac: Automaton,
    pub ce_a: Automaton,
    pub sdown: Automaton,
    pub sdown_a: Automaton,
    pub sdown_a_bar: Automaton,
}

/// State counts observed along the pipeline.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Sizes {
    pub ns: usize,
    pub ocns: usize,
    pub ocns_a: usize,
    /// The composed plant of the second procedure.
    pub plant: usize,
    /// Attacker before minimization.
    pub attacker_raw: usize,
    pub attacker: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NoSolution {
    /// Not even an attack-free safe supervisor exists.
    NoSafeSupervisor,
    /// Every attacker breaks covertness; `round` is the deletion round that
    /// removed the initial estimate.
    CovertnessUnavoidable { round: usize },
    /// A covert attacker exists but none reaches damage.
    DamageUnreachable,
}

#[derive(Clone, Debug)]
pub struct SynthesisOutcome {
    pub attacker: Option<Automaton>,
    pub no_solution: Option<NoSolution>,
    /// Attacker states at which damage has been inflicted.
    pub damage_states: BTreeSet<StateId>,
    pub marker_reachable: bool,
    /// Set when controllable events are unobservable: the answer is sound
    /// but supremality is not guaranteed.
    pub sound_incomplete: bool,
    pub sizes: Sizes,
    pub elapsed: Duration,
    pub intermediates: Option<Intermediates>,
}

impl SynthesisOutcome {
    pub fn is_solution(&self) -> bool {
        self.attacker.is_some()
    }

    fn none(reason: NoSolution, sound_incomplete: bool) -> Self {
        SynthesisOutcome {
            attacker: None,
            no_solution: Some(reason),
            damage_states: BTreeSet::new(),
            marker_reachable: false,
            sound_incomplete,
            sizes: Sizes::default(),
            elapsed: Duration::ZERO,
            intermediates: None,
        }
    }
}

fn check_plant(g: &Automaton) -> Result<()> {
    if g.events() != g.alphabet().sigma() {
        return Err(Error::InvalidAlphabet("the plant must be defined over exactly the plant events".into()));
    }
    Ok(())
}

fn check_mode(g: &Automaton, mode: Mode) -> Result<()> {
    if mode == Mode::Strict && !g.alphabet().controllable_observed() {
        return Err(Error::ConstraintViolation(
            "some controllable events are unobservable; use sound-only mode".into(),
        ));
    }
    Ok(())
}

/// Synthesizes `NS`, the supremal safe command-nondeterministic supervisor.
/// The plant's marked states are its damage states. `None` when no safe
/// supervisor exists.
pub fn procedure1(g: &Automaton, mode: Mode) -> Result<Option<Bipartite>> {
    check_plant(g)?;
    let al = g.alphabet().clone();
    let ce = build_ce(&al);
    let p = sync_product_all(&[g, &ce])?;
    let plant = p.automaton.with_all_marked();
    let bad: BTreeSet<StateId> = (0..plant.num_states()).filter(|&q| g.is_marked(p.component(q, 0))).collect();
    let mut ctl: EventSet = al.gamma().clone();
    if let Some(v) = al.uncontrollable_command() {
        ctl.remove(&v);
    }
    let obs: EventSet = al.observable().union(al.gamma()).copied().collect();
    let synth = match supremal_safe_supervisor(&plant, &bad, &ControlConstraint::new(ctl, obs), mode)? {
        SynthesisResult::Empty { .. } => return Ok(None),
        SynthesisResult::Supervisor(s) => s,
    };

    // A macro-state is a control state iff the command executor is idle in
    // all of its plant states.
    let ce_init = ce.initial();
    let mut control = Vec::with_capacity(synth.estimates.len());
    for est in &synth.estimates {
        let idle = est.states().iter().filter(|&&x| p.component(x, 1) == ce_init).count();
        if idle != 0 && idle != est.len() {
            return Err(Error::InvalidBipartite("estimate mixes control and reaction states".into()));
        }
        control.push(idle != 0);
    }
    let stripped = synth
        .supervisor
        .filter_transitions(|q, e, _| !control[q] || al.is_command(e));
    let classes: Vec<usize> = control.iter().map(|&c| c as usize).collect();
    let (ns, image) = minimize_with_classes(&stripped, &classes);
    let mut reaction = vec![false; ns.num_states()];
    for (old, new) in image.iter().enumerate() {
        if let Some(n) = new {
            reaction[*n] = !control[old];
        }
    }
    Bipartite::new(ns, reaction).map(Some)
}

/// Synthesizes the supremal covert attacker over the composed plant
/// `G ‖ CE^A ‖ AC ‖ OCNS^A ‖ S̄↓,A` and decides damage-reachability.
pub fn procedure2(
    g: &Automaton,
    ce_a: &Automaton,
    ac: &Automaton,
    ocns_a: &Automaton,
    sdown_a_bar: &Automaton,
    mode: Mode,
) -> Result<SynthesisOutcome> {
    check_plant(g)?;
    let al = g.alphabet().clone();
    let cov = ocns_a
        .state_by_label(COV_BRK)
        .ok_or_else(|| Error::InvalidBipartite(format!("no `{COV_BRK}` state")))?;
    let (ce_a, ac, ocns_a) = (ce_a.with_all_marked(), ac.with_all_marked(), ocns_a.with_all_marked());
    let p = sync_product_all(&[g, &ce_a, &ac, &ocns_a, sdown_a_bar])?;
    let bad: BTreeSet<StateId> = p
        .components
        .iter()
        .enumerate()
        .filter(|(_, t)| !g.is_marked(t[0]) && t[3] == cov)
        .map(|(q, _)| q)
        .collect();
    let c = AttackConstraint::from_alphabet(&al).control_constraint();
    let sound_incomplete = !c.is_strict();
    let mut sizes = Sizes {
        plant: p.automaton.num_states(),
        ocns_a: ocns_a.num_states(),
        ..Sizes::default()
    };
    log::info!("composed plant: {} states, {} bad", sizes.plant, bad.len());

    let synth = match supremal_safe_supervisor(&p.automaton, &bad, &c, mode)? {
        SynthesisResult::Empty { round } => {
            let mut out = SynthesisOutcome::none(NoSolution::CovertnessUnavoidable { round }, sound_incomplete);
            out.sizes = sizes;
            return Ok(out);
        }
        SynthesisResult::Supervisor(s) => s,
    };
    sizes.attacker_raw = synth.supervisor.num_states();
    let closed = sync_product_all(&[&p.automaton, &synth.supervisor])?;
    let marker_reachable = is_marker_reachable(&closed.automaton);
    if !marker_reachable {
        let mut out = SynthesisOutcome::none(NoSolution::DamageUnreachable, sound_incomplete);
        out.sizes = sizes;
        return Ok(out);
    }
    let (attacker, image) = minimize_with_classes(&synth.supervisor, &vec![0; synth.supervisor.num_states()]);
    let damage_states = closed
        .components
        .iter()
        .filter(|t| p.automaton.is_marked(t[0]))
        .filter_map(|t| image[t[1]])
        .collect();
    sizes.attacker = attacker.num_states();
    log::info!("attacker: {} states ({} before minimization)", sizes.attacker, sizes.attacker_raw);
    Ok(SynthesisOutcome {
        attacker: Some(attacker),
        no_solution: None,
        damage_states,
        marker_reachable,
        sound_incomplete,
        sizes,
        elapsed: Duration::ZERO,
        intermediates: None,
    })
}

/// Runs both procedures and every intermediate construction.
pub fn synth_attacker(g: &Automaton, m_o: &ObservationSet, options: PipelineOptions) -> Result<SynthesisOutcome> {
    let start = Instant::now();
    check_plant(g)?;
    check_mode(g, options.mode)?;
    if !g.same_alphabet(m_o.automaton()) {
        return Err(Error::AlphabetMismatch);
    }
    let al = g.alphabet().clone();

    let (ns_chain, sdown_chain) = rayon::join(
        || -> Result<Option<(Bipartite, Automaton, Bipartite, Automaton)>> {
            let Some(ns) = procedure1(g, options.mode)? else {
                return Ok(None);
            };
            let oc = build_oc(m_o);
            let ocns = build_ocns(&ns, &oc)?;
            let ocns_a = build_ocnsa(&ocns)?;
            Ok(Some((ns, oc, ocns, ocns_a)))
        },
        || -> Result<(Automaton, Automaton, Automaton)> {
            let sdown = build_sdown(m_o);
            let sdown_a = build_sdowna(&sdown)?;
            let bar = build_sdowna_bar(&sdown_a)?;
            Ok((sdown, sdown_a, bar))
        },
    );
    let sound_incomplete = !AttackConstraint::from_alphabet(&al).control_constraint().is_strict();
    let Some((ns, oc, ocns, ocns_a)) = ns_chain? else {
        let mut out = SynthesisOutcome::none(NoSolution::NoSafeSupervisor, sound_incomplete);
        out.elapsed = start.elapsed();
        return Ok(out);
    };
    let (sdown, sdown_a, sdown_a_bar) = sdown_chain?;
    let ac = build_ac(&al);
    let ce_a = build_cea(&al);
    log::info!(
        "NS: {} states, OCNS: {} states, OCNS^A: {} states",
        ns.automaton.num_states(),
        ocns.automaton.num_states(),
        ocns_a.num_states()
    );

    let mut out = procedure2(g, &ce_a, &ac, &ocns_a, &sdown_a_bar, options.mode)?;
    out.sizes.ns = ns.automaton.num_states();
    out.sizes.ocns = ocns.automaton.num_states();
    out.elapsed = start.elapsed();
    if options.keep_intermediates {
        out.intermediates = Some(Intermediates {
            ns,
            oc,
            ocns,
            ocns_a,
            ac,
            ce_a,
            sdown,
            sdown_a,
            sdown_a_bar,
        });
    }
    Ok(out)
}
