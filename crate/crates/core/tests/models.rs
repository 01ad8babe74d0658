mod common;

use std::collections::BTreeSet;
use std::sync::Arc;

use covsynth::alphabet::{Alphabet, EventId, EventSet, EventSpec};
use covsynth::automaton::{enumerate_language, language_equal, remove_states, Automaton, AutomatonBuilder};
use covsynth::fixtures::{water_tank, water_tank_on, Fixture};
use covsynth::models::{
    build_ac, build_bts, build_bts_a, build_bts_m, build_ce, build_cea, build_oc, build_ocns, build_ocnsa,
    build_sdown, build_sdowna, build_sdowna_bar, encode_attack, AttackConstraint, Bipartite, ObservationSet, COV_BRK,
    DETECT, DUMP, RISK,
};
use covsynth::pipeline::procedure1;
use covsynth::product::sync_product_all;
use covsynth::verification::{enumerate_consistent_supervisors, Bounds};
use covsynth::{Error, Mode};
use rand::Rng;

use common::{attack_instances, ev, rng};

/// Single-state supervisor enabling exactly the uncontrollable events.
fn passive_supervisor(al: &Arc<Alphabet>) -> Automaton {
    let mut b = AutomatonBuilder::new(al, al.sigma().clone());
    b.add_state("0", true);
    for e in al.uncontrollable() {
        b.add_transition(0, e, 0).unwrap();
    }
    b.build(0).unwrap()
}

fn wt_sdowna_bar(f: &Fixture) -> Automaton {
    build_sdowna_bar(&build_sdowna(&build_sdown(&f.observations)).unwrap()).unwrap()
}

fn ocnsa_of(f: &Fixture) -> Automaton {
    let ns = procedure1(&f.plant, Mode::Strict).unwrap().unwrap();
    build_ocnsa(&build_ocns(&ns, &build_oc(&f.observations)).unwrap()).unwrap()
}

#[test]
fn attack_constraint_template_matches_formula() {
    let f = water_tank();
    let ac = build_ac(&f.alphabet);
    assert_eq!(ac.num_states(), 3);
    // |Σ_uo| + |Γ| + 2|Σ_s,a| + |Σ_o − Σ_s,a| + 2 = 0 + 4 + 8 + 2 + 2.
    assert_eq!(ac.num_transitions(), 16);
    let s = ev(&f.alphabet, "v2 H H# stop L L# stop close stop");
    assert!(ac.accepts(&s));
    assert!(!ac.accepts(&ev(&f.alphabet, "H H# H")));
    assert!(!ac.accepts(&ev(&f.alphabet, "H stop H#")));

    for seed in 0..30 {
        let mut r = rng(seed);
        let specs: Vec<EventSpec> = (0..4)
            .map(|i| {
                let obs = r.gen_bool(0.7);
                EventSpec::new(format!("e{i}"))
                    .observable(obs)
                    .controllable(obs && r.gen_bool(0.5))
                    .compromised(obs && r.gen_bool(0.5))
            })
            .collect();
        let al = Arc::new(Alphabet::new(specs, None, None).unwrap());
        let ac = build_ac(&al);
        let sa = al.compromised().len();
        let expected = al.unobservable().len() + al.gamma().len() + 2 * sa + (al.observable().len() - sa) + 2;
        assert_eq!(ac.num_transitions(), expected, "seed {seed}");
        if sa == 0 {
            assert_eq!(ac.reachable().len(), 2);
        }
    }
}

#[test]
fn command_execution_sizes() {
    let f = water_tank();
    let ce = build_ce(&f.alphabet);
    let cea = build_cea(&f.alphabet);
    assert_eq!(ce.num_states(), 5);
    assert_eq!(cea.num_states(), f.alphabet.gamma().len() + 1);
    // After v1 (no valve enabled) an actuator attack may still fire close.
    assert!(!ce.accepts(&ev(&f.alphabet, "v1 close")));
    assert!(cea.accepts(&ev(&f.alphabet, "v1 close")));
    assert!(cea.accepts(&ev(&f.alphabet, "L H v2")));

    let quiet = Arc::new(f.alphabet.with_attack(&["L", "H", "EL", "EH"], &[]).unwrap());
    let ce = build_ce(&quiet);
    let cea = build_cea(&quiet);
    assert_eq!(cea.num_transitions(), ce.num_transitions() + quiet.uncontrollable().len());
    for e in quiet.uncontrollable() {
        assert_eq!(cea.next(cea.initial(), e), Some(cea.initial()));
    }

    let specs = (0..4)
        .map(|i| EventSpec::new(format!("e{i}")).controllable(i < 3))
        .collect();
    let al = Arc::new(Alphabet::new(specs, None, None).unwrap());
    assert_eq!(al.gamma().len(), 8);
    assert_eq!(build_cea(&al).num_states(), 9);
}

#[test]
fn bipartite_supervisor_of_passive_supervisor() {
    let f = water_tank();
    let al = &f.alphabet;
    let bts = build_bts(&passive_supervisor(al)).unwrap();
    let a = &bts.automaton;
    assert_eq!(a.num_states(), 2);
    assert_eq!(a.label(a.initial()), "0^com");
    let v1 = al.uncontrollable_command().unwrap();
    assert_eq!(al.name(v1), "v1");
    let rea = a.next(a.initial(), v1).unwrap();
    assert_eq!(a.enabled(a.initial()), EventSet::from([v1]));
    for n in ["L", "H", "EL", "EH"] {
        assert_eq!(a.next(rea, al.lookup(n).unwrap()), Some(a.initial()));
    }
    assert_eq!(bts.reaction_states(), vec![rea]);
}

#[test]
fn bipartite_supervisor_of_random_supervisors() {
    let f = water_tank();
    let en = enumerate_consistent_supervisors(
        &f.plant,
        &f.observations,
        Bounds {
            state_bound: 3,
            count_bound: 200,
        },
        Mode::Strict,
    )
    .unwrap();
    let mut sized = 0;
    for s in &en.supervisors {
        let bts = build_bts(s).unwrap();
        assert!(Bipartite::new(bts.automaton.clone(), bts.reaction.clone()).is_ok());
        if s.reachable().len() == s.num_states() {
            assert_eq!(bts.automaton.num_states(), 2 * s.num_states());
            sized += 1;
        }
    }
    assert!(sized > 0);
}

#[test]
fn invalid_supervisor_is_rejected() {
    let f = water_tank();
    let mut b = AutomatonBuilder::new(&f.alphabet, f.alphabet.sigma().clone());
    b.add_state("0", true);
    b.add_transition(0, f.alphabet.lookup("L").unwrap(), 0).unwrap();
    let s = b.build(0).unwrap();
    assert!(matches!(build_bts(&s), Err(Error::InvalidSupervisor(_))));
}

#[test]
fn monitor_preserves_closed_loop() {
    let f = water_tank();
    let ce = build_ce(&f.alphabet);
    let bts = build_bts(&passive_supervisor(&f.alphabet)).unwrap();
    let bts_m = build_bts_m(&bts, &f.plant, &ce).unwrap();
    let with_m = sync_product_all(&[&bts_m.automaton, &f.plant, &ce]).unwrap().automaton;
    let without = sync_product_all(&[&bts.automaton, &f.plant, &ce]).unwrap().automaton;
    assert!(language_equal(&with_m, &without));

    for (seed, inst) in attack_instances(0, 3) {
        let ce = build_ce(&inst.alphabet);
        let en = enumerate_consistent_supervisors(
            &inst.plant,
            &inst.observations,
            Bounds {
                state_bound: 2,
                count_bound: 20,
            },
            Mode::Strict,
        )
        .unwrap();
        for s in &en.supervisors {
            let bts = build_bts(s).unwrap();
            let bts_m = build_bts_m(&bts, &inst.plant, &ce).unwrap();
            let a = sync_product_all(&[&bts_m.automaton, &inst.plant, &ce]).unwrap().automaton;
            let b = sync_product_all(&[&bts.automaton, &inst.plant, &ce]).unwrap().automaton;
            assert_eq!(enumerate_language(&a, 6), enumerate_language(&b, 6), "seed {seed}");
        }
    }
}

#[test]
fn universal_monitor_changes_nothing() {
    let specs = vec![EventSpec::new("a").controllable(true), EventSpec::new("b")];
    let al = Arc::new(Alphabet::new(specs, None, None).unwrap());
    let mut g = AutomatonBuilder::new(&al, al.sigma().clone());
    g.add_state("0", false);
    for &e in al.sigma() {
        g.add_transition(0, e, 0).unwrap();
    }
    let g = g.build(0).unwrap();
    let bts = build_bts(&passive_supervisor(&al)).unwrap();
    let bts_m = build_bts_m(&bts, &g, &build_ce(&al)).unwrap();
    assert!(language_equal(&bts_m.automaton, &bts.automaton));
}

#[test]
fn attacked_passive_supervisor() {
    let f = water_tank();
    let al = &f.alphabet;
    let ce = build_ce(al);
    let bts = build_bts(&passive_supervisor(al)).unwrap();
    let bts_m = build_bts_m(&bts, &f.plant, &ce).unwrap();
    let bts_a = build_bts_a(&bts_m).unwrap();
    let detect = bts_a.state_by_label(DETECT).unwrap();
    assert_eq!(detect, bts_a.num_states() - 1);
    assert_eq!(bts_a.num_states(), bts_m.automaton.num_states() + 1);
    let rea = bts_a.run(&ev(al, "v1")).unwrap();
    // Plant copies of compromised sensors self-loop; the relabelled copies move.
    assert_eq!(bts_a.run(&ev(al, "v1 H")), Some(rea));
    assert_ne!(bts_a.run(&ev(al, "v1 H#")), Some(detect));
    // Valves are not enabled, so observing one means detection.
    assert_eq!(bts_a.run(&ev(al, "v1 close")), Some(detect));
    assert_eq!(bts_a.run(&ev(al, "v1 open")), Some(detect));
}

#[test]
fn attack_free_encoding_only_adds_detection() {
    let f = water_tank();
    let quiet = Arc::new(f.alphabet.with_attack(&[], &[]).unwrap());
    let f = water_tank_on(quiet.clone()).unwrap();
    let bts = build_bts(&passive_supervisor(&quiet)).unwrap();
    let bts_m = build_bts_m(&bts, &f.plant, &build_ce(&quiet)).unwrap();
    let bts_a = build_bts_a(&bts_m).unwrap();
    let detect = bts_a.state_by_label(DETECT).unwrap();
    let rest = remove_states(&bts_a, &BTreeSet::from([detect])).unwrap();
    assert!(language_equal(&rest, &bts_m.automaton));
    for q in bts_a.states() {
        for (_, t) in bts_a.transitions(q) {
            assert!(t == detect || bts_m.automaton.num_states() > t);
        }
    }
}

#[test]
fn command_consistency_automaton() {
    let f = water_tank();
    let al = &f.alphabet;
    let oc = build_oc(&f.observations);
    assert_eq!(oc.num_states(), 2 * f.observations.num_states() + 1);
    let one = oc.state_by_label("1^com").unwrap();
    let names: BTreeSet<&str> = oc.enabled(one).iter().map(|&e| al.name(e)).collect();
    assert_eq!(names, BTreeSet::from(["v2", "v4"]));
    let dump = oc.state_by_label(DUMP).unwrap();
    assert_eq!(oc.run(&ev(al, "v1 EH")), Some(dump));

    let trivial = ObservationSet::from_strings(al, &[Vec::new()]).unwrap();
    let oc = build_oc(&trivial);
    assert_eq!(&oc.enabled(oc.initial()), al.gamma());
    let rea = oc.run(&ev(al, "v1")).unwrap();
    let dump = oc.state_by_label(DUMP).unwrap();
    for &e in al.observable() {
        assert_eq!(oc.next(rea, e), Some(dump));
    }
}

#[test]
fn command_consistency_matches_subset_test() {
    let specs = vec![
        EventSpec::new("a").controllable(true),
        EventSpec::new("b").controllable(true),
        EventSpec::new("c"),
    ];
    let al = Arc::new(Alphabet::new(specs, None, None).unwrap());
    let obs: Vec<EventId> = al.observable().iter().copied().collect();
    for seed in 0..20 {
        let mut r = rng(seed);
        let strings: Vec<Vec<EventId>> = (0..3)
            .map(|_| (0..r.gen_range(0..=3)).map(|_| obs[r.gen_range(0..obs.len())]).collect())
            .collect();
        let m_o = ObservationSet::from_strings(&al, &strings).unwrap();
        let mo = m_o.automaton();
        let oc = build_oc(&m_o);
        for q in mo.states() {
            let com = oc.state_by_label(&format!("{}^com", mo.label(q))).unwrap();
            let en = mo.enabled(q);
            let expected: EventSet = al
                .commands()
                .iter()
                .filter(|c| en.iter().all(|e| c.members.contains(e)))
                .map(|c| c.id)
                .collect();
            assert_eq!(oc.enabled(com), expected, "seed {seed}");
        }
    }
}

#[test]
fn observation_consistent_supervisor() {
    let f = water_tank();
    let al = &f.alphabet;
    let ns = procedure1(&f.plant, Mode::Strict).unwrap().unwrap();
    let ocns = build_ocns(&ns, &build_oc(&f.observations)).unwrap();
    let a = &ocns.automaton;
    assert_eq!(&a.enabled(a.initial()), al.gamma());
    for v in ["v1", "v2", "v3", "v4"] {
        let after_h = a.run(&ev(al, &format!("{v} H"))).unwrap();
        let names: Vec<&str> = a.enabled(after_h).iter().map(|&e| al.name(e)).collect();
        assert_eq!(names, vec!["v3"]);
    }

    let trivial = ObservationSet::from_strings(al, &[Vec::new()]).unwrap();
    let ocns = build_ocns(&ns, &build_oc(&trivial)).unwrap();
    assert!(language_equal(&ocns.automaton, &ns.automaton));
}

#[test]
fn attacked_observation_consistent_supervisor() {
    let f = water_tank();
    let al = &f.alphabet;
    let ocns_a = ocnsa_of(&f);
    let brk = ocns_a.state_by_label(COV_BRK).unwrap();
    assert_eq!(brk, ocns_a.num_states() - 1);
    for v in ["v1", "v2", "v3", "v4"] {
        for e in ["EL#", "EH#", "close", "open"] {
            assert_eq!(ocns_a.run(&ev(al, &format!("{v} {e}"))), Some(brk), "{v} {e}");
        }
        assert_ne!(ocns_a.run(&ev(al, &format!("{v} L#"))), Some(brk));
    }
}

#[test]
fn least_permissive_supervisor_models() {
    let f = water_tank();
    let al = &f.alphabet;
    let sdown = build_sdown(&f.observations);
    assert_eq!(sdown.num_states(), 4);
    let three = sdown.state_by_label("3").unwrap();
    for n in ["EH", "EL"] {
        assert_eq!(sdown.run(&ev(al, n)), Some(three));
    }
    let sdown_a = build_sdowna(&sdown).unwrap();
    let risk = sdown_a.state_by_label(RISK).unwrap();
    assert_eq!(sdown_a.num_states(), 5);
    for n in ["close", "open"] {
        assert_eq!(sdown_a.run(&ev(al, n)), Some(risk));
    }
    assert_eq!(sdown_a.run(&ev(al, "L")), Some(sdown_a.initial()));
    assert_eq!(sdown_a.run(&ev(al, "L#")), sdown_a.state_by_label("1"));
    let bar = build_sdowna_bar(&sdown_a).unwrap();
    assert_eq!(bar.num_states(), f.observations.num_states() + 2);
    let dump = bar.state_by_label(DUMP).unwrap();
    assert_eq!(bar.marked_states(), bar.states().filter(|&q| q != dump).collect());
    let over: EventSet = al.sigma().union(al.relabelled()).copied().collect();
    for q in bar.states() {
        assert_eq!(bar.enabled(q), over);
    }
    assert_eq!(wt_sdowna_bar(&f).num_states(), 6);
}

#[test]
fn least_permissive_without_uncontrollable_events() {
    let specs = vec![EventSpec::new("a").controllable(true)];
    let al = Arc::new(Alphabet::new(specs, None, None).unwrap());
    let trivial = ObservationSet::from_strings(&al, &[Vec::new()]).unwrap();
    let sdown = build_sdown(&trivial);
    assert_eq!(sdown.num_states(), 1);
    assert_eq!(sdown.num_transitions(), 0);
    let sdown_a = build_sdowna(&sdown).unwrap();
    let bar = build_sdowna_bar(&sdown_a).unwrap();
    assert_eq!(bar.num_states(), sdown_a.num_states() + 1);
}

#[test]
fn unattackable_valve_outside_observations_is_not_damage_evidence() {
    let specs = vec![
        EventSpec::new("h").compromised(true),
        EventSpec::new("l").compromised(true),
        EventSpec::new("x").controllable(true),
    ];
    let al = Arc::new(Alphabet::new(specs, None, None).unwrap());
    let m_o = ObservationSet::from_strings(&al, &[ev(&al, "l")]).unwrap();
    let sdown_a = build_sdowna(&build_sdown(&m_o)).unwrap();
    let risk = sdown_a.state_by_label(RISK).unwrap();
    assert_eq!(sdown_a.run(&ev(&al, "l# x")), Some(risk));
    let bar = build_sdowna_bar(&sdown_a).unwrap();
    let dump = bar.state_by_label(DUMP).unwrap();
    assert_eq!(bar.run(&ev(&al, "l# x")), Some(dump));
    assert_eq!(bar.run(&ev(&al, "x")), Some(dump));

    let attackable = Arc::new(al.with_attack(&["h", "l"], &["x"]).unwrap());
    let m_o = ObservationSet::from_strings(&attackable, &[ev(&attackable, "l")]).unwrap();
    let bar = build_sdowna_bar(&build_sdowna(&build_sdown(&m_o)).unwrap()).unwrap();
    assert_eq!(bar.run(&ev(&attackable, "l# x")), bar.state_by_label(RISK));
}

#[test]
fn sink_label_collision_is_rejected() {
    let f = water_tank();
    let oc = build_oc(&f.observations);
    let reaction = vec![true; oc.num_states()];
    assert!(matches!(encode_attack(&oc, &reaction, DUMP), Err(Error::LabelCollision(_))));
}

#[test]
fn bipartite_partition_is_checked() {
    let f = water_tank();
    let bts = build_bts(&passive_supervisor(&f.alphabet)).unwrap();
    let flipped: Vec<bool> = bts.reaction.iter().map(|r| !r).collect();
    assert!(matches!(
        Bipartite::new(bts.automaton.clone(), flipped),
        Err(Error::InvalidBipartite(_))
    ));
    let structural = Bipartite::structural(bts.automaton.clone()).unwrap();
    assert_eq!(structural.reaction, bts.reaction);
}

#[test]
fn observation_sets_are_validated() {
    let f = water_tank();
    let al = &f.alphabet;
    let (l, h) = (al.lookup("L").unwrap(), al.lookup("H").unwrap());
    let mut cyc = AutomatonBuilder::new(al, al.observable().clone());
    cyc.add_state("0", true);
    cyc.add_state("1", true);
    cyc.add_transition(0, l, 0).unwrap();
    cyc.add_transition(0, h, 1).unwrap();
    assert!(matches!(ObservationSet::new(cyc.build(0).unwrap()), Err(Error::InvalidObservations(_))));

    let mut two = AutomatonBuilder::new(al, al.observable().clone());
    for q in ["0", "1", "2"] {
        two.add_state(q, true);
    }
    two.add_transition(0, l, 1).unwrap();
    two.add_transition(0, h, 2).unwrap();
    assert!(matches!(ObservationSet::new(two.build(0).unwrap()), Err(Error::InvalidObservations(_))));

    let hidden = Arc::new(
        Alphabet::new(vec![EventSpec::new("u").observable(false), EventSpec::new("o")], None, None).unwrap(),
    );
    let mut b = AutomatonBuilder::new(&hidden, hidden.sigma().clone());
    b.add_state("0", true);
    b.add_state("1", true);
    b.add_transition(0, hidden.lookup("u").unwrap(), 1).unwrap();
    assert!(matches!(ObservationSet::new(b.build(0).unwrap()), Err(Error::InvalidObservations(_))));
}

#[test]
fn attacker_control_constraint() {
    let f = water_tank();
    let al = &f.alphabet;
    let c = AttackConstraint::from_alphabet(al).control_constraint();
    let names = |s: &EventSet| s.iter().map(|&e| al.name(e).to_string()).collect::<BTreeSet<_>>();
    let ctl: BTreeSet<String> = ["close", "open", "L#", "H#", "EL#", "EH#", "stop"].map(String::from).into();
    assert_eq!(names(&c.controllable), ctl);
    assert!(c.controllable.is_subset(&c.observable));
    assert!(c.is_strict());
}
