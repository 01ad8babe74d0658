//! The water tank example.
//!
//! A tank reports low (`L`) and high (`H`) levels; the supervisor answers
//! by opening (`open`) or closing (`close`) the inlet valve. Answering low
//! with `open` empties the tank (`EL`), answering high with `close`
//! overflows it (`EH`). Both sensors and both actuators are compromised.

use std::sync::Arc;

use crate::alphabet::{Alphabet, EventSpec};
use crate::automaton::{Automaton, AutomatonBuilder};
use crate::error::Result;
use crate::models::ObservationSet;

#[derive(Clone, Debug)]
pub struct Fixture {
    pub alphabet: Arc<Alphabet>,
    pub plant: Automaton,
    pub observations: ObservationSet,
}

pub fn water_tank_alphabet() -> Alphabet {
    let sensor = |n: &str| EventSpec::new(n).compromised(true);
    let valve = |n: &str| EventSpec::new(n).controllable(true).attackable(true);
    Alphabet::new(
        vec![
            valve("close"),
            valve("open"),
            sensor("L"),
            sensor("H"),
            sensor("EL"),
            sensor("EH"),
        ],
        None,
        None,
    )
    .expect("valid alphabet")
}

pub fn water_tank() -> Fixture {
    water_tank_on(Arc::new(water_tank_alphabet())).expect("valid fixture")
}

/// The water tank over an alphabet with the same plant events, for example
/// one with different attack capabilities.
pub fn water_tank_on(alphabet: Arc<Alphabet>) -> Result<Fixture> {
    let ev = |n: &str| alphabet.lookup(n);
    let (close, open, l, h) = (ev("close")?, ev("open")?, ev("L")?, ev("H")?);

    let mut g = AutomatonBuilder::new(&alphabet, alphabet.sigma().clone());
    for (label, damage) in [("0", false), ("1", false), ("2", false), ("EL", true), ("EH", true)] {
        g.add_state(label, damage);
    }
    g.add_transition(0, l, 1)?;
    g.add_transition(0, h, 2)?;
    g.add_transition(1, close, 0)?;
    g.add_transition(1, open, 3)?;
    g.add_transition(2, open, 0)?;
    g.add_transition(2, close, 4)?;
    let plant = g.build(0)?;

    let mut m = AutomatonBuilder::new(&alphabet, alphabet.observable().clone());
    for label in ["0", "1", "2", "3"] {
        m.add_state(label, true);
    }
    m.add_transition(0, l, 1)?;
    m.add_transition(0, h, 2)?;
    m.add_transition(1, close, 3)?;
    m.add_transition(2, open, 3)?;
    let observations = ObservationSet::new(m.build(0)?)?;

    Ok(Fixture {
        alphabet,
        plant,
        observations,
    })
}
