//! Synthesis of covert sensor-actuator attackers for supervisory control
//! systems whose supervisor is unknown to the attacker and only partially
//! revealed by a finite set of observed strings.
//!
//! The pipeline first computes the supremal safe command-nondeterministic
//! supervisor of the plant, turns it into an automaton that flags attacks
//! detectable by every supervisor consistent with the observations, and
//! finally synthesizes the supremal attacker that stays covert and can
//! drive the plant into a damage state.

pub mod alphabet;
pub mod automaton;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod models;
pub mod observer;
pub mod pipeline;
pub mod product;
pub mod synthesis;
pub mod verification;

pub use alphabet::{Alphabet, EventId, EventSet, EventSpec};
pub use automaton::{Automaton, AutomatonBuilder, StateId};
pub use error::{Error, Result};
pub use models::{Bipartite, ObservationSet};
pub use pipeline::{synth_attacker, NoSolution, PipelineOptions, SynthesisOutcome};
pub use synthesis::{supremal_safe_supervisor, ControlConstraint, Mode, SynthesisResult};
