//! JSON model files.
//!
//! ```json
//! {
//!   "format_version": 1,
//!   "alphabet": {
//!     "events": [{"name": "a", "observable": true, "controllable": false, "compromised": false, "attackable": false}],
//!     "commands": [{"name": "v1", "events": ["a"]}]
//!   },
//!   "automata": {
//!     "plant": {
//!       "events": ["a"],
//!       "states": [{"label": "0", "marked": false}],
//!       "initial": "0",
//!       "transitions": [["0", "a", "0"]]
//!     }
//!   }
//! }
//! ```
//!
//! Omitted event flags default to observable and otherwise false. Omitted
//! `commands` generate the full command set. An automaton without `events`
//! is defined over the plant events, except `observations`, which defaults
//! to the observable events.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::alphabet::{Alphabet, EventSet, EventSpec};
use crate::automaton::{Automaton, AutomatonBuilder};
use crate::error::{Error, Result};
use crate::models::{ObservationSet, RESERVED_LABELS};

pub const FORMAT_VERSION: u32 = 1;

/// Automata supplied by users, whose labels may not be reserved.
const USER_KEYS: [&str; 3] = ["plant", "observations", "supervisor"];

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileDoc {
    format_version: u32,
    alphabet: AlphabetDoc,
    #[serde(default)]
    automata: BTreeMap<String, AutomatonDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AlphabetDoc {
    events: Vec<EventDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    commands: Option<Vec<CommandDoc>>,
}

fn yes() -> bool {
    true
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EventDoc {
    name: String,
    #[serde(default = "yes")]
    observable: bool,
    #[serde(default)]
    controllable: bool,
    #[serde(default)]
    compromised: bool,
    #[serde(default)]
    attackable: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CommandDoc {
    name: String,
    events: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AutomatonDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    events: Option<Vec<String>>,
    #[serde(default)]
    states: Vec<StateDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    initial: Option<String>,
    #[serde(default)]
    transitions: Vec<(String, String, String)>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateDoc {
    label: String,
    #[serde(default)]
    marked: bool,
}

/// An alphabet with named automata over it.
#[derive(Clone, Debug)]
pub struct ModelFile {
    pub alphabet: Arc<Alphabet>,
    pub automata: BTreeMap<String, Automaton>,
}

impl ModelFile {
    pub fn new(alphabet: Arc<Alphabet>) -> Self {
        ModelFile {
            alphabet,
            automata: BTreeMap::new(),
        }
    }

    /// Adds an automaton, rebinding it to this file's alphabet.
    pub fn insert(&mut self, name: impl Into<String>, a: &Automaton) -> Result<()> {
        self.automata.insert(name.into(), a.rebind(&self.alphabet)?);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<&Automaton> {
        self.automata
            .get(name)
            .ok_or_else(|| Error::model("automata", format!("missing automaton `{name}`")))
    }

    pub fn plant(&self) -> Result<&Automaton> {
        self.get("plant")
    }

    pub fn observations(&self) -> Result<ObservationSet> {
        ObservationSet::new(self.get("observations")?.clone())
    }

    pub fn from_json(text: &str, max_commands: Option<usize>) -> Result<Self> {
        let doc: FileDoc = serde_json::from_str(text).map_err(|e| Error::model("input", e.to_string()))?;
        if doc.format_version != FORMAT_VERSION {
            return Err(Error::model(
                "format_version",
                format!("unsupported version {} (expected {FORMAT_VERSION})", doc.format_version),
            ));
        }
        let specs = doc
            .alphabet
            .events
            .into_iter()
            .map(|e| EventSpec {
                name: e.name,
                observable: e.observable,
                controllable: e.controllable,
                compromised: e.compromised,
                attackable: e.attackable,
            })
            .collect();
        let commands = doc
            .alphabet
            .commands
            .map(|cs| cs.into_iter().map(|c| (c.name, c.events)).collect());
        let alphabet = Arc::new(
            Alphabet::new(specs, commands, max_commands).map_err(|e| match e {
                Error::TooManyCommands { .. } => e,
                e => Error::model("alphabet", e.to_string()),
            })?,
        );
        let mut automata = BTreeMap::new();
        for (name, a) in doc.automata {
            let built = automaton_from_doc(&alphabet, &name, a)?;
            automata.insert(name, built);
        }
        Ok(ModelFile { alphabet, automata })
    }

    /// Canonical serialization: explicit flags, commands and event sets;
    /// states in index order; transitions sorted by source state and event.
    pub fn to_json(&self) -> Result<String> {
        let al = &self.alphabet;
        let doc = FileDoc {
            format_version: FORMAT_VERSION,
            alphabet: AlphabetDoc {
                events: al
                    .specs()
                    .iter()
                    .map(|s| EventDoc {
                        name: s.name.clone(),
                        observable: s.observable,
                        controllable: s.controllable,
                        compromised: s.compromised,
                        attackable: s.attackable,
                    })
                    .collect(),
                commands: Some(
                    al.commands()
                        .iter()
                        .map(|c| CommandDoc {
                            name: c.name.clone(),
                            events: c.members.iter().map(|&e| al.name(e).to_string()).collect(),
                        })
                        .collect(),
                ),
            },
            automata: self
                .automata
                .iter()
                .map(|(k, a)| Ok((k.clone(), automaton_to_doc(k, a)?)))
                .collect::<Result<_>>()?,
        };
        let value = serde_json::to_value(&doc)?;
        let mut out = String::new();
        write_value(&mut out, &value, 0);
        out.push('\n');
        Ok(out)
    }

    pub fn load(path: &Path, max_commands: Option<usize>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        ModelFile::from_json(&text, max_commands).map_err(|e| match e {
            Error::Model { path: p, message } => Error::model(format!("{}: {p}", path.display()), message),
            other => other,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        super::write_atomic(path, self.to_json()?.as_bytes())
    }
}

fn automaton_from_doc(al: &Arc<Alphabet>, name: &str, doc: AutomatonDoc) -> Result<Automaton> {
    let at = |field: &str| format!("automata.{name}.{field}");
    let events: EventSet = match doc.events {
        Some(names) => names
            .iter()
            .enumerate()
            .map(|(i, n)| al.lookup(n).map_err(|e| Error::model(at(&format!("events[{i}]")), e.to_string())))
            .collect::<Result<_>>()?,
        None if name == "observations" => al.observable().clone(),
        None => al.sigma().clone(),
    };
    let Some(initial) = doc.initial.filter(|_| !doc.states.is_empty()) else {
        return Err(Error::model(format!("automata.{name}"), "no initial state"));
    };
    let check_reserved = USER_KEYS.contains(&name);
    let mut b = AutomatonBuilder::new(al, events);
    let mut index: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, s) in doc.states.iter().enumerate() {
        if check_reserved && RESERVED_LABELS.contains(&s.label.as_str()) {
            return Err(Error::model(at(&format!("states[{i}]")), format!("label `{}` is reserved", s.label)));
        }
        if index.insert(&s.label, b.add_state(s.label.clone(), s.marked)).is_some() {
            return Err(Error::model(at(&format!("states[{i}]")), format!("duplicate label `{}`", s.label)));
        }
    }
    let state = |field: String, l: &str| -> Result<usize> {
        index
            .get(l)
            .copied()
            .ok_or_else(|| Error::model(field, format!("unknown state `{l}`")))
    };
    let init = state(at("initial"), &initial)?;
    for (i, (src, ev, dst)) in doc.transitions.iter().enumerate() {
        let field = at(&format!("transitions[{i}]"));
        let p = state(field.clone(), src)?;
        let t = state(field.clone(), dst)?;
        let e = al.lookup(ev).map_err(|e| Error::model(field.clone(), e.to_string()))?;
        b.add_transition(p, e, t).map_err(|e| Error::model(field, e.to_string()))?;
    }
    b.build(init)
}

fn automaton_to_doc(name: &str, a: &Automaton) -> Result<AutomatonDoc> {
    let al = a.alphabet();
    let distinct: BTreeSet<&str> = a.labels().iter().map(String::as_str).collect();
    if distinct.len() != a.num_states() {
        return Err(Error::model(format!("automata.{name}"), "state labels are not unique"));
    }
    let mut transitions = Vec::with_capacity(a.num_transitions());
    for q in a.states() {
        for (e, t) in a.transitions(q) {
            transitions.push((a.label(q).to_string(), al.name(e).to_string(), a.label(t).to_string()));
        }
    }
    Ok(AutomatonDoc {
        events: Some(a.events().iter().map(|&e| al.name(e).to_string()).collect()),
        states: a
            .states()
            .map(|q| StateDoc {
                label: a.label(q).to_string(),
                marked: a.is_marked(q),
            })
            .collect(),
        initial: Some(a.label(a.initial()).to_string()),
        transitions,
    })
}

fn is_scalar(v: &Value) -> bool {
    !matches!(v, Value::Array(_) | Value::Object(_))
}

/// Pretty printer that keeps containers of scalars on one line.
fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = " ".repeat(indent + 2);
    match v {
        Value::Array(xs) if xs.iter().all(is_scalar) => {
            let items: Vec<String> = xs.iter().map(Value::to_string).collect();
            out.push('[');
            out.push_str(&items.join(", "));
            out.push(']');
        }
        Value::Object(m) if m.values().all(is_scalar) => {
            let items: Vec<String> = m.iter().map(|(k, v)| format!("{}: {v}", Value::from(k.as_str()))).collect();
            out.push('{');
            out.push_str(&items.join(", "));
            out.push('}');
        }
        Value::Array(xs) => {
            out.push_str("[\n");
            for (i, x) in xs.iter().enumerate() {
                out.push_str(&pad);
                write_value(out, x, indent + 2);
                out.push_str(if i + 1 < xs.len() { ",\n" } else { "\n" });
            }
            out.push_str(&" ".repeat(indent));
            out.push(']');
        }
        Value::Object(m) => {
            out.push_str("{\n");
            for (i, (k, x)) in m.iter().enumerate() {
                out.push_str(&pad);
                out.push_str(&Value::from(k.as_str()).to_string());
                out.push_str(": ");
                write_value(out, x, indent + 2);
                out.push_str(if i + 1 < m.len() { ",\n" } else { "\n" });
            }
            out.push_str(&" ".repeat(indent));
            out.push('}');
        }
        scalar => out.push_str(&scalar.to_string()),
    }
}
