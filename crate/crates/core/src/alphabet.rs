//! Event universe: plant events with their attributes, relabelled copies of
//! compromised events, control commands and the `stop` event.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};

/// Name of the event that closes an attack round.
pub const STOP: &str = "stop";

/// Suffix appended to a compromised event to form its relabelled copy.
pub const RELABEL_SUFFIX: &str = "#";

/// Default cap on automatically generated commands (2^12).
pub const DEFAULT_MAX_COMMANDS: usize = 1 << 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EventId(u32);

impl EventId {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub(crate) fn new(index: usize) -> Self {
        EventId(index as u32)
    }
}

pub type EventSet = BTreeSet<EventId>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EventKind {
    Plant,
    /// Relabelled copy of the given plant event.
    Relabelled(EventId),
    Command,
    Stop,
}

/// Attributes of a plant event as supplied by the caller.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EventSpec {
    pub name: String,
    pub observable: bool,
    pub controllable: bool,
    /// Sensor readings of this event may be deleted or replaced.
    pub compromised: bool,
    /// The actuator of this event may be enabled by the attacker.
    pub attackable: bool,
}

impl EventSpec {
    /// An observable, uncontrollable, unattacked event.
    pub fn new(name: impl Into<String>) -> Self {
        EventSpec {
            name: name.into(),
            observable: true,
            controllable: false,
            compromised: false,
            attackable: false,
        }
    }

    pub fn observable(mut self, yes: bool) -> Self {
        self.observable = yes;
        self
    }

    pub fn controllable(mut self, yes: bool) -> Self {
        self.controllable = yes;
        self
    }

    pub fn compromised(mut self, yes: bool) -> Self {
        self.compromised = yes;
        self
    }

    pub fn attackable(mut self, yes: bool) -> Self {
        self.attackable = yes;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct EventEntry {
    name: String,
    kind: EventKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Command {
    pub id: EventId,
    pub name: String,
    pub members: EventSet,
}

/// The complete event universe shared by every automaton of a model.
///
/// Ids are laid out as plant events, then relabelled copies (in plant
/// order), then commands, then `stop`.
#[derive(Clone, Debug)]
pub struct Alphabet {
    entries: Vec<EventEntry>,
    specs: Vec<EventSpec>,
    by_name: HashMap<String, EventId>,
    relabel: Vec<Option<EventId>>,
    commands: Vec<Command>,
    stop: EventId,
    sigma: EventSet,
    observable: EventSet,
    controllable: EventSet,
    compromised: EventSet,
    attackable: EventSet,
    relabelled: EventSet,
    gamma: EventSet,
}

impl PartialEq for Alphabet {
    fn eq(&self, other: &Self) -> bool {
        self.specs == other.specs && self.commands == other.commands
    }
}

impl Eq for Alphabet {}

impl Alphabet {
    /// Builds an alphabet. With `commands == None` the full command set
    /// `{γ : Σ_uc ⊆ γ ⊆ Σ}` is generated, subject to `max_commands`
    /// (defaults to [`DEFAULT_MAX_COMMANDS`]).
    pub fn new(
        events: Vec<EventSpec>,
        commands: Option<Vec<(String, Vec<String>)>>,
        max_commands: Option<usize>,
    ) -> Result<Self> {
        let mut by_name = HashMap::new();
        for spec in &events {
            validate_plant_name(&spec.name)?;
            if spec.compromised && !spec.observable {
                return Err(Error::InvalidAlphabet(format!(
                    "compromised event `{}` must be observable",
                    spec.name
                )));
            }
            if spec.attackable && !spec.controllable {
                return Err(Error::InvalidAlphabet(format!(
                    "attackable event `{}` must be controllable",
                    spec.name
                )));
            }
            if by_name
                .insert(spec.name.clone(), EventId::new(by_name.len()))
                .is_some()
            {
                return Err(Error::DuplicateName(spec.name.clone()));
            }
        }
        if events.is_empty() {
            return Err(Error::InvalidAlphabet("no plant events".into()));
        }

        let mut entries: Vec<EventEntry> = events
            .iter()
            .map(|s| EventEntry {
                name: s.name.clone(),
                kind: EventKind::Plant,
            })
            .collect();
        let mut relabel = vec![None; events.len()];
        for (i, spec) in events.iter().enumerate() {
            if spec.compromised {
                let id = EventId::new(entries.len());
                let name = format!("{}{}", spec.name, RELABEL_SUFFIX);
                by_name.insert(name.clone(), id);
                entries.push(EventEntry {
                    name,
                    kind: EventKind::Relabelled(EventId::new(i)),
                });
                relabel[i] = Some(id);
            }
        }

        let uncontrollable: Vec<usize> = (0..events.len())
            .filter(|&i| !events[i].controllable)
            .collect();
        let controllable: Vec<usize> = (0..events.len())
            .filter(|&i| events[i].controllable)
            .collect();

        let defs: Vec<(String, EventSet)> = match commands {
            Some(list) => {
                if list.is_empty() {
                    return Err(Error::InvalidAlphabet("empty command set".into()));
                }
                let mut out = Vec::with_capacity(list.len());
                for (name, members) in list {
                    let mut set = EventSet::new();
                    for m in &members {
                        match by_name.get(m) {
                            Some(&id) if id.index() < events.len() => {
                                set.insert(id);
                            }
                            _ => {
                                return Err(Error::InvalidCommand {
                                    name,
                                    reason: format!("`{m}` is not a plant event"),
                                })
                            }
                        }
                    }
                    if let Some(&missing) = uncontrollable
                        .iter()
                        .find(|&&i| !set.contains(&EventId::new(i)))
                    {
                        return Err(Error::InvalidCommand {
                            name,
                            reason: format!(
                                "uncontrollable event `{}` is missing",
                                events[missing].name
                            ),
                        });
                    }
                    out.push((name, set));
                }
                out
            }
            None => {
                let limit = max_commands.unwrap_or(DEFAULT_MAX_COMMANDS);
                let n = controllable.len();
                if n >= usize::BITS as usize - 1 || (1usize << n) > limit {
                    return Err(Error::TooManyCommands { count: n, limit });
                }
                (0..1usize << n)
                    .map(|mask| {
                        let mut set: EventSet =
                            uncontrollable.iter().map(|&i| EventId::new(i)).collect();
                        for (bit, &i) in controllable.iter().enumerate() {
                            if mask & (1 << bit) != 0 {
                                set.insert(EventId::new(i));
                            }
                        }
                        (format!("v{}", mask + 1), set)
                    })
                    .collect()
            }
        };

        let mut seen_sets = BTreeSet::new();
        let mut cmds = Vec::with_capacity(defs.len());
        for (name, members) in defs {
            if name.is_empty() || name == STOP || name.ends_with(RELABEL_SUFFIX) {
                return Err(Error::InvalidCommand {
                    name,
                    reason: "reserved or empty name".into(),
                });
            }
            if !seen_sets.insert(members.clone()) {
                return Err(Error::InvalidCommand {
                    name,
                    reason: "duplicate event set".into(),
                });
            }
            let id = EventId::new(entries.len());
            if by_name.insert(name.clone(), id).is_some() {
                return Err(Error::DuplicateName(name));
            }
            entries.push(EventEntry {
                name: name.clone(),
                kind: EventKind::Command,
            });
            cmds.push(Command { id, name, members });
        }

        let stop = EventId::new(entries.len());
        by_name.insert(STOP.to_string(), stop);
        entries.push(EventEntry {
            name: STOP.to_string(),
            kind: EventKind::Stop,
        });

        let pick = |f: &dyn Fn(&EventSpec) -> bool| -> EventSet {
            (0..events.len())
                .filter(|&i| f(&events[i]))
                .map(EventId::new)
                .collect()
        };
        Ok(Alphabet {
            sigma: pick(&|_| true),
            observable: pick(&|s| s.observable),
            controllable: pick(&|s| s.controllable),
            compromised: pick(&|s| s.compromised),
            attackable: pick(&|s| s.attackable),
            relabelled: relabel.iter().flatten().copied().collect(),
            gamma: cmds.iter().map(|c| c.id).collect(),
            entries,
            specs: events,
            by_name,
            relabel,
            commands: cmds,
            stop,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = EventId> {
        (0..self.entries.len()).map(EventId::new)
    }

    pub fn name(&self, e: EventId) -> &str {
        &self.entries[e.index()].name
    }

    pub fn kind(&self, e: EventId) -> EventKind {
        self.entries[e.index()].kind
    }

    pub fn id(&self, name: &str) -> Option<EventId> {
        self.by_name.get(name).copied()
    }

    pub fn lookup(&self, name: &str) -> Result<EventId> {
        self.id(name)
            .ok_or_else(|| Error::UnknownEvent(name.to_string()))
    }

    pub fn specs(&self) -> &[EventSpec] {
        &self.specs
    }

    /// Attributes of a plant event; `None` for commands, copies and `stop`.
    pub fn spec(&self, e: EventId) -> Option<&EventSpec> {
        self.specs.get(e.index())
    }

    pub fn names(&self, events: &[EventId]) -> Vec<String> {
        events.iter().map(|&e| self.name(e).to_string()).collect()
    }

    /// Σ.
    pub fn sigma(&self) -> &EventSet {
        &self.sigma
    }

    /// Σ_o.
    pub fn observable(&self) -> &EventSet {
        &self.observable
    }

    /// Σ_uo.
    pub fn unobservable(&self) -> EventSet {
        self.sigma.difference(&self.observable).copied().collect()
    }

    /// Σ_c.
    pub fn controllable(&self) -> &EventSet {
        &self.controllable
    }

    /// Σ_uc.
    pub fn uncontrollable(&self) -> EventSet {
        self.sigma.difference(&self.controllable).copied().collect()
    }

    /// Σ_s,a.
    pub fn compromised(&self) -> &EventSet {
        &self.compromised
    }

    /// Σ_c,a.
    pub fn attackable(&self) -> &EventSet {
        &self.attackable
    }

    /// Σ_s,a^#.
    pub fn relabelled(&self) -> &EventSet {
        &self.relabelled
    }

    /// Γ.
    pub fn gamma(&self) -> &EventSet {
        &self.gamma
    }

    pub fn stop(&self) -> EventId {
        self.stop
    }

    pub fn commands(&self) -> &[Command] {
        &self.commands
    }

    pub fn is_plant(&self, e: EventId) -> bool {
        e.index() < self.specs.len()
    }

    pub fn is_command(&self, e: EventId) -> bool {
        self.gamma.contains(&e)
    }

    pub fn is_observable(&self, e: EventId) -> bool {
        self.observable.contains(&e)
    }

    pub fn is_controllable(&self, e: EventId) -> bool {
        self.controllable.contains(&e)
    }

    /// σ ↦ σ^# for compromised σ.
    pub fn relabel(&self, e: EventId) -> Option<EventId> {
        self.relabel.get(e.index()).copied().flatten()
    }

    /// σ^# ↦ σ.
    pub fn original(&self, e: EventId) -> Option<EventId> {
        match self.kind(e) {
            EventKind::Relabelled(o) => Some(o),
            _ => None,
        }
    }

    /// Member set of a command event.
    pub fn members(&self, gamma: EventId) -> Option<&EventSet> {
        self.commands
            .iter()
            .find(|c| c.id == gamma)
            .map(|c| &c.members)
    }

    /// The command whose member set equals `set`, if any.
    pub fn command_for(&self, set: &EventSet) -> Option<EventId> {
        self.commands
            .iter()
            .find(|c| &c.members == set)
            .map(|c| c.id)
    }

    /// The command `Σ_uc`, when present in Γ.
    pub fn uncontrollable_command(&self) -> Option<EventId> {
        self.command_for(&self.uncontrollable())
    }

    /// Whether Σ_c ⊆ Σ_o, the standing assumption of strict mode.
    pub fn controllable_observed(&self) -> bool {
        self.controllable.is_subset(&self.observable)
    }

    /// Σ ∪ Γ.
    pub fn plant_and_commands(&self) -> EventSet {
        self.sigma.union(&self.gamma).copied().collect()
    }

    /// Σ ∪ Σ_s,a^# ∪ Γ ∪ {stop}, the attacker's alphabet.
    pub fn attacker_events(&self) -> EventSet {
        self.ids().collect()
    }

    /// Whether the full command set `{γ : Σ_uc ⊆ γ ⊆ Σ}` is present.
    pub fn has_full_gamma(&self) -> bool {
        let n = self.controllable.len();
        n < usize::BITS as usize - 1 && self.commands.len() == 1usize << n
    }

    /// A copy with different attack attributes and the same commands.
    pub fn with_attack(&self, compromised: &[&str], attackable: &[&str]) -> Result<Self> {
        for n in compromised.iter().chain(attackable) {
            if !self.specs.iter().any(|s| s.name == *n) {
                return Err(Error::UnknownEvent(n.to_string()));
            }
        }
        let specs = self
            .specs
            .iter()
            .map(|s| {
                let mut s = s.clone();
                s.compromised = compromised.contains(&s.name.as_str());
                s.attackable = attackable.contains(&s.name.as_str());
                s
            })
            .collect();
        let commands = self
            .commands
            .iter()
            .map(|c| {
                (
                    c.name.clone(),
                    c.members.iter().map(|&e| self.name(e).to_string()).collect(),
                )
            })
            .collect();
        Alphabet::new(specs, Some(commands), None)
    }

    pub fn display_set(&self, set: &EventSet) -> String {
        let names: Vec<&str> = set.iter().map(|&e| self.name(e)).collect();
        format!("{{{}}}", names.join(","))
    }
}

fn validate_plant_name(name: &str) -> Result<()> {
    if name.is_empty() {
        return Err(Error::InvalidAlphabet("empty event name".into()));
    }
    if name == STOP || name.ends_with(RELABEL_SUFFIX) {
        return Err(Error::InvalidAlphabet(format!(
            "`{name}` is reserved for attack events"
        )));
    }
    if name.chars().any(|c| c.is_whitespace() || c == '"') {
        return Err(Error::InvalidAlphabet(format!(
            "event name `{name}` contains whitespace or quotes"
        )));
    }
    Ok(())
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.entries.iter().map(|e| e.name.as_str()).collect();
        write!(f, "{{{}}}", names.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tank() -> Alphabet {
        let events = vec![
            EventSpec::new("L").compromised(true),
            EventSpec::new("H").compromised(true),
            EventSpec::new("EL").compromised(true),
            EventSpec::new("EH").compromised(true),
            EventSpec::new("close").controllable(true).attackable(true),
            EventSpec::new("open").controllable(true).attackable(true),
        ];
        Alphabet::new(events, None, None).unwrap()
    }

    #[test]
    fn full_gamma_has_four_commands() {
        let a = tank();
        assert_eq!(a.gamma().len(), 4);
        let v1 = a.members(a.lookup("v1").unwrap()).unwrap();
        assert_eq!(a.display_set(v1), "{L,H,EL,EH}");
        let v4 = a.members(a.lookup("v4").unwrap()).unwrap();
        assert_eq!(v4.len(), 6);
        assert_eq!(a.uncontrollable_command(), a.id("v1"));
    }

    #[test]
    fn relabelled_copies_exist_only_for_compromised() {
        let a = tank();
        assert_eq!(a.relabelled().len(), 4);
        let l = a.lookup("L").unwrap();
        let lh = a.lookup("L#").unwrap();
        assert_eq!(a.relabel(l), Some(lh));
        assert_eq!(a.original(lh), Some(l));
        assert_eq!(a.relabel(a.lookup("close").unwrap()), None);
    }

    #[test]
    fn rejects_reserved_names() {
        assert!(Alphabet::new(vec![EventSpec::new("stop")], None, None).is_err());
        assert!(Alphabet::new(vec![EventSpec::new("a#")], None, None).is_err());
    }

    #[test]
    fn rejects_commands_missing_uncontrollables() {
        let events = vec![EventSpec::new("a"), EventSpec::new("b").controllable(true)];
        let err = Alphabet::new(events, Some(vec![("g".into(), vec!["b".into()])]), None);
        assert!(matches!(err, Err(Error::InvalidCommand { .. })));
    }

    #[test]
    fn large_gamma_guard() {
        let events: Vec<_> = (0..13)
            .map(|i| EventSpec::new(format!("c{i}")).controllable(true))
            .collect();
        assert!(matches!(
            Alphabet::new(events.clone(), None, None),
            Err(Error::TooManyCommands { count: 13, .. })
        ));
        assert_eq!(
            Alphabet::new(events, None, Some(1 << 13)).unwrap().gamma().len(),
            1 << 13
        );
    }
}
