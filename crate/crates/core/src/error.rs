use thiserror::Error;

/// Errors raised while building or manipulating models.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown event `{0}`")]
    UnknownEvent(String),

    #[error("duplicate name `{0}`")]
    DuplicateName(String),

    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),

    #[error("invalid command `{name}`: {reason}")]
    InvalidCommand { name: String, reason: String },

    #[error("{count} controllable events would generate 2^{count} commands, above the limit of {limit}")]
    TooManyCommands { count: usize, limit: usize },

    #[error("state {0} does not exist")]
    UnknownState(usize),

    #[error("event `{0}` is not part of the automaton's event set")]
    EventNotInAutomaton(String),

    #[error("nondeterministic transition from state {state} on `{event}`")]
    Nondeterministic { state: usize, event: String },

    #[error("automata are defined over different alphabets")]
    AlphabetMismatch,

    #[error("state label `{0}` is already in use")]
    LabelCollision(String),

    #[error("invalid supervisor: {0}")]
    InvalidSupervisor(String),

    #[error("invalid observation automaton: {0}")]
    InvalidObservations(String),

    #[error("invalid bipartite structure: {0}")]
    InvalidBipartite(String),

    #[error("control constraint violation: {0}")]
    ConstraintViolation(String),

    #[error("{path}: {message}")]
    Model { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn model(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Model {
            path: path.into(),
            message: message.into(),
        }
    }
}
