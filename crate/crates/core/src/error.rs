use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid frequency grid: {0}")]
    InvalidGrid(String),

    #[error("invalid port label {0:?}")]
    InvalidLabel(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("frequency {freq_hz} Hz lies outside the data span [{min_hz}, {max_hz}] Hz")]
    Range { freq_hz: f64, min_hz: f64, max_hz: f64 },

    #[error("invalid model parameter {name} = {value}: {reason}")]
    Param { name: String, value: f64, reason: String },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("duplicate instance name {0:?}")]
    DuplicateName(String),

    #[error("unknown instance {0:?}")]
    UnknownInstance(String),

    #[error("unknown pin {0:?}")]
    UnknownPin(String),

    #[error("duplicate pin {pin:?} on instance {instance:?}")]
    DuplicatePin { instance: String, pin: String },

    #[error("expected {expected} names, got {got}")]
    ArityMismatch { expected: usize, got: usize },

    #[error("unknown endpoint {0}")]
    UnknownEndpoint(String),

    #[error("pin {0} is already connected")]
    AlreadyConnected(String),

    #[error("cannot connect pin {0} to itself")]
    SelfPin(String),

    #[error("subcircuit {0:?} contains itself")]
    Cycle(String),

    #[error("singular connection{}: |D| = {denominator:e} at {freq_hz} Hz", connection.as_ref().map(|c| format!(" {c}")).unwrap_or_default())]
    SingularConnection { connection: Option<String>, freq_hz: f64, denominator: f64 },

    #[error("port index {index} out of range for {n_ports}-port network")]
    Index { index: usize, n_ports: usize },

    #[error("frequency grids differ")]
    GridMismatch,

    #[error("singular system at {freq_hz} Hz")]
    SingularSystem { freq_hz: f64 },

    #[error("invalid sweep: {0}")]
    Sweep(String),

    #[error("instance {instance}: {source}")]
    Instance { instance: String, source: Box<Error> },

    #[error("{0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
