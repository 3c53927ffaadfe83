use thiserror::Error;

/// Errors raised by the library. Each variant maps onto one of the CLI exit
/// classes through [`Error::exit_code`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("edge inside part {part}: {u}-{v}")]
    EdgeInsidePart { u: usize, v: usize, part: usize },

    #[error("vertex {0} appears in more than one part")]
    OverlappingParts(usize),

    #[error("vertex {vertex} is out of range for {n} vertices")]
    DanglingVertex { vertex: usize, n: usize },

    #[error("vertex {0} is not covered by any part")]
    UncoveredVertex(usize),

    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),

    #[error("part {0} is empty")]
    EmptyPart(usize),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("infeasible split: {0}")]
    InfeasibleSplit(String),

    #[error("sequence has {len} vertices but at least {r} are required")]
    TooShort { len: usize, r: usize },

    #[error("not properly ordered: increasing run starting at position {index} has invalid length")]
    NotProperlyOrdered { index: usize },

    #[error("trim template: {0}")]
    Trim(String),

    #[error("solver precondition {condition} failed: {detail}")]
    SolverPrecondition { condition: &'static str, detail: String },

    #[error("{stage} exhausted after {attempts} attempts: {detail}")]
    Exhausted {
        stage: &'static str,
        attempts: usize,
        detail: String,
    },

    #[error("scale-infeasible: {0}")]
    ScaleInfeasible(String),

    #[error("coverage shortfall: {0}")]
    CoverageShortfall(String),

    #[error("matching failure: {0}")]
    Matching(String),

    #[error("ill-terminated walk: {0}")]
    IllTerminated(String),

    #[error("connector exhausted after {samples} samples ({walks} connecting walks)")]
    ConnectorExhausted { samples: usize, walks: u128 },

    #[error("walk count overflowed u128")]
    CountOverflow,

    #[error("search budget of {0} nodes exceeded")]
    Budget(u64),

    #[error("stage {stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("no Hamiltonian (r-1)-cycle: {0}")]
    NoCycle(String),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn stage(stage: &'static str, source: Error) -> Self {
        Error::Stage {
            stage,
            source: Box::new(source),
        }
    }

    /// Process exit code: 2 parse, 3 validation, 4 stage failure, 5 budget.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) | Error::Io(_) => 2,
            Error::EdgeInsidePart { .. }
            | Error::OverlappingParts(_)
            | Error::DanglingVertex { .. }
            | Error::UncoveredVertex(_)
            | Error::SelfLoop(_)
            | Error::EmptyPart(_)
            | Error::Precondition(_)
            | Error::TooShort { .. }
            | Error::IllTerminated(_) => 3,
            Error::Budget(_) => 5,
            Error::Stage { source, .. } => match source.exit_code() {
                2 => 2,
                5 => 5,
                _ => 4,
            },
            _ => 4,
        }
    }
}
