use lru_lp::LpError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("arc ({from}) -> ({to}) joins edges that do not share exactly one vertex")]
    NonAdjacentArc { from: String, to: String },
    #[error("precedence graph has a cycle through edge {0}")]
    CyclicPrecedence(String),
    #[error("non-positive or non-finite {what} on {element}")]
    NonPositiveParameter { what: &'static str, element: String },
    #[error("duplicate edge {0}")]
    DuplicateEdge(String),
    #[error("self-loop on vertex {0}")]
    SelfLoop(String),
    #[error("duplicate vertex id {0}")]
    DuplicateVertex(String),
    #[error("unknown vertex {0}")]
    UnknownVertex(String),
    #[error("arc refers to missing edge {0}")]
    UnknownEdge(String),
    #[error("duplicate arc ({from}) -> ({to})")]
    DuplicateArc { from: String, to: String },
    #[error("an LRU must contain at least one vertex")]
    EmptyLru,
    #[error("not a partition: {0}")]
    NotAPartition(String),
    #[error("instance too large: {0}")]
    InstanceTooLarge(String),
    #[error("infeasible generator configuration: {0}")]
    InfeasibleConfig(String),
    #[error("scale factor must be positive and finite, got {0}")]
    NonPositiveFactor(f64),
    #[error("final master solution is not integral (max fractionality {0:e})")]
    IntegralityViolation(f64),
    #[error("cycle member is not in the support of the solution")]
    NotInSupport,
    #[error("not an LRU cycle: {0}")]
    NotACycle(String),
    #[error("failure sets do not partition the vertices: {0}")]
    FailureSetsNotPartition(String),
    #[error("failure set is not contained in its replacement set")]
    FailureOutsideReplacement,
    #[error("unknown fixture {0}")]
    UnknownFixture(String),
    #[error("search limit reached: {0}")]
    LimitReached(String),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Whether the error stems from invalid input rather than a solver limit
    /// or an internal failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::NonAdjacentArc { .. }
                | Error::CyclicPrecedence(_)
                | Error::NonPositiveParameter { .. }
                | Error::DuplicateEdge(_)
                | Error::SelfLoop(_)
                | Error::DuplicateVertex(_)
                | Error::UnknownVertex(_)
                | Error::UnknownEdge(_)
                | Error::DuplicateArc { .. }
                | Error::EmptyLru
                | Error::NotAPartition(_)
                | Error::InfeasibleConfig(_)
                | Error::NonPositiveFactor(_)
                | Error::FailureSetsNotPartition(_)
                | Error::FailureOutsideReplacement
                | Error::UnknownFixture(_)
                | Error::NotACycle(_)
                | Error::NotInSupport
                | Error::Json(_)
        )
    }

    pub fn is_limit(&self) -> bool {
        matches!(self, Error::LimitReached(_) | Error::InstanceTooLarge(_) | Error::Lp(LpError::IterationLimit))
    }
}
