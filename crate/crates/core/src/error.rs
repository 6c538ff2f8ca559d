use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("no centers")]
    NoCenters,
    #[error("point id {id} out of range (n = {n})")]
    InvalidPoint { id: usize, n: usize },
    #[error("duplicate center id {0}")]
    DuplicateCenter(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("group {group} out of range (m = {m})")]
    InvalidGroup { group: usize, m: usize },
    #[error("empty dataset")]
    EmptyDataset,
    #[error("non-finite coordinate at point {0}")]
    NonFinite(usize),
    /// A violated bounds/instance invariant; the message names it
    /// (e.g. `l_2 > u_2`, `lower bounds exceed k`).
    #[error("{0}")]
    Infeasible(String),
    #[error("infeasible proportional bounds")]
    InfeasibleProportional,
    #[error("k = {k} exceeds n = {n}")]
    KTooLarge { k: usize, n: usize },
    #[error("k must be positive")]
    ZeroK,
    #[error("radius too large: balls around the shifted centers overlap")]
    RadiusTooLarge,
    #[error("{centers} centers exceed k = {k}")]
    TooManyCenters { centers: usize, k: usize },
    #[error("oracle scale exceeded")]
    OracleScale,
    #[error("degenerate prefix: duplicate points among the first k+1 stream points")]
    DegeneratePrefix,
    #[error("epsilon {0} outside (0, 1]")]
    Epsilon(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    /// Whether the error reports an instance with no fair solution
    /// (as opposed to malformed input).
    pub fn is_infeasible(&self) -> bool {
        matches!(
            self,
            Error::Infeasible(_) | Error::InfeasibleProportional | Error::KTooLarge { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
