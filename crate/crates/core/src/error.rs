use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit-count mismatch: {left} vs {right}")]
    QubitMismatch { left: usize, right: usize },

    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    QubitOutOfRange { index: usize, n_qubits: usize },

    #[error("vector length {len} does not match 2^{n_qubits}")]
    LengthMismatch { len: usize, n_qubits: usize },

    #[error("{n_qubits} qubits exceeds the configured maximum of {max}")]
    DimensionOverflow { n_qubits: usize, max: usize },

    #[error("cannot parse {what}: {detail}")]
    Parse { what: &'static str, detail: String },

    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("invalid loop specification: {0}")]
    InvalidLoop(String),

    #[error("no graph-equivalent form found: {0}")]
    NoGraphForm(String),

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("invalid measurement setup: {0}")]
    InvalidSetup(String),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("ground state is numerically degenerate at g = {g}: gap {gap:.3e}")]
    Degenerate { g: f64, gap: f64 },

    #[error("outcome probabilities sum to {sum} (deficiency beyond {bound:e})")]
    ProbabilityDeficit { sum: f64, bound: f64 },

    #[error("preferred set is empty")]
    EmptyPreferredSet,

    #[error("{what} limit exceeded: {size} > {limit}")]
    LimitExceeded { what: &'static str, size: usize, limit: usize },

    #[error("witness condition ({condition}) violated: {detail}")]
    WitnessCondition { condition: char, detail: String },

    #[error("witness decomposition residual {residual:.3e} exceeds {tolerance:e}")]
    DecompositionResidual { residual: f64, tolerance: f64 },

    #[error("star-graph check failed: {0}")]
    StarCheck(String),

    #[error("integration failure at t = {t}: {detail}")]
    Integration { t: f64, detail: String },

    #[error("no trough found in the series")]
    NoTrough,

    #[error("reference level {level} is never crossed")]
    LevelNotCrossed { level: f64 },

    #[error("derivative peak sits at the grid boundary (g = {g}); widen the grid")]
    PeakAtBoundary { g: f64 },

    #[error("scaling fit: {0}")]
    Fit(String),

    #[error("unknown bound estimator `{0}`")]
    UnknownEstimator(String),

    #[error("hierarchy violated at g = {g}: {detail}")]
    Hierarchy { g: f64, detail: String },

    #[error("at g = {g}: {source}")]
    AtField {
        g: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn at_field(self, g: f64) -> Self {
        Error::AtField { g, source: Box::new(self) }
    }

    pub(crate) fn parse(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Parse { what, detail: detail.into() }
    }
}
