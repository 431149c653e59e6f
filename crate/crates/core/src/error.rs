use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Why a feasibility solve stopped without a certificate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum InfeasibleReason {
    /// The barrier lower bound on the optimal worst eigenvalue is positive.
    Certified,
    /// The central path converged above the requested margin.
    Converged,
    /// The Newton iteration cap was reached.
    MaxIters,
}

impl std::fmt::Display for InfeasibleReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            InfeasibleReason::Certified => "certified infeasible",
            InfeasibleReason::Converged => "converged above margin",
            InfeasibleReason::MaxIters => "iteration cap reached",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    Dim {
        context: String,
        expected: String,
        found: String,
    },

    #[error("singular block: {0}")]
    SingularBlock(String),

    #[error("fault realization out of range: mode {mode}, channel {channel}, value {value} not in [{lo}, {hi}] at (i, j) = ({i}, {j})")]
    FaultOutOfRange {
        mode: usize,
        channel: usize,
        value: f64,
        lo: f64,
        hi: f64,
        i: i64,
        j: i64,
    },

    #[error("average dwell time violated on ({z}, {d}): {count} switches > {bound}")]
    DwellTimeViolation {
        z: i64,
        d: i64,
        count: usize,
        bound: f64,
    },

    #[error("invalid fault bounds: {0}")]
    InvalidFaultBounds(String),

    #[error("grid underflow: {0}")]
    GridUnderflow(String),

    #[error("numerical blowup at (i, j) = ({i}, {j}): |x| = {value:e}")]
    NumericalBlowup { i: i64, j: i64, value: f64 },

    #[error("delay bounds out of order: {0}")]
    DelayOrder(String),

    #[error("incomplete model: {0}")]
    IncompleteModel(String),

    #[error("alpha must lie in (0, 1), got {0}")]
    AlphaRange(f64),

    #[error("envelope undefined: tau_a = {tau_a} must exceed tau_a* = {tau_star}")]
    EnvelopeUndefined { tau_a: f64, tau_star: f64 },

    #[error("config error at {path}: {reason}")]
    Config { path: String, reason: String },

    #[error("infeasible ({reason}): best worst eigenvalue t = {best_t:e} after {iterations} iterations")]
    Infeasible {
        reason: InfeasibleReason,
        best_t: f64,
        iterations: usize,
    },

    #[error("solver breakdown: {0}")]
    SolverBreakdown(String),

    #[error("eigenvalue iteration did not converge")]
    EigenNoConvergence,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn dim(context: impl Into<String>, expected: impl ToString, found: impl ToString) -> Self {
        Error::Dim {
            context: context.into(),
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }

    pub(crate) fn config(path: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            reason: reason.into(),
        }
    }

    /// Process exit code for this error class: 1 verification failure,
    /// 2 input error, 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Infeasible { .. } | Error::DwellTimeViolation { .. } | Error::EnvelopeUndefined { .. } => 1,
            Error::InvalidMatrix(_)
            | Error::Dim { .. }
            | Error::FaultOutOfRange { .. }
            | Error::InvalidFaultBounds(_)
            | Error::DelayOrder(_)
            | Error::IncompleteModel(_)
            | Error::AlphaRange(_)
            | Error::Config { .. }
            | Error::Io(_)
            | Error::Json(_) => 2,
            Error::SingularBlock(_)
            | Error::GridUnderflow(_)
            | Error::NumericalBlowup { .. }
            | Error::SolverBreakdown(_)
            | Error::EigenNoConvergence => 3,
        }
    }
}
