//! Error types shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("qubit index {index} out of range for {qubit_count} qubits")]
    QubitIndexOutOfRange { index: usize, qubit_count: usize },

    #[error("qubit count {qubit_count} outside supported range {min}..={max}")]
    QubitCountOutOfRange {
        qubit_count: usize,
        min: usize,
        max: usize,
    },

    #[error("axis index {index} not in 0..3")]
    AxisOutOfRange { index: usize },

    #[error("input is not Hermitian: max |H - H^adjoint| = {deviation:.3e}")]
    NotHermitian { deviation: f64 },

    #[error("trace is {trace:.17e}, expected 1 within {tol:.1e}")]
    TraceNotOne { trace: f64, tol: f64 },

    #[error("eigenvalue {eigenvalue:.3e} below the positivity tolerance {tol:.1e}")]
    NegativeEigenvalue { eigenvalue: f64, tol: f64 },

    #[error("eigensolver did not converge in {sweeps} sweeps (off-diagonal norm {off:.3e})")]
    EigenNonConvergence { sweeps: usize, off: f64 },

    #[error(
        "rank-deficient state: smallest eigenvalue {eigenvalue:.3e} is below \
         {tol:.1e} relative to the largest"
    )]
    RankDeficient { eigenvalue: f64, tol: f64 },

    #[error("support violation: weight {weight:.3e} lies outside the reference support")]
    SupportViolation { weight: f64 },

    #[error("imaginary residue {residue:.3e} exceeds the limit {limit:.1e}")]
    ImaginaryResidue { residue: f64, limit: f64 },

    #[error("missing label on observable at position {index}")]
    MissingLabel { index: usize },

    #[error("duplicate observable label `{label}`")]
    DuplicateLabel { label: String },

    #[error(
        "target {value} for `{label}` is outside the open spectral interval \
         ({lo}, {hi}); no state can attain it"
    )]
    OutsideSpectrum {
        label: String,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("infeasible constraints: {reason}")]
    Infeasible { reason: String },

    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    MaxIterations { iterations: usize, residual: f64 },

    #[error("{name} = {value} outside bounds [{lo}, {hi}]")]
    OutOfBounds {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("internal consistency check failed: {what} = {value:.3e} exceeds {limit:.1e}")]
    InternalConsistency {
        what: &'static str,
        value: f64,
        limit: f64,
    },

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Wraps the error with the name of the pipeline stage that produced it.
    pub fn at_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// True if this error (or the error it wraps) reports infeasible constraints.
    pub fn is_infeasible(&self) -> bool {
        match self {
            Error::Infeasible { .. } | Error::OutsideSpectrum { .. } => true,
            Error::Stage { source, .. } => source.is_infeasible(),
            _ => false,
        }
    }

    /// True if this error (or the error it wraps) reports a rank-deficient state.
    pub fn is_rank_deficient(&self) -> bool {
        match self {
            Error::RankDeficient { .. } => true,
            Error::Stage { source, .. } => source.is_rank_deficient(),
            _ => false,
        }
    }
}
