//! State estimation for quantum tomography with an explicit prior bias.
//!
//! Given an anticipated state σ, sample means of a (not necessarily
//! informationally complete) observable set, and the sample size N, the crate
//! solves for the closest state to σ reproducing the means, decides from the
//! data how much weight the bias deserves, and returns an interpolated
//! estimate with error bars for measured and unmeasured degrees of freedom.
//!
//! Modules:
//! - [`operators`]: dense Hermitian matrices, spectral calculus, qubit builders
//! - [`entropy`]: relative entropy, von Neumann entropy, log-space interpolation
//! - [`maxent`]: generalized canonical states and the dual Newton solver
//! - [`evidence`]: hyperparameter selection, diagnostics, estimate, error bars
//! - [`observables`]: the spin/pair-correlation observable set for M qubits
//! - [`fourqubit`]: closed-form four-qubit reference model
//! - [`sampling`]: reproducible synthetic sample means
//! - [`diagnostics`]: the identity/cross-check suite behind `check`
//!
//! # Example
//!
//! The built-in four-qubit problem, end to end: an isotropic prior with
//! correlation strength −0.02, sample means reporting −0.025 on each of the
//! 48 spin/pair observables, N = 10⁴.
//!
//! ```
//! use qtomo_core::observables::{build_observable_set, isotropic_targets};
//! use qtomo_core::operators::{normalized_exp, total_j_squared};
//! use qtomo_core::{run_evidence, EvidenceInput};
//!
//! # fn main() -> qtomo_core::Result<()> {
//! let j2 = total_j_squared(4)?;
//! let lambda = qtomo_core::fourqubit::lambda_of_c(-0.02)?;
//! let (sigma, _) = normalized_exp(&j2.scaled(-lambda))?;
//! let set = build_observable_set(4)?; // r = 3M² = 48 observables
//! let means = isotropic_targets(4, -0.025)?;
//! let input = EvidenceInput::new(sigma, set, means, 10_000)?;
//! let report = run_evidence(&input)?;
//! assert!(report.status.estimate_computed());
//! assert!((report.s_data.nats() - 0.004862).abs() < 1e-6);
//! # Ok(())
//! # }
//! ```

pub mod diagnostics;
pub mod entropy;
pub mod error;
pub mod evidence;
pub mod fourqubit;
pub mod maxent;
pub mod observables;
pub mod operators;
pub mod sampling;

pub use error::{Error, Result};

pub use entropy::{log_interpolate, relative_entropy, von_neumann_entropy, EntropyValue};
pub use evidence::{
    run_evidence, run_evidence_with, EvidenceInput, EvidenceOptions, EvidenceReport, Status,
};
pub use maxent::{
    canonical_state, kubo_mori_covariance, solve_maxent, CanonicalState, LagrangeParams,
    ObservableSet,
};
pub use operators::{
    expectation, matrix_log, normalized_exp, spectral_decompose, spin_component, total_j_squared,
    Axis, DensityMatrix, HermitianOperator, SpectralDecomposition,
};
pub use sampling::{sample_mean, simulate_dataset, MeasurementDataset, ShotStream};
