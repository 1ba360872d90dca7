//! Relative entropy S(ρ‖σ) = tr(ρ ln ρ − ρ ln σ), von Neumann entropy, and
//! log-space interpolation between states. All values are in nats.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operators::{matrix_log, normalized_exp, DensityMatrix, RANK_TOLERANCE};

/// Weight outside the reference support above which the divergence counts as
/// infinite rather than round-off.
const SUPPORT_WEIGHT_LIMIT: f64 = 1e-9;

/// Negative round-off this far below zero is clamped; anything worse is an
/// internal-consistency failure.
const NEGATIVE_CLAMP: f64 = -1e-10;

/// A relative entropy in nats.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct EntropyValue {
    nats: f64,
}

impl EntropyValue {
    /// Wraps an externally computed divergence, clamping round-off just
    /// below zero and rejecting anything more negative.
    pub fn new(value: f64) -> Result<Self> {
        if value < NEGATIVE_CLAMP {
            return Err(Error::InternalConsistency {
                what: "negative relative entropy",
                value,
                limit: NEGATIVE_CLAMP.abs(),
            });
        }
        Ok(Self {
            nats: value.max(0.0),
        })
    }

    pub fn nats(self) -> f64 {
        self.nats
    }
}

/// S(ρ‖σ) in nats. Requires support(ρ) ⊆ support(σ); weight beyond 1e-9 on
/// the orthogonal complement of σ's support is a `SupportViolation`.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<EntropyValue> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: sigma.dim(),
        });
    }
    let d = rho.dim();
    let sig_spec = sigma.spectrum();
    let support_tol = RANK_TOLERANCE * sig_spec.max_eigenvalue();

    // tr(rho ln rho) from rho's own spectrum, with 0 ln 0 = 0
    let tr_rho_ln_rho: f64 = rho
        .spectrum()
        .eigenvalues
        .iter()
        .map(|&p| if p > 0.0 { p * p.ln() } else { 0.0 })
        .sum();

    // tr(rho ln sigma) in sigma's eigenbasis; weights on truncated levels
    // signal a support violation
    let mut tr_rho_ln_sigma = 0.0;
    let mut outside_weight = 0.0;
    for k in 0..d {
        let col = sig_spec.eigenvectors.column(k);
        let mut w = 0.0;
        for i in 0..d {
            for j in 0..d {
                w += (col[i].conj() * rho.entries()[(i, j)] * col[j]).re;
            }
        }
        let q = sig_spec.eigenvalues[k];
        if q < support_tol {
            outside_weight += w.max(0.0);
        } else {
            tr_rho_ln_sigma += w * q.ln();
        }
    }
    if outside_weight > SUPPORT_WEIGHT_LIMIT {
        return Err(Error::SupportViolation {
            weight: outside_weight,
        });
    }
    EntropyValue::new(tr_rho_ln_rho - tr_rho_ln_sigma)
}

/// −tr(ρ ln ρ) ∈ [0, ln d].
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    let s: f64 = rho
        .spectrum()
        .eigenvalues
        .iter()
        .map(|&p| if p > 0.0 { p * p.ln() } else { 0.0 })
        .sum();
    (-s).max(0.0)
}

/// Result of a log-space interpolation ρ(μ,σ;t) ∝ exp[(1−t) ln μ + t ln σ].
#[derive(Clone, Debug)]
pub struct InterpolatedState {
    pub state: DensityMatrix,
    /// The constant C(μ,σ;t) in
    /// (1−t)·S(ρ‖μ) + t·S(ρ‖σ) = S(ρ‖ρ(μ,σ;t)) + C(μ,σ;t),
    /// equal to −ln tr exp[(1−t) ln μ + t ln σ].
    pub constant: f64,
}

/// Normalized exponential of the log-convex combination of two full-rank
/// states, together with the quasi-linearity constant.
pub fn log_interpolate(
    mu: &DensityMatrix,
    sigma: &DensityMatrix,
    t: f64,
) -> Result<InterpolatedState> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::OutOfBounds {
            name: "t",
            value: t,
            lo: 0.0,
            hi: 1.0,
        });
    }
    let ln_mu = matrix_log(mu)?;
    let ln_sigma = matrix_log(sigma)?;
    let exponent = ln_mu.scaled(1.0 - t).add(&ln_sigma.scaled(t))?;
    let (state, log_partition) = normalized_exp(&exponent)?;
    Ok(InterpolatedState {
        state,
        constant: -log_partition,
    })
}

/// tr(ρ P_null(σ)): weight of ρ outside the support of σ. Diagnostic used by
/// the support screen; exposed for tests.
pub fn weight_outside_support(rho: &DensityMatrix, sigma: &DensityMatrix) -> f64 {
    let d = rho.dim();
    let spec = sigma.spectrum();
    let tol = RANK_TOLERANCE * spec.max_eigenvalue();
    let mut weight = 0.0;
    for k in 0..d {
        if spec.eigenvalues[k] >= tol {
            continue;
        }
        let col = spec.eigenvectors.column(k);
        let mut w = Complex64::new(0.0, 0.0);
        for i in 0..d {
            for j in 0..d {
                w += col[i].conj() * rho.entries()[(i, j)] * col[j];
            }
        }
        weight += w.re.max(0.0);
    }
    weight
}
