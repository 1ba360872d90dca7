//! Generalized canonical states: the state closest to a reference σ in
//! relative entropy among all states reproducing a set of expectation values.
//!
//! The state has the form μ ∝ exp[(ln σ − ⟨ln σ⟩_σ) − Σ_a λ^a G_a]. The dual
//! problem in λ is strictly convex for full-rank σ, so a damped Newton
//! iteration with the exact Kubo–Mori Hessian converges quadratically and the
//! solution is unique.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operators::{
    spectral_decompose, trace_product, DensityMatrix, HermitianOperator, SpectralDecomposition,
};

/// Ordered, labelled observables with equal dimensions and unique labels.
#[derive(Clone, Debug)]
pub struct ObservableSet {
    observables: Vec<HermitianOperator>,
    dim: usize,
}

impl ObservableSet {
    pub fn new(observables: Vec<HermitianOperator>) -> Result<Self> {
        let dim = match observables.first() {
            Some(first) => first.dim(),
            None => {
                return Err(Error::OutOfBounds {
                    name: "observable count",
                    value: 0.0,
                    lo: 1.0,
                    hi: f64::INFINITY,
                })
            }
        };
        let mut seen = std::collections::HashSet::new();
        for (index, obs) in observables.iter().enumerate() {
            if obs.dim() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: obs.dim(),
                });
            }
            let label = obs.label().ok_or(Error::MissingLabel { index })?;
            if !seen.insert(label.to_string()) {
                return Err(Error::DuplicateLabel {
                    label: label.to_string(),
                });
            }
        }
        Ok(Self { observables, dim })
    }

    pub fn len(&self) -> usize {
        self.observables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observables.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn observables(&self) -> &[HermitianOperator] {
        &self.observables
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.observables.iter().filter_map(|o| o.label())
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.observables
            .iter()
            .position(|o| o.label() == Some(label))
    }

    /// Expectation values of every observable under `rho`.
    pub fn expectations(&self, rho: &DensityMatrix) -> Result<Vec<f64>> {
        self.observables
            .iter()
            .map(|g| crate::operators::expectation(rho, g))
            .collect()
    }
}

/// Lagrange parameters aligned with an [`ObservableSet`].
#[derive(Clone, Debug, PartialEq)]
pub struct LagrangeParams {
    values: Vec<f64>,
}

impl LagrangeParams {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(&bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::OutOfBounds {
                name: "lagrange parameter",
                value: bad,
                lo: f64::NEG_INFINITY,
                hi: f64::INFINITY,
            });
        }
        Ok(Self { values })
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            values: vec![0.0; len],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }
}

/// A solved generalized canonical state together with its Lagrange
/// parameters, log-partition value, and the reference state.
#[derive(Clone, Debug)]
pub struct CanonicalState {
    state: DensityMatrix,
    lagrange: LagrangeParams,
    log_partition: f64,
    reference: DensityMatrix,
    // spectrum of the exponent (ln σ − ⟨ln σ⟩_σ) − Σ λ G, reused by the
    // Kubo–Mori covariance
    exponent: SpectralDecomposition,
}

impl CanonicalState {
    pub fn state(&self) -> &DensityMatrix {
        &self.state
    }

    pub fn lagrange(&self) -> &LagrangeParams {
        &self.lagrange
    }

    pub fn log_partition(&self) -> f64 {
        self.log_partition
    }

    pub fn reference(&self) -> &DensityMatrix {
        &self.reference
    }
}

/// ln σ − ⟨ln σ⟩_σ · I, the σ-dependent part of the canonical exponent.
fn centered_log(sigma: &DensityMatrix) -> Result<HermitianOperator> {
    let ln_sigma = crate::operators::matrix_log(sigma)?;
    let mean: f64 = sigma
        .spectrum()
        .eigenvalues
        .iter()
        .map(|&p| if p > 0.0 { p * p.ln() } else { 0.0 })
        .sum();
    ln_sigma.add(&HermitianOperator::identity(sigma.dim()).scaled(-mean))
}

fn build_canonical(
    sigma: &DensityMatrix,
    base: &HermitianOperator,
    set: &ObservableSet,
    lagrange: &LagrangeParams,
) -> Result<(CanonicalState, Vec<f64>)> {
    let mut exponent = base.entries().clone();
    for (value, obs) in lagrange.values().iter().zip(set.observables()) {
        if *value != 0.0 {
            exponent -= obs.entries() * Complex64::new(*value, 0.0);
        }
    }
    let spec = spectral_decompose(&HermitianOperator::new(exponent)?)?;
    let shift = spec.max_eigenvalue();
    let weights: Vec<f64> = spec
        .eigenvalues
        .iter()
        .map(|&k| (k - shift).exp())
        .collect();
    let z: f64 = weights.iter().sum();
    let log_partition = z.ln() + shift;
    let probs: Vec<f64> = weights.iter().map(|w| w / z).collect();

    let d = spec.dim();
    let v = &spec.eigenvectors;
    let mut scaled = v.clone();
    for k in 0..d {
        let w = Complex64::new(probs[k], 0.0);
        for i in 0..d {
            scaled[(i, k)] *= w;
        }
    }
    let op = HermitianOperator::new(scaled * v.adjoint())?;
    let state = DensityMatrix::from_parts(
        op,
        SpectralDecomposition {
            eigenvalues: probs,
            eigenvectors: spec.eigenvectors.clone(),
        },
    );
    let means: Vec<f64> = set
        .observables()
        .iter()
        .map(|g| trace_product(state.entries(), g.entries()).re)
        .collect();
    let canonical = CanonicalState {
        state,
        lagrange: lagrange.clone(),
        log_partition,
        reference: sigma.clone(),
        exponent: spec,
    };
    Ok((canonical, means))
}

/// The generalized canonical state for given Lagrange parameters.
pub fn canonical_state(
    sigma: &DensityMatrix,
    set: &ObservableSet,
    lagrange: &LagrangeParams,
) -> Result<CanonicalState> {
    check_alignment(sigma, set, lagrange.len())?;
    let base = centered_log(sigma)?;
    let (state, _) = build_canonical(sigma, &base, set, lagrange)?;
    Ok(state)
}

fn check_alignment(sigma: &DensityMatrix, set: &ObservableSet, len: usize) -> Result<()> {
    if sigma.dim() != set.dim() {
        return Err(Error::DimensionMismatch {
            left: sigma.dim(),
            right: set.dim(),
        });
    }
    if len != set.len() {
        return Err(Error::DimensionMismatch {
            left: len,
            right: set.len(),
        });
    }
    Ok(())
}

/// Stable divided difference (e^a − e^b)/(a − b), equal to e^a at a = b.
fn exp_divided_difference(a: f64, b: f64) -> f64 {
    let h = 0.5 * (a - b);
    let mid = 0.5 * (a + b);
    let ratio = if h.abs() < 1e-5 {
        let h2 = h * h;
        1.0 + h2 / 6.0 + h2 * h2 / 120.0
    } else {
        h.sinh() / h
    };
    mid.exp() * ratio
}

/// Kubo–Mori covariance matrix: second derivatives of the log-partition with
/// respect to the Lagrange parameters, evaluated in the exponent eigenbasis
/// by divided differences of the exponential. Symmetric positive semidefinite.
pub fn kubo_mori_covariance(mu: &CanonicalState, set: &ObservableSet) -> Result<DMatrix<f64>> {
    if mu.state.dim() != set.dim() {
        return Err(Error::DimensionMismatch {
            left: mu.state.dim(),
            right: set.dim(),
        });
    }
    let spec = &mu.exponent;
    let d = spec.dim();
    let r = set.len();
    // log-probabilities q_i with p_i = e^{q_i}
    let q: Vec<f64> = spec
        .eigenvalues
        .iter()
        .map(|&k| k - mu.log_partition)
        .collect();

    let v = &spec.eigenvectors;
    let rotated: Vec<DMatrix<Complex64>> = set
        .observables()
        .iter()
        .map(|g| v.adjoint() * g.entries() * v)
        .collect();

    let mut divided = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            divided[(i, j)] = exp_divided_difference(q[i], q[j]);
        }
    }

    let means: Vec<f64> = rotated
        .iter()
        .map(|g| (0..d).map(|i| g[(i, i)].re * q[i].exp()).sum())
        .collect();

    let mut cov = DMatrix::zeros(r, r);
    for a in 0..r {
        for b in a..r {
            let mut sum = 0.0;
            for i in 0..d {
                for j in 0..d {
                    sum += (rotated[a][(i, j)] * rotated[b][(i, j)].conj()).re * divided[(i, j)];
                }
            }
            let value = sum - means[a] * means[b];
            cov[(a, b)] = value;
            cov[(b, a)] = value;
        }
    }
    Ok(cov)
}

/// Solver knobs for [`solve_maxent_with`].
#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    /// Convergence threshold on max_a |⟨G_a⟩ − g_a|.
    pub tol: f64,
    /// Newton iteration cap.
    pub max_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: 200,
        }
    }
}

const MAX_HALVINGS: usize = 30;
const LAGRANGE_BLOWUP: f64 = 1e4;

/// Solves for the canonical state reproducing the target means `g`, starting
/// from λ = 0 with damped Newton steps (step halving whenever the constraint
/// residual does not decrease).
pub fn solve_maxent(
    sigma: &DensityMatrix,
    set: &ObservableSet,
    targets: &[f64],
) -> Result<CanonicalState> {
    solve_maxent_with(sigma, set, targets, &SolveOptions::default())
}

pub fn solve_maxent_with(
    sigma: &DensityMatrix,
    set: &ObservableSet,
    targets: &[f64],
    options: &SolveOptions,
) -> Result<CanonicalState> {
    check_alignment(sigma, set, targets.len())?;

    // feasibility screen: each target must lie strictly inside the spectral
    // interval of its observable
    for (target, obs) in targets.iter().zip(set.observables()) {
        let spec = spectral_decompose(obs)?;
        let (lo, hi) = (spec.min_eigenvalue(), spec.max_eigenvalue());
        if !(*target > lo && *target < hi) {
            return Err(Error::OutsideSpectrum {
                label: obs.label().unwrap_or("?").to_string(),
                value: *target,
                lo,
                hi,
            });
        }
    }

    let base = centered_log(sigma)?;
    let mut lagrange = LagrangeParams::zeros(set.len());
    let (mut current, mut means) = build_canonical(sigma, &base, set, &lagrange)?;
    let mut residual = max_residual(&means, targets);

    for iteration in 0..options.max_iter {
        if residual <= options.tol {
            return Ok(current);
        }
        let cov = kubo_mori_covariance(&current, set)?;
        let rhs = DVector::from_iterator(set.len(), means.iter().zip(targets).map(|(m, g)| m - g));
        let direction = solve_spd(cov, rhs)?;

        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..=MAX_HALVINGS {
            let trial_values: Vec<f64> = lagrange
                .values()
                .iter()
                .zip(direction.iter())
                .map(|(l, d)| l + step * d)
                .collect();
            let trial = LagrangeParams::new(trial_values)?;
            let (trial_state, trial_means) = build_canonical(sigma, &base, set, &trial)?;
            let trial_residual = max_residual(&trial_means, targets);
            if trial_residual < residual {
                lagrange = trial;
                current = trial_state;
                means = trial_means;
                residual = trial_residual;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            return Err(Error::Infeasible {
                reason: format!(
                    "residual stalled at {residual:.3e} after {MAX_HALVINGS} step halvings \
                     (iteration {iteration})"
                ),
            });
        }
        if lagrange.max_abs() > LAGRANGE_BLOWUP {
            return Err(Error::Infeasible {
                reason: format!(
                    "lagrange parameters blew up beyond {LAGRANGE_BLOWUP:.0e}; the target \
                     means are not achievable by any state"
                ),
            });
        }
    }
    Err(Error::MaxIterations {
        iterations: options.max_iter,
        residual,
    })
}

fn max_residual(means: &[f64], targets: &[f64]) -> f64 {
    means
        .iter()
        .zip(targets)
        .fold(0.0_f64, |acc, (m, g)| acc.max((m - g).abs()))
}

/// Cholesky solve with a small diagonal ridge fallback for borderline
/// positive-semidefinite Hessians.
fn solve_spd(matrix: DMatrix<f64>, rhs: DVector<f64>) -> Result<DVector<f64>> {
    let n = matrix.nrows();
    let mean_diag = (0..n).map(|i| matrix[(i, i)].abs()).sum::<f64>() / n as f64;
    let mut ridge = 0.0;
    loop {
        let mut attempt = matrix.clone();
        for i in 0..n {
            attempt[(i, i)] += ridge;
        }
        if let Some(chol) = attempt.cholesky() {
            return Ok(chol.solve(&rhs));
        }
        ridge = if ridge == 0.0 {
            mean_diag.max(f64::MIN_POSITIVE) * 1e-12
        } else {
            ridge * 100.0
        };
        if ridge > mean_diag.max(f64::MIN_POSITIVE) * 1e-2 {
            return Err(Error::Infeasible {
                reason: "singular dual Hessian: observables are linearly dependent".into(),
            });
        }
    }
}
