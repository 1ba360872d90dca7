//! Closed-form model of the four-qubit isotropic correlation family.
//!
//! Adding four spins ½ gives total angular momentum sectors j = 0, 1, 2 with
//! multiplicities 2, 3, 1 and sector dimensions 2j+1, so the partition
//! function of exp(−λJ²) is Z(λ) = 2 + 9e^{−2λ} + 5e^{−6λ}. Everything else
//! follows from Z: the thermodynamic equation for ⟨J²⟩, its inversion (a
//! cubic in x = e^{−2λ}), the relative entropy between family members, and
//! the full scalar chain of the evidence procedure. This module is pure
//! scalar arithmetic and serves as an independent reference for the dense
//! 16-dimensional pipeline.

use crate::error::{Error, Result};
use crate::evidence::Status;

/// |c| bound for four qubits: ⟨J²⟩ ∈ [0, 6] forces −1/12 ≤ c ≤ 1/12.
pub const CORRELATION_BOUND: f64 = 1.0 / 12.0;

/// Number of independent sample means in the four-qubit observable set.
pub const OBSERVABLE_COUNT: usize = 48;

/// State-parameter count n = d² − 1 for d = 16.
pub const PARAM_COUNT: usize = 255;

/// Z(λ) = 2 + 9e^{−2λ} + 5e^{−6λ}.
pub fn partition_function(lambda: f64) -> f64 {
    let x = (-2.0 * lambda).exp();
    2.0 + 9.0 * x + 5.0 * x * x * x
}

/// ⟨J²⟩(λ) = 6(3x + 5x³)/(2 + 9x + 5x³) with x = e^{−2λ}.
pub fn j2_expectation(lambda: f64) -> f64 {
    let x = (-2.0 * lambda).exp();
    if x <= 1.0 {
        let x3 = x * x * x;
        6.0 * (3.0 * x + 5.0 * x3) / (2.0 + 9.0 * x + 5.0 * x3)
    } else {
        // divide through by x³ so the λ → −∞ limit stays finite
        let inv = 1.0 / x;
        let inv2 = inv * inv;
        let inv3 = inv2 * inv;
        6.0 * (3.0 * inv2 + 5.0) / (2.0 * inv3 + 9.0 * inv2 + 5.0)
    }
}

/// Correlation strength of the family member at λ: c = (⟨J²⟩ − 3)/36.
pub fn correlation_of_lambda(lambda: f64) -> f64 {
    (j2_expectation(lambda) - 3.0) / 36.0
}

/// Inverts c → λ through the thermodynamic equation.
///
/// With T = 36c + 3 the equation ⟨J²⟩ = T becomes the cubic
/// (30 − 5T)x³ + (18 − 9T)x − 2T = 0 with a unique positive root, found by
/// safeguarded bracketing plus Newton to a residual below 1e-12 relative to
/// the term magnitudes. At the exact bounds c = ∓1/12 the root degenerates
/// (x → 0 resp. x → ∞) and λ = ±∞ is returned.
pub fn lambda_of_c(c: f64) -> Result<f64> {
    if !(-CORRELATION_BOUND..=CORRELATION_BOUND).contains(&c) {
        return Err(Error::OutOfBounds {
            name: "correlation strength c",
            value: c,
            lo: -CORRELATION_BOUND,
            hi: CORRELATION_BOUND,
        });
    }
    let t = 36.0 * c + 3.0;
    if t <= 0.0 {
        return Ok(f64::INFINITY); // all weight on the j = 0 sectors
    }
    if t >= 6.0 {
        return Ok(f64::NEG_INFINITY); // all weight on the j = 2 sector
    }
    let c3 = 30.0 - 5.0 * t;
    let c1 = 18.0 - 9.0 * t;
    let c0 = -2.0 * t;
    let f = |x: f64| c3 * x * x * x + c1 * x + c0;
    let df = |x: f64| 3.0 * c3 * x * x + c1;

    // f(0) = −2T < 0 and the cubic grows without bound: bracket the root
    let mut lo = 0.0;
    let mut hi = 1.0;
    while f(hi) <= 0.0 {
        hi *= 2.0;
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let fx = f(x);
        let scale = c3.abs() * x * x * x + c1.abs() * x + c0.abs();
        if fx.abs() <= 1e-12 * scale.max(1.0) {
            break;
        }
        if fx > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let d = df(x);
        let newton = x - fx / d;
        x = if d != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    Ok(-x.ln() / 2.0)
}

/// Closed-form S(μ_{λfrom} ‖ μ_{λto}) within the commuting family:
/// (λto − λfrom)·⟨J²⟩(λfrom) + ln Z(λto) − ln Z(λfrom).
pub fn analytic_relative_entropy(lambda_from: f64, lambda_to: f64) -> f64 {
    (lambda_to - lambda_from) * j2_expectation(lambda_from) + partition_function(lambda_to).ln()
        - partition_function(lambda_from).ln()
}

/// Scalar chain of the worked four-qubit example.
#[derive(Clone, Copy, Debug)]
pub struct AnalyticReport {
    pub status: Status,
    pub lambda_prior: f64,
    pub lambda_data: f64,
    pub z_prior: f64,
    pub z_data: f64,
    pub s_data: f64,
    /// +∞ when the data confirm the prior.
    pub n_min: f64,
    /// None exactly when N ≤ N_min.
    pub tail: Option<AnalyticTail>,
}

/// The estimate-side scalars, present whenever the procedure applies.
#[derive(Clone, Copy, Debug)]
pub struct AnalyticTail {
    /// +∞ in the prior-confirmed limit.
    pub alpha0: f64,
    pub beta: f64,
    pub lambda_e: f64,
    pub x_e: f64,
    pub j2_e: f64,
    pub c_e: f64,
}

/// Criterion threshold used for the analytic status, matching the default of
/// the dense pipeline.
const CRITERION_THRESHOLD: f64 = crate::evidence::DEFAULT_CRITERION_THRESHOLD;

/// Runs the whole chain: λ from each correlation strength, the divergence
/// S(μ_data‖σ), N_min = r/(2S), α₀, the interpolated λ_e = βλσ + (1−β)λ, and
/// the estimated correlation strength c_e.
pub fn worked_example(
    c_prior: f64,
    c_data: f64,
    sample_size: u64,
    observable_count: usize,
) -> Result<AnalyticReport> {
    let lambda_prior = lambda_of_c(c_prior)?;
    let lambda_data = lambda_of_c(c_data)?;
    if !lambda_prior.is_finite() || !lambda_data.is_finite() {
        return Err(Error::OutOfBounds {
            name: "correlation strength (open interval required)",
            value: if lambda_prior.is_finite() {
                c_data
            } else {
                c_prior
            },
            lo: -CORRELATION_BOUND,
            hi: CORRELATION_BOUND,
        });
    }
    let z_prior = partition_function(lambda_prior);
    let z_data = partition_function(lambda_data);
    let s_data = analytic_relative_entropy(lambda_data, lambda_prior).max(0.0);
    let r = observable_count as f64;
    let n = sample_size as f64;

    if s_data <= crate::evidence::DEFAULT_PRIOR_TOL * r {
        let x_e = (-2.0 * lambda_prior).exp();
        return Ok(AnalyticReport {
            status: Status::PriorConfirmed,
            lambda_prior,
            lambda_data,
            z_prior,
            z_data,
            s_data,
            n_min: f64::INFINITY,
            tail: Some(AnalyticTail {
                alpha0: f64::INFINITY,
                beta: 1.0,
                lambda_e: lambda_prior,
                x_e,
                j2_e: j2_expectation(lambda_prior),
                c_e: c_prior,
            }),
        });
    }

    let n_min = r / (2.0 * s_data);
    if n <= n_min {
        return Ok(AnalyticReport {
            status: Status::InsufficientData,
            lambda_prior,
            lambda_data,
            z_prior,
            z_data,
            s_data,
            n_min,
            tail: None,
        });
    }

    let beta = n_min / n;
    let alpha0 = n_min / (1.0 - beta);
    let lambda_e = beta * lambda_prior + (1.0 - beta) * lambda_data;
    let x_e = (-2.0 * lambda_e).exp();
    let j2_e = j2_expectation(lambda_e);
    let c_e = (j2_e - 3.0) / 36.0;
    let criterion = 0.5 * r * (1.0 - beta) * (1.0 - beta);
    let status = if criterion < CRITERION_THRESHOLD {
        Status::WeakCriterion
    } else {
        Status::Applicable
    };
    Ok(AnalyticReport {
        status,
        lambda_prior,
        lambda_data,
        z_prior,
        z_data,
        s_data,
        n_min,
        tail: Some(AnalyticTail {
            alpha0,
            beta,
            lambda_e,
            x_e,
            j2_e,
            c_e,
        }),
    })
}

/// The worked example at its standard inputs: c(σ) = −0.02, c = −0.025,
/// N = 10000, r = 48.
pub fn default_example() -> AnalyticReport {
    worked_example(-0.02, -0.025, 10_000, OBSERVABLE_COUNT)
        .expect("default inputs are inside bounds")
}

/// Side-by-side result of the analytic chain and the dense 16-dimensional
/// pipeline reduced to the same scalars.
#[derive(Clone, Debug)]
pub struct PipelineComparison {
    pub analytic: AnalyticReport,
    pub numeric: AnalyticReport,
    pub status_match: bool,
    /// Largest relative deviation over all comparable scalars.
    pub max_relative_deviation: f64,
    /// The full dense-pipeline report.
    pub report: crate::evidence::EvidenceReport,
}

fn relative_deviation(a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0; // covers the two-infinities case
    }
    if a.abs() < 1e-12 && b.abs() < 1e-12 {
        return 0.0;
    }
    (a - b).abs() / a.abs().max(b.abs())
}

/// Runs the dense 48-observable pipeline at the given strengths and reduces
/// it to the analytic scalar chain for comparison.
///
/// The reduction uses the structure of the solved problem: within the
/// isotropic family the Lagrange vector vanishes except on the diagonal pair
/// products, where each entry equals 2(λ_data − λ_prior), and the canonical
/// log-partition maps back to Z(λ_data) by an affine shift.
pub fn compare_with_pipeline(
    c_prior: f64,
    c_data: f64,
    sample_size: u64,
) -> Result<PipelineComparison> {
    use crate::evidence::{run_evidence, EvidenceInput};
    use crate::observables::{build_observable_set, isotropic_targets};
    use crate::operators::{expectation, normalized_exp, total_j_squared};

    let analytic = worked_example(c_prior, c_data, sample_size, OBSERVABLE_COUNT)?;

    let j2 = total_j_squared(4)?;
    let (sigma, log_z_prior) = normalized_exp(&j2.scaled(-analytic.lambda_prior))?;
    let set = build_observable_set(4)?;
    let targets = isotropic_targets(4, c_data)?;
    let input = EvidenceInput::new(sigma.clone(), set, targets, sample_size)?;
    let report = run_evidence(&input)?;

    let lambda_prior = analytic.lambda_prior;
    let j2_sigma = expectation(&sigma, &j2)?;

    // mean Lagrange entry over the diagonal pair products
    let diag_mean = {
        let mut sum = 0.0;
        let mut count = 0;
        for (label, value) in input
            .set()
            .labels()
            .zip(report.data_state.lagrange().values())
        {
            let bytes = label.as_bytes();
            if bytes[0] == b'C' && bytes[3] == bytes[4] {
                sum += value;
                count += 1;
            }
        }
        sum / count as f64
    };
    let lambda_data = lambda_prior + 0.5 * diag_mean;
    let z_data = (report.data_state.log_partition()
        - lambda_prior * j2_sigma
        - 3.0 * (lambda_data - lambda_prior))
        .exp();

    let tail = match (&report.scalars, report.status) {
        (Some(scalars), status) if status != Status::InsufficientData => {
            let j2_e = expectation(&report.estimate, &j2)?;
            let lambda_e = scalars.beta * lambda_prior + (1.0 - scalars.beta) * lambda_data;
            Some(AnalyticTail {
                alpha0: scalars.alpha0,
                beta: scalars.beta,
                lambda_e,
                x_e: (-2.0 * lambda_e).exp(),
                j2_e,
                c_e: (j2_e - 3.0) / 36.0,
            })
        }
        _ => None,
    };
    let numeric = AnalyticReport {
        status: report.status,
        lambda_prior,
        lambda_data,
        z_prior: log_z_prior.exp(),
        z_data,
        s_data: report.s_data.nats(),
        n_min: report.n_min,
        tail,
    };

    let mut dev = [
        (analytic.lambda_data, numeric.lambda_data),
        (analytic.z_prior, numeric.z_prior),
        (analytic.z_data, numeric.z_data),
        (analytic.s_data, numeric.s_data),
        (analytic.n_min, numeric.n_min),
    ]
    .iter()
    .fold(0.0_f64, |acc, (a, b)| acc.max(relative_deviation(*a, *b)));
    if let (Some(a), Some(n)) = (&analytic.tail, &numeric.tail) {
        dev = [
            (a.alpha0, n.alpha0),
            (a.beta, n.beta),
            (a.lambda_e, n.lambda_e),
            (a.x_e, n.x_e),
            (a.j2_e, n.j2_e),
            (a.c_e, n.c_e),
        ]
        .iter()
        .fold(dev, |acc, (x, y)| acc.max(relative_deviation(*x, *y)));
    }

    Ok(PipelineComparison {
        status_match: analytic.status == report.status
            && analytic.tail.is_some() == numeric.tail.is_some(),
        analytic,
        numeric,
        max_relative_deviation: dev,
        report,
    })
}
