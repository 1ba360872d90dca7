//! The spin/correlation observable set for M qubits: single-qubit spin
//! components plus symmetrized pair correlations.
//!
//! The set holds the 3M spin components S_i^a and, for every unordered pair
//! i < j and axis pair a ≤ b, the symmetrized product ½(S_i^a S_j^b +
//! S_i^b S_j^a), giving r = 3M + 6·M(M−1)/2 = 3M² observables. Only the
//! symmetrized part of a correlation matrix is representable this way; the
//! count matches r = 3M² exactly, which is what fixes the convention.

use nalgebra::Matrix3;

use crate::error::{Error, Result};
use crate::maxent::ObservableSet;
use crate::operators::{expectation, spin_component, Axis, DensityMatrix, HermitianOperator};

/// Largest qubit count for the observable-set builders.
pub const MAX_OBSERVABLE_QUBITS: usize = 8;

/// Inclusive bounds on the isotropic correlation strength c for M qubits:
/// −1/(4(M−1)) ≤ c ≤ 1/12.
pub fn correlation_bounds(qubit_count: usize) -> (f64, f64) {
    let lower = if qubit_count > 1 {
        -1.0 / (4.0 * (qubit_count - 1) as f64)
    } else {
        f64::NEG_INFINITY
    };
    (lower, 1.0 / 12.0)
}

/// Spin means and symmetrized pair-correlation matrices extracted from (or
/// prescribing) a state.
#[derive(Clone, Debug)]
pub struct CorrelationSpec {
    qubit_count: usize,
    spin_means: Vec<[f64; 3]>,
    correlations: Vec<PairCorrelation>,
}

/// Symmetric 3×3 correlation matrix C_ij^{ab} for one unordered qubit pair.
#[derive(Clone, Debug)]
pub struct PairCorrelation {
    pub i: usize,
    pub j: usize,
    pub matrix: Matrix3<f64>,
}

impl CorrelationSpec {
    /// Isotropic spec: zero spin means, c·identity correlations for every pair.
    pub fn isotropic(qubit_count: usize, strength: f64) -> Result<Self> {
        check_strength(qubit_count, strength)?;
        let correlations = unordered_pairs(qubit_count)
            .map(|(i, j)| PairCorrelation {
                i,
                j,
                matrix: Matrix3::identity() * strength,
            })
            .collect();
        Ok(Self {
            qubit_count,
            spin_means: vec![[0.0; 3]; qubit_count],
            correlations,
        })
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn spin_means(&self) -> &[[f64; 3]] {
        &self.spin_means
    }

    pub fn correlations(&self) -> &[PairCorrelation] {
        &self.correlations
    }

    pub fn pair(&self, i: usize, j: usize) -> Option<&Matrix3<f64>> {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        self.correlations
            .iter()
            .find(|p| p.i == i && p.j == j)
            .map(|p| &p.matrix)
    }

    /// Mean diagonal correlation entry over all pairs: the isotropic strength
    /// when the spec is isotropic, a symmetry-averaged estimate otherwise.
    pub fn isotropic_strength(&self) -> f64 {
        if self.correlations.is_empty() {
            return 0.0;
        }
        let total: f64 = self
            .correlations
            .iter()
            .map(|p| (p.matrix[(0, 0)] + p.matrix[(1, 1)] + p.matrix[(2, 2)]) / 3.0)
            .sum();
        total / self.correlations.len() as f64
    }

    /// Largest deviation from the isotropic form (zero spins, c·identity
    /// correlations at the symmetry-averaged c).
    pub fn max_anisotropy(&self) -> f64 {
        let c = self.isotropic_strength();
        let mut dev = self
            .spin_means
            .iter()
            .flatten()
            .fold(0.0_f64, |acc, s| acc.max(s.abs()));
        for p in &self.correlations {
            for a in 0..3 {
                for b in 0..3 {
                    let target = if a == b { c } else { 0.0 };
                    dev = dev.max((p.matrix[(a, b)] - target).abs());
                }
            }
        }
        dev
    }
}

fn check_strength(qubit_count: usize, strength: f64) -> Result<()> {
    if qubit_count < 2 {
        return Ok(()); // no pairs, nothing to bound
    }
    let (lo, hi) = correlation_bounds(qubit_count);
    if !(lo..=hi).contains(&strength) {
        return Err(Error::OutOfBounds {
            name: "correlation strength c",
            value: strength,
            lo,
            hi,
        });
    }
    Ok(())
}

fn check_qubit_count(qubit_count: usize) -> Result<()> {
    if !(1..=MAX_OBSERVABLE_QUBITS).contains(&qubit_count) {
        return Err(Error::QubitCountOutOfRange {
            qubit_count,
            min: 1,
            max: MAX_OBSERVABLE_QUBITS,
        });
    }
    Ok(())
}

fn unordered_pairs(qubit_count: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..qubit_count).flat_map(move |i| ((i + 1)..qubit_count).map(move |j| (i, j)))
}

fn axis_pairs() -> impl Iterator<Item = (Axis, Axis)> {
    Axis::ALL
        .into_iter()
        .enumerate()
        .flat_map(|(ai, a)| Axis::ALL.into_iter().skip(ai).map(move |b| (a, b)))
}

fn pair_product(
    i: usize,
    j: usize,
    a: Axis,
    b: Axis,
    qubit_count: usize,
) -> Result<HermitianOperator> {
    let sa = spin_component(i, a, qubit_count)?;
    let sb = spin_component(j, b, qubit_count)?;
    let first = HermitianOperator::sym_product(&sa, &sb)?;
    if a == b {
        return Ok(first);
    }
    let sa2 = spin_component(i, b, qubit_count)?;
    let sb2 = spin_component(j, a, qubit_count)?;
    let second = HermitianOperator::sym_product(&sa2, &sb2)?;
    Ok(first.add(&second)?.scaled(0.5))
}

/// The ordered observable set: 3M spins (qubit-major, axes x,y,z), then for
/// each pair i < j the six symmetrized products with a ≤ b.
pub fn build_observable_set(qubit_count: usize) -> Result<ObservableSet> {
    check_qubit_count(qubit_count)?;
    let mut observables = Vec::with_capacity(3 * qubit_count * qubit_count);
    for i in 0..qubit_count {
        for axis in Axis::ALL {
            observables.push(spin_component(i, axis, qubit_count)?);
        }
    }
    for (i, j) in unordered_pairs(qubit_count) {
        for (a, b) in axis_pairs() {
            let op = pair_product(i, j, a, b, qubit_count)?;
            let (la, lb) = (a.letter(), b.letter());
            observables.push(op.with_label(format!("C{i}{j}{la}{lb}")));
        }
    }
    ObservableSet::new(observables)
}

/// Expectation targets aligned with [`build_observable_set`] for an isotropic
/// state: zero spin targets, c on diagonal axis pairs, zero off-diagonal.
pub fn isotropic_targets(qubit_count: usize, strength: f64) -> Result<Vec<f64>> {
    check_qubit_count(qubit_count)?;
    check_strength(qubit_count, strength)?;
    let mut targets = vec![0.0; 3 * qubit_count];
    for (_i, _j) in unordered_pairs(qubit_count) {
        for (a, b) in axis_pairs() {
            targets.push(if a == b { strength } else { 0.0 });
        }
    }
    Ok(targets)
}

/// Extracts spin means and symmetrized correlation matrices from a state:
/// C_ij^{ab} = ⟨½(S_i^a S_j^b + S_i^b S_j^a)⟩ − ½(s_i^a s_j^b + s_i^b s_j^a).
pub fn correlations_from_state(rho: &DensityMatrix, qubit_count: usize) -> Result<CorrelationSpec> {
    check_qubit_count(qubit_count)?;
    if rho.dim() != (1usize << qubit_count) {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: 1usize << qubit_count,
        });
    }
    let mut spin_means = Vec::with_capacity(qubit_count);
    for i in 0..qubit_count {
        let mut s = [0.0; 3];
        for axis in Axis::ALL {
            s[axis.index()] = expectation(rho, &spin_component(i, axis, qubit_count)?)?;
        }
        spin_means.push(s);
    }
    let mut correlations = Vec::new();
    for (i, j) in unordered_pairs(qubit_count) {
        let mut matrix = Matrix3::zeros();
        for (a, b) in axis_pairs() {
            let product = expectation(rho, &pair_product(i, j, a, b, qubit_count)?)?;
            let (sa, sb) = (spin_means[i][a.index()], spin_means[j][b.index()]);
            let (sa2, sb2) = (spin_means[i][b.index()], spin_means[j][a.index()]);
            let value = product - 0.5 * (sa * sb + sa2 * sb2);
            matrix[(a.index(), b.index())] = value;
            matrix[(b.index(), a.index())] = value;
        }
        correlations.push(PairCorrelation { i, j, matrix });
    }
    Ok(CorrelationSpec {
        qubit_count,
        spin_means,
        correlations,
    })
}
