//! Dense complex Hermitian operators and spectral calculus for M-qubit systems.
//!
//! Everything here is plain dense linear algebra over `Complex64` with d = 2^M
//! for the qubit constructors. States and observables are immutable after
//! construction; all operations are pure functions of their inputs.

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest supported Hilbert-space dimension (dense storage guard).
pub const MAX_QUBITS: usize = 12;

/// Relative eigenvalue threshold below which a state counts as rank deficient.
pub const RANK_TOLERANCE: f64 = 1e-12;

/// Hard limit on the imaginary part of scalars that must be real.
pub const IMAG_RESIDUE_LIMIT: f64 = 1e-9;

const HERMITICITY_LIMIT: f64 = 1e-9;
const TRACE_TOLERANCE: f64 = 1e-12;
const EIGENVALUE_FLOOR: f64 = -1e-12;

/// One of the three spin axes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    pub fn from_index(index: usize) -> Result<Axis> {
        Axis::ALL
            .get(index)
            .copied()
            .ok_or(Error::AxisOutOfRange { index })
    }

    pub fn letter(self) -> char {
        match self {
            Axis::X => 'x',
            Axis::Y => 'y',
            Axis::Z => 'z',
        }
    }
}

fn pauli(axis: Axis) -> Matrix2<Complex64> {
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    match axis {
        Axis::X => Matrix2::new(zero, one, one, zero),
        Axis::Y => Matrix2::new(zero, -i, i, zero),
        Axis::Z => Matrix2::new(one, zero, zero, -one),
    }
}

/// A dense complex Hermitian matrix with an optional label.
///
/// Construction symmetrizes the entries, so `entries == entries.adjoint()`
/// holds exactly afterwards. Inputs whose anti-Hermitian part exceeds 1e-9
/// in max-norm are rejected instead of silently repaired.
#[derive(Clone, Debug)]
pub struct HermitianOperator {
    entries: DMatrix<Complex64>,
    label: Option<String>,
}

impl HermitianOperator {
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        let (rows, cols) = entries.shape();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        let mut deviation: f64 = 0.0;
        for i in 0..rows {
            for j in i..cols {
                deviation = deviation.max((entries[(i, j)] - entries[(j, i)].conj()).norm());
            }
        }
        if deviation > HERMITICITY_LIMIT {
            return Err(Error::NotHermitian { deviation });
        }
        let mut sym = entries;
        for i in 0..rows {
            sym[(i, i)] = Complex64::new(sym[(i, i)].re, 0.0);
            for j in (i + 1)..cols {
                let avg = (sym[(i, j)] + sym[(j, i)].conj()) * 0.5;
                sym[(i, j)] = avg;
                sym[(j, i)] = avg.conj();
            }
        }
        Ok(Self {
            entries: sym,
            label: None,
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            entries: DMatrix::identity(dim, dim),
            label: None,
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            entries: DMatrix::zeros(dim, dim),
            label: None,
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let d = diag.len();
        let mut entries = DMatrix::zeros(d, d);
        for (k, &v) in diag.iter().enumerate() {
            entries[(k, k)] = Complex64::new(v, 0.0);
        }
        Self {
            entries,
            label: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.entries[(i, i)].re).sum()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            entries: &self.entries * Complex64::new(factor, 0.0),
            label: self.label.clone(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        Ok(Self {
            entries: &self.entries + &other.entries,
            label: None,
        })
    }

    /// Symmetrized product ½(AB + BA); Hermitian for Hermitian inputs.
    pub fn sym_product(a: &Self, b: &Self) -> Result<Self> {
        check_dims(a.dim(), b.dim())?;
        let ab = &a.entries * &b.entries;
        let ba = &b.entries * &a.entries;
        HermitianOperator::new((ab + ba) * Complex64::new(0.5, 0.0))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        max_abs_entry(&(&self.entries - &other.entries))
    }

    pub fn commutator_norm(a: &Self, b: &Self) -> f64 {
        let ab = &a.entries * &b.entries;
        let ba = &b.entries * &a.entries;
        max_abs_entry(&(ab - ba))
    }
}

fn check_dims(left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(Error::DimensionMismatch { left, right });
    }
    Ok(())
}

pub(crate) fn max_abs_entry(m: &DMatrix<Complex64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// Eigendecomposition of a Hermitian matrix: ascending real eigenvalues and a
/// unitary eigenvector matrix with a fixed phase convention (first component
/// above 1e-9 in modulus is made real and positive).
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<Complex64>,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Rebuilds V diag(f(λ)) V^adjoint.
    pub fn rebuild(&self, f: impl Fn(f64) -> f64) -> DMatrix<Complex64> {
        let d = self.dim();
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for k in 0..d {
            let w = Complex64::new(f(self.eigenvalues[k]), 0.0);
            for i in 0..d {
                scaled[(i, k)] *= w;
            }
        }
        scaled * v.adjoint()
    }

    pub fn reconstruct(&self) -> DMatrix<Complex64> {
        self.rebuild(|x| x)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues[self.dim() - 1]
    }
}

const JACOBI_MAX_SWEEPS: usize = 64;

/// Cyclic complex Jacobi diagonalization.
///
/// Each (p, q) rotation phases the off-diagonal entry real and applies the
/// standard symmetric Schur rotation, driving the off-diagonal Frobenius mass
/// to zero. Deterministic: identical input yields identical output.
pub fn spectral_decompose(op: &HermitianOperator) -> Result<SpectralDecomposition> {
    let d = op.dim();
    let mut a = op.entries().clone();
    let mut v: DMatrix<Complex64> = DMatrix::identity(d, d);
    let scale = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let target = scale * 1e-15;

    let mut off = off_diagonal_norm(&a);
    let mut sweeps = 0;
    while off > target && off > 0.0 {
        if sweeps >= JACOBI_MAX_SWEEPS {
            return Err(Error::EigenNonConvergence { sweeps, off });
        }
        for p in 0..d {
            for q in (p + 1)..d {
                rotate(&mut a, &mut v, p, q);
            }
        }
        off = off_diagonal_norm(&a);
        sweeps += 1;
    }

    let mut order: Vec<usize> = (0..d).collect();
    let diag: Vec<f64> = (0..d).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));

    let mut eigenvalues = Vec::with_capacity(d);
    let mut eigenvectors = DMatrix::zeros(d, d);
    for (col, &src) in order.iter().enumerate() {
        eigenvalues.push(diag[src]);
        // phase convention: first component with modulus > 1e-9 made real positive
        let mut phase = Complex64::new(1.0, 0.0);
        for i in 0..d {
            let z = v[(i, src)];
            if z.norm() > 1e-9 {
                phase = z.conj() / z.norm();
                break;
            }
        }
        for i in 0..d {
            eigenvectors[(i, col)] = v[(i, src)] * phase;
        }
    }

    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

fn off_diagonal_norm(a: &DMatrix<Complex64>) -> f64 {
    let d = a.nrows();
    let mut sum = 0.0;
    for p in 0..d {
        for q in (p + 1)..d {
            sum += 2.0 * a[(p, q)].norm_sqr();
        }
    }
    sum.sqrt()
}

fn rotate(a: &mut DMatrix<Complex64>, v: &mut DMatrix<Complex64>, p: usize, q: usize) {
    let apq = a[(p, q)];
    let m = apq.norm();
    if m == 0.0 {
        return;
    }
    let u = apq / m; // phase of the off-diagonal entry
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;

    let tau = (aqq - app) / (2.0 * m);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    // W = [[c, s], [-conj(u) s, conj(u) c]] acting on columns (p, q)
    let wpp = Complex64::new(c, 0.0);
    let wpq = Complex64::new(s, 0.0);
    let wqp = -u.conj() * s;
    let wqq = u.conj() * c;

    let d = a.nrows();
    for i in 0..d {
        let aip = a[(i, p)];
        let aiq = a[(i, q)];
        a[(i, p)] = aip * wpp + aiq * wqp;
        a[(i, q)] = aip * wpq + aiq * wqq;
    }
    for j in 0..d {
        let apj = a[(p, j)];
        let aqj = a[(q, j)];
        a[(p, j)] = wpp.conj() * apj + wqp.conj() * aqj;
        a[(q, j)] = wpq.conj() * apj + wqq.conj() * aqj;
    }
    // clean the rotated pair exactly
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);

    for i in 0..d {
        let vip = v[(i, p)];
        let viq = v[(i, q)];
        v[(i, p)] = vip * wpp + viq * wqp;
        v[(i, q)] = vip * wpq + viq * wqq;
    }
}

/// A unit-trace positive-semidefinite operator with its spectrum cached.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    op: HermitianOperator,
    spectrum: SpectralDecomposition,
}

impl DensityMatrix {
    pub fn new(op: HermitianOperator) -> Result<Self> {
        let trace = op.trace();
        if (trace - 1.0).abs() > TRACE_TOLERANCE {
            return Err(Error::TraceNotOne {
                trace,
                tol: TRACE_TOLERANCE,
            });
        }
        let spectrum = spectral_decompose(&op)?;
        if spectrum.min_eigenvalue() < EIGENVALUE_FLOOR {
            return Err(Error::NegativeEigenvalue {
                eigenvalue: spectrum.min_eigenvalue(),
                tol: EIGENVALUE_FLOOR,
            });
        }
        Ok(Self { op, spectrum })
    }

    pub(crate) fn from_parts(op: HermitianOperator, spectrum: SpectralDecomposition) -> Self {
        Self { op, spectrum }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let op = HermitianOperator::identity(dim).scaled(1.0 / dim as f64);
        let spectrum = SpectralDecomposition {
            eigenvalues: vec![1.0 / dim as f64; dim],
            eigenvectors: DMatrix::identity(dim, dim),
        };
        Self { op, spectrum }
    }

    /// Pure state |k><k| in the computational basis. Rank deficient for d > 1.
    pub fn basis_state(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::OutOfBounds {
                name: "basis index",
                value: index as f64,
                lo: 0.0,
                hi: (dim - 1) as f64,
            });
        }
        let mut diag = vec![0.0; dim];
        diag[index] = 1.0;
        Self::new(HermitianOperator::from_diagonal(&diag))
    }

    pub fn from_diagonal(probs: &[f64]) -> Result<Self> {
        Self::new(HermitianOperator::from_diagonal(probs))
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        self.op.entries()
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn spectrum(&self) -> &SpectralDecomposition {
        &self.spectrum
    }

    /// True when the smallest eigenvalue clears the relative rank tolerance.
    pub fn is_full_rank(&self) -> bool {
        self.spectrum.min_eigenvalue() >= RANK_TOLERANCE * self.spectrum.max_eigenvalue()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.op.max_abs_diff(&other.op)
    }
}

/// Spin component S_i^a = ½·(Pauli a) on qubit `qubit`, identity elsewhere.
pub fn spin_component(qubit: usize, axis: Axis, qubit_count: usize) -> Result<HermitianOperator> {
    guard_qubit_count(qubit_count, MAX_QUBITS)?;
    if qubit >= qubit_count {
        return Err(Error::QubitIndexOutOfRange {
            index: qubit,
            qubit_count,
        });
    }
    let half_pauli: DMatrix<Complex64> = DMatrix::from_fn(2, 2, |i, j| pauli(axis)[(i, j)] * 0.5);
    let id2: DMatrix<Complex64> = DMatrix::identity(2, 2);
    let mut out = DMatrix::identity(1, 1);
    for site in 0..qubit_count {
        out = if site == qubit {
            out.kronecker(&half_pauli)
        } else {
            out.kronecker(&id2)
        };
    }
    let letter = axis.letter();
    Ok(HermitianOperator::new(out)?.with_label(format!("S{qubit}{letter}")))
}

/// Total angular momentum squared J² = Σ_a (Σ_i S_i^a)².
///
/// Built from the identity Σ_a S_i^a S_j^a = ½ SWAP_ij − ¼ I, which turns J²
/// into a constant plus a sum of basis-permutation matrices and avoids any
/// dense matrix product.
pub fn total_j_squared(qubit_count: usize) -> Result<HermitianOperator> {
    guard_qubit_count(qubit_count, MAX_QUBITS)?;
    let m = qubit_count;
    let d = 1usize << m;
    let mut mat: DMatrix<Complex64> = DMatrix::zeros(d, d);
    let diag = 0.75 * m as f64 - 0.25 * (m * m.saturating_sub(1)) as f64;
    for b in 0..d {
        mat[(b, b)] += Complex64::new(diag, 0.0);
    }
    for i in 0..m {
        for j in (i + 1)..m {
            // qubit k occupies bit (m - 1 - k), matching the kron order
            let bi = m - 1 - i;
            let bj = m - 1 - j;
            for b in 0..d {
                let x = (b >> bi) & 1;
                let y = (b >> bj) & 1;
                let swapped = if x == y { b } else { b ^ (1 << bi) ^ (1 << bj) };
                mat[(swapped, b)] += Complex64::new(1.0, 0.0);
            }
        }
    }
    Ok(HermitianOperator::new(mat)?.with_label("J2"))
}

fn guard_qubit_count(qubit_count: usize, max: usize) -> Result<()> {
    if qubit_count < 1 || qubit_count > max {
        return Err(Error::QubitCountOutOfRange {
            qubit_count,
            min: 1,
            max,
        });
    }
    Ok(())
}

/// Natural logarithm on the spectrum; requires a full-rank state.
pub fn matrix_log(rho: &DensityMatrix) -> Result<HermitianOperator> {
    let spec = rho.spectrum();
    let tol = RANK_TOLERANCE * spec.max_eigenvalue();
    if spec.min_eigenvalue() < tol {
        return Err(Error::RankDeficient {
            eigenvalue: spec.min_eigenvalue(),
            tol: RANK_TOLERANCE,
        });
    }
    HermitianOperator::new(spec.rebuild(f64::ln))
}

/// exp(H) normalized to unit trace, with the log-partition ln tr exp(H).
///
/// The spectrum is shifted by its maximum before exponentiation, so the
/// result is overflow-safe and invariant under H → H + c·I.
pub fn normalized_exp(h: &HermitianOperator) -> Result<(DensityMatrix, f64)> {
    let spec = spectral_decompose(h)?;
    let shift = spec.max_eigenvalue();
    let weights: Vec<f64> = spec
        .eigenvalues
        .iter()
        .map(|&x| (x - shift).exp())
        .collect();
    let z: f64 = weights.iter().sum();
    let log_partition = z.ln() + shift;

    let probs: Vec<f64> = weights.iter().map(|&w| w / z).collect();
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
    let spectrum = SpectralDecomposition {
        eigenvalues: probs,
        eigenvectors: spec.eigenvectors,
    };
    Ok((DensityMatrix::from_parts(op, spectrum), log_partition))
}

/// tr(ρG) with a hard check that the imaginary residue stays below 1e-9.
pub fn expectation(rho: &DensityMatrix, g: &HermitianOperator) -> Result<f64> {
    check_dims(rho.dim(), g.dim())?;
    let value = trace_product(rho.entries(), g.entries());
    if value.im.abs() > IMAG_RESIDUE_LIMIT {
        return Err(Error::ImaginaryResidue {
            residue: value.im.abs(),
            limit: IMAG_RESIDUE_LIMIT,
        });
    }
    Ok(value.re)
}

/// tr(AB) in O(d²) via Σ_ij A_ij B_ji.
pub(crate) fn trace_product(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> Complex64 {
    let d = a.nrows();
    let mut sum = Complex64::new(0.0, 0.0);
    for i in 0..d {
        for j in 0..d {
            sum += a[(i, j)] * b[(j, i)];
        }
    }
    sum
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::sampling::unit_uniform;

    pub(crate) fn random_hermitian(dim: usize, seed: u64) -> HermitianOperator {
        let mut m = DMatrix::zeros(dim, dim);
        let mut k = 0u64;
        for i in 0..dim {
            for j in 0..dim {
                let re = unit_uniform(seed, 7, k) - 0.5;
                let im = unit_uniform(seed, 11, k) - 0.5;
                m[(i, j)] = Complex64::new(re, im);
                k += 1;
            }
        }
        let adj = m.adjoint();
        HermitianOperator::new((m + adj) * Complex64::new(0.5, 0.0)).unwrap()
    }

    pub(crate) fn random_density(dim: usize, seed: u64) -> DensityMatrix {
        let mut w = DMatrix::zeros(dim, dim);
        let mut k = 0u64;
        for i in 0..dim {
            for j in 0..dim {
                let re = unit_uniform(seed, 13, k) - 0.5;
                let im = unit_uniform(seed, 17, k) - 0.5;
                w[(i, j)] = Complex64::new(re, im);
                k += 1;
            }
        }
        let gram = &w * w.adjoint();
        let trace: f64 = (0..dim).map(|i| gram[(i, i)].re).sum();
        // keep it comfortably full rank
        let mixed = gram * Complex64::new(0.9 / trace, 0.0)
            + DMatrix::identity(dim, dim) * Complex64::new(0.1 / dim as f64, 0.0);
        DensityMatrix::new(HermitianOperator::new(mixed).unwrap()).unwrap()
    }

    #[test]
    fn single_qubit_pauli_z_spin() {
        let s = spin_component(0, Axis::Z, 1).unwrap();
        assert_eq!(s.dim(), 2);
        assert!((s.entries()[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!((s.entries()[(1, 1)].re + 0.5).abs() < 1e-15);
        assert!(s.entries()[(0, 1)].norm() < 1e-15);
    }

    #[test]
    fn spin_components_traceless_and_involutive() {
        for m in 1..=4 {
            for i in 0..m {
                for axis in Axis::ALL {
                    let s = spin_component(i, axis, m).unwrap();
                    assert!(s.trace().abs() < 1e-12, "trace of S_{i}^{axis:?}");
                    let sq = &(s.entries() * s.entries())
                        - DMatrix::identity(s.dim(), s.dim()) * Complex64::new(0.25, 0.0);
                    assert!(max_abs_entry(&sq) < 1e-14, "S² != I/4 at m={m}");
                }
            }
        }
    }

    #[test]
    fn spins_commute_across_qubits() {
        let m = 3;
        for i in 0..m {
            for j in 0..m {
                if i == j {
                    continue;
                }
                for a in Axis::ALL {
                    for b in Axis::ALL {
                        let si = spin_component(i, a, m).unwrap();
                        let sj = spin_component(j, b, m).unwrap();
                        assert!(HermitianOperator::commutator_norm(&si, &sj) <= 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn spin_index_out_of_range() {
        assert!(matches!(
            spin_component(2, Axis::X, 2),
            Err(Error::QubitIndexOutOfRange { .. })
        ));
        assert!(matches!(
            total_j_squared(13),
            Err(Error::QubitCountOutOfRange { .. })
        ));
        assert!(matches!(
            total_j_squared(0),
            Err(Error::QubitCountOutOfRange { .. })
        ));
    }

    #[test]
    fn j_squared_single_qubit_is_three_quarters() {
        let j2 = total_j_squared(1).unwrap();
        let expected = DMatrix::identity(2, 2) * Complex64::new(0.75, 0.0);
        assert!(max_abs_entry(&(j2.entries() - expected)) < 1e-14);
    }

    #[test]
    fn j_squared_matches_literal_sum_of_squares() {
        for m in 1..=4 {
            let j2 = total_j_squared(m).unwrap();
            let d = 1usize << m;
            let mut literal: DMatrix<Complex64> = DMatrix::zeros(d, d);
            for axis in Axis::ALL {
                let mut total: DMatrix<Complex64> = DMatrix::zeros(d, d);
                for i in 0..m {
                    total += spin_component(i, axis, m).unwrap().entries();
                }
                literal += &total * &total;
            }
            assert!(
                max_abs_entry(&(j2.entries() - literal)) < 1e-12,
                "J² mismatch at m={m}"
            );
        }
    }

    #[test]
    fn j_squared_four_qubit_multiplicities() {
        let j2 = total_j_squared(4).unwrap();
        let spec = spectral_decompose(&j2).unwrap();
        let counts = [(0.0, 2usize), (2.0, 9usize), (6.0, 5usize)];
        let mut idx = 0;
        for (value, count) in counts {
            for _ in 0..count {
                assert!(
                    (spec.eigenvalues[idx] - value).abs() < 1e-10,
                    "eigenvalue {idx} = {} != {value}",
                    spec.eigenvalues[idx]
                );
                idx += 1;
            }
        }
        assert_eq!(idx, 16);
    }

    #[test]
    fn j_squared_commutes_with_total_spin() {
        let m = 4;
        let j2 = total_j_squared(m).unwrap();
        for axis in Axis::ALL {
            let d = 1usize << m;
            let mut total: DMatrix<Complex64> = DMatrix::zeros(d, d);
            for i in 0..m {
                total += spin_component(i, axis, m).unwrap().entries();
            }
            let total_op = HermitianOperator::new(total).unwrap();
            assert!(HermitianOperator::commutator_norm(&j2, &total_op) <= 1e-11);
        }
    }

    #[test]
    fn maximally_mixed_j_squared_expectation() {
        let rho = DensityMatrix::maximally_mixed(16);
        let j2 = total_j_squared(4).unwrap();
        assert!((expectation(&rho, &j2).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn pauli_z_spectrum() {
        let z =
            HermitianOperator::new(DMatrix::from_fn(2, 2, |i, j| pauli(Axis::Z)[(i, j)])).unwrap();
        let spec = spectral_decompose(&z).unwrap();
        assert!((spec.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((spec.eigenvalues[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn decompose_reconstructs_random_matrices() {
        for trial in 0..1000u64 {
            let dim = 2 + (trial % 15) as usize; // 2..=16
            let h = random_hermitian(dim, trial);
            let spec = spectral_decompose(&h).unwrap();
            let err = max_abs_entry(&(spec.reconstruct() - h.entries()));
            assert!(err <= 1e-11, "reconstruction error {err} at dim {dim}");
            let gram = spec.eigenvectors.adjoint() * &spec.eigenvectors;
            let unit_err = max_abs_entry(&(gram - DMatrix::identity(dim, dim)));
            assert!(unit_err <= 1e-11, "unitarity error {unit_err}");
            for k in 1..dim {
                assert!(spec.eigenvalues[k] >= spec.eigenvalues[k - 1]);
            }
        }
    }

    #[test]
    fn decompose_is_deterministic() {
        let h = random_hermitian(8, 42);
        let a = spectral_decompose(&h).unwrap();
        let b = spectral_decompose(&h).unwrap();
        assert_eq!(a.eigenvalues, b.eigenvalues);
        assert_eq!(
            a.eigenvectors.as_slice().len(),
            b.eigenvectors.as_slice().len()
        );
        for (x, y) in a.eigenvectors.iter().zip(b.eigenvectors.iter()) {
            assert_eq!(x, y);
        }
    }

    #[test]
    fn matrix_log_of_maximally_mixed() {
        let rho = DensityMatrix::maximally_mixed(4);
        let log = matrix_log(&rho).unwrap();
        let expected = DMatrix::identity(4, 4) * Complex64::new(-(4.0_f64.ln()), 0.0);
        assert!(max_abs_entry(&(log.entries() - expected)) < 1e-13);
    }

    #[test]
    fn exp_log_round_trip() {
        for seed in 0..20u64 {
            let rho = random_density(6, seed);
            let log = matrix_log(&rho).unwrap();
            let (back, _) = normalized_exp(&log).unwrap();
            assert!(rho.max_abs_diff(&back) <= 1e-10);
        }
    }

    #[test]
    fn matrix_log_rejects_pure_state() {
        let pure = DensityMatrix::basis_state(2, 0).unwrap();
        assert!(matches!(
            matrix_log(&pure),
            Err(Error::RankDeficient { .. })
        ));
    }

    #[test]
    fn normalized_exp_of_zero_is_maximally_mixed() {
        let (rho, lnz) = normalized_exp(&HermitianOperator::zero(8)).unwrap();
        assert!(rho.max_abs_diff(&DensityMatrix::maximally_mixed(8)) < 1e-14);
        assert!((lnz - 8.0_f64.ln()).abs() < 1e-13);
    }

    #[test]
    fn normalized_exp_shift_invariance() {
        let h = random_hermitian(5, 99);
        let (rho, lnz) = normalized_exp(&h).unwrap();
        for shift in [-50.0, 50.0] {
            let shifted = h
                .add(&HermitianOperator::identity(5).scaled(shift))
                .unwrap();
            let (rho_s, lnz_s) = normalized_exp(&shifted).unwrap();
            assert!(rho.max_abs_diff(&rho_s) <= 1e-12);
            assert!((lnz_s - lnz - shift).abs() <= 1e-10);
        }
    }

    #[test]
    fn four_qubit_canonical_j2_expectation() {
        // analytic check: exponent -0.1783375 J² gives <J²> = 2.28557154563
        let j2 = total_j_squared(4).unwrap();
        let (rho, lnz) = normalized_exp(&j2.scaled(-0.1783375)).unwrap();
        assert!((rho.operator().trace() - 1.0).abs() < 1e-12);
        let j2_mean = expectation(&rho, &j2).unwrap();
        assert!((j2_mean - 2.28557154563).abs() < 1e-9);
        assert!((lnz - 10.0149993584_f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn expectation_basis_state_pauli_z() {
        let rho = DensityMatrix::basis_state(2, 0).unwrap();
        let z = HermitianOperator::from_diagonal(&[1.0, -1.0]);
        assert!((expectation(&rho, &z).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn expectation_linearity() {
        let rho = random_density(8, 5);
        let g = random_hermitian(8, 6);
        let h = random_hermitian(8, 7);
        let (a, b) = (0.7, -1.3);
        let combined = g.scaled(a).add(&h.scaled(b)).unwrap();
        let lhs = expectation(&rho, &combined).unwrap();
        let rhs = a * expectation(&rho, &g).unwrap() + b * expectation(&rho, &h).unwrap();
        assert!((lhs - rhs).abs() <= 1e-11);
    }

    #[test]
    fn expectation_dimension_mismatch() {
        let rho = DensityMatrix::maximally_mixed(2);
        let g = HermitianOperator::identity(4);
        assert!(matches!(
            expectation(&rho, &g),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn constructor_rejects_non_hermitian() {
        let mut m = DMatrix::zeros(2, 2);
        m[(0, 1)] = Complex64::new(1.0, 0.0);
        assert!(matches!(
            HermitianOperator::new(m),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn density_matrix_rejects_bad_trace_and_negative_eigenvalues() {
        let half = HermitianOperator::from_diagonal(&[0.25, 0.25]);
        assert!(matches!(
            DensityMatrix::new(half),
            Err(Error::TraceNotOne { .. })
        ));
        let indefinite = HermitianOperator::from_diagonal(&[1.5, -0.5]);
        assert!(matches!(
            DensityMatrix::new(indefinite),
            Err(Error::NegativeEigenvalue { .. })
        ));
    }
}
