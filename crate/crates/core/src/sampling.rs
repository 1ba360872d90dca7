//! Synthetic sample means drawn from the spectral distribution of an
//! observable under a known state.
//!
//! Randomness comes from a counter-based construction so that every stream is
//! a documented pure function of `(seed, stream, index)`: no generator state
//! is carried between shots, identical inputs give identical datasets, and
//! per-observable substreams can be evaluated in any order.

use crate::error::{Error, Result};
use crate::maxent::ObservableSet;
use crate::operators::{DensityMatrix, HermitianOperator};

/// SplitMix64 finalizer: the bijective mixing step of Steele et al.'s
/// SplitMix64 generator.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform variate in [0, 1) for shot `index` of stream `stream` under `seed`.
///
/// Defined as
/// `mix64(mix64(mix64(seed) ^ mix64(stream + G1)) ^ mix64(index + G2)) >> 11`
/// scaled by 2^-53, with G1 = 0x9E3779B97F4A7C15 and G2 = 0xD1B54A32D192ED03.
#[inline]
pub fn unit_uniform(seed: u64, stream: u64, index: u64) -> f64 {
    let h = mix64(seed);
    let h = mix64(h ^ mix64(stream.wrapping_add(0x9E37_79B9_7F4A_7C15)));
    let h = mix64(h ^ mix64(index.wrapping_add(0xD1B5_4A32_D192_ED03)));
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Identifies one measurement stream: all shots of one observable.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ShotStream {
    pub seed: u64,
    pub stream: u64,
}

impl ShotStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    #[inline]
    fn uniform(&self, index: u64) -> f64 {
        unit_uniform(self.seed, self.stream, index)
    }
}

/// Measurement outcomes of an observable under a state: distinct eigenvalues
/// with degenerate levels merged, and their probabilities.
#[derive(Clone, Debug)]
struct OutcomeDistribution {
    values: Vec<f64>,
    cumulative: Vec<f64>,
}

impl OutcomeDistribution {
    fn build(rho: &DensityMatrix, observable: &HermitianOperator) -> Result<Self> {
        if rho.dim() != observable.dim() {
            return Err(Error::DimensionMismatch {
                left: rho.dim(),
                right: observable.dim(),
            });
        }
        let spec = crate::operators::spectral_decompose(observable)?;
        let d = spec.dim();
        // projector weights <v_k| rho |v_k>
        let mut weights = Vec::with_capacity(d);
        for k in 0..d {
            let col = spec.eigenvectors.column(k);
            let mut w = 0.0;
            for i in 0..d {
                for j in 0..d {
                    w += (col[i].conj() * rho.entries()[(i, j)] * col[j]).re;
                }
            }
            weights.push(w.max(0.0));
        }
        let total: f64 = weights.iter().sum();

        // merge degenerate eigenvalues into single outcomes
        let spread = (spec.max_eigenvalue() - spec.min_eigenvalue()).max(1e-300);
        let merge_tol = 1e-9 * spread;
        let mut values = Vec::new();
        let mut probs = Vec::new();
        let mut group_start = 0;
        for k in 1..=d {
            let split = k == d || spec.eigenvalues[k] - spec.eigenvalues[k - 1] > merge_tol;
            if split {
                let group = group_start..k;
                let value = group.clone().map(|i| spec.eigenvalues[i]).sum::<f64>()
                    / (k - group_start) as f64;
                let prob = group.map(|i| weights[i]).sum::<f64>() / total;
                values.push(value);
                probs.push(prob);
                group_start = k;
            }
        }
        let mut cumulative = Vec::with_capacity(probs.len());
        let mut acc = 0.0;
        for p in &probs {
            acc += p;
            cumulative.push(acc);
        }
        // guarantee the last bucket catches u -> 1
        if let Some(last) = cumulative.last_mut() {
            *last = 1.0;
        }
        Ok(Self { values, cumulative })
    }

    #[inline]
    fn draw(&self, u: f64) -> f64 {
        let k = self.cumulative.partition_point(|&c| c <= u);
        self.values[k.min(self.values.len() - 1)]
    }
}

/// Mean of N outcomes drawn from the spectral distribution of `observable`
/// under `rho`. Deterministic given the stream.
pub fn sample_mean(
    rho: &DensityMatrix,
    observable: &HermitianOperator,
    shots: u64,
    stream: ShotStream,
) -> Result<f64> {
    if shots < 1 {
        return Err(Error::OutOfBounds {
            name: "shots",
            value: shots as f64,
            lo: 1.0,
            hi: f64::INFINITY,
        });
    }
    let dist = OutcomeDistribution::build(rho, observable)?;
    let mut sum = 0.0;
    for k in 0..shots {
        sum += dist.draw(stream.uniform(k));
    }
    Ok(sum / shots as f64)
}

/// Simulated sample means for a whole observable set, one independent
/// N-shot stream per observable (stream id = observable index).
#[derive(Clone, Debug)]
pub struct MeasurementDataset {
    pub means: Vec<f64>,
    pub sample_size: u64,
    pub seed: u64,
    pub truth_label: Option<String>,
}

pub fn simulate_dataset(
    rho: &DensityMatrix,
    set: &ObservableSet,
    sample_size: u64,
    seed: u64,
) -> Result<MeasurementDataset> {
    let mut means = Vec::with_capacity(set.len());
    for (idx, observable) in set.observables().iter().enumerate() {
        means.push(sample_mean(
            rho,
            observable,
            sample_size,
            ShotStream::new(seed, idx as u64),
        )?);
    }
    Ok(MeasurementDataset {
        means,
        sample_size,
        seed,
        truth_label: None,
    })
}
