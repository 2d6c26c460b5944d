//! Eigenvalue counts of Haar-random unitaries in an arc.
//!
//! The eigenangles of a Haar unitary form a projection determinantal
//! process; restricted to an arc A the count is Poisson-binomial in the
//! eigenvalues of an explicit Toeplitz matrix (the Fourier compression of
//! the projection onto A). The Monte Carlo side samples actual unitaries
//! and counts eigenangles; the Toeplitz spectrum is the exact reference.

use nalgebra::{DMatrix, Schur};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::counts::{poisson_binomial_pmf, standardized_count};
use crate::error::{Error, Result};
use crate::kernel::HermitianKernel;
use crate::rng::{replicate_rng, DOMAIN_CUE};
use crate::sampler::SamplerConfig;
use crate::C64;

use std::f64::consts::PI;

use super::{haar_unitary, Arc};

/// Statistics of an arc-count run: empirical moments of the raw and
/// standardized counts against their exact references.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ArcCountReport {
    pub n: usize,
    pub arc_length: f64,
    pub arc_center: f64,
    pub replicates: usize,
    pub seed: u64,
    /// Exact mean Σλ of the count (equals n·|A|/2π).
    pub exact_mean: f64,
    /// Exact variance Σλ(1−λ) of the count.
    pub exact_variance: f64,
    pub empirical_mean: f64,
    /// Sample variance of the counts (about the sample mean, n−1).
    pub empirical_variance: f64,
    /// Mean of the standardized statistic (count − exact mean)·π/√(ln n).
    pub standardized_mean: f64,
    /// Sample variance of the standardized statistic.
    pub standardized_variance: f64,
    /// Total variation between the empirical count histogram and the
    /// Poisson-binomial pmf of the Toeplitz eigenvalues.
    pub count_tv: f64,
    /// Empirical histogram of the counts, indexed 0..=n.
    pub count_histogram: Vec<u64>,
}

/// Eigenvalues (descending, in [0,1]) of the n×n Toeplitz matrix
/// `M_jk = (1/2π)∫_A e^{−i(j−k)θ} dθ`: the exact spectrum governing the
/// count of eigenangles in the arc.
pub fn cue_arc_eigenvalues(n: usize, arc: &Arc) -> Result<Vec<f64>> {
    let l = arc.length();
    let c = arc.center();
    let m = DMatrix::from_fn(n, n, |j, k| {
        if j == k {
            C64::new(l / (2.0 * PI), 0.0)
        } else {
            let d = j as f64 - k as f64;
            let magnitude = (d * l / 2.0).sin() / (PI * d);
            // phase from the arc's offset from center 0
            C64::new(0.0, -d * c).exp() * magnitude
        }
    });
    let kernel = HermitianKernel::from_matrix(m)?;
    Ok(kernel.spectral_decompose()?.eigenvalues().to_vec())
}

/// Eigenangles of one Haar-random unitary, in (−π, π].
pub fn cue_eigenangles(n: usize, rng: &mut crate::rng::ReplicateRng) -> Result<Vec<f64>> {
    let u = haar_unitary(n, rng);
    let schur = Schur::try_new(u, 1e-13, 100_000).ok_or(Error::DecompositionFailure)?;
    let t = schur.unpack().1;
    Ok((0..n).map(|j| t[(j, j)].arg()).collect())
}

/// Samples `replicates` Haar unitaries, counts eigenangles in the arc, and
/// reports empirical moments beside the exact Toeplitz references.
pub fn arc_count_experiment(
    n: usize,
    arc: &Arc,
    replicates: usize,
    config: SamplerConfig,
) -> Result<ArcCountReport> {
    if n < 2 {
        return Err(Error::OutOfRange {
            context: format!("arc-count experiment needs n >= 2, got {n}"),
        });
    }
    if replicates < 100 {
        return Err(Error::OutOfRange {
            context: format!("need at least 100 replicates, got {replicates}"),
        });
    }
    let counts: Vec<u64> = (0..replicates)
        .into_par_iter()
        .map(|i| {
            let mut rng = replicate_rng(config.seed, DOMAIN_CUE, i as u64);
            let angles = cue_eigenangles(n, &mut rng)?;
            Ok(angles.iter().filter(|&&t| arc.contains(t)).count() as u64)
        })
        .collect::<Result<_>>()?;

    let lambdas = cue_arc_eigenvalues(n, arc)?;
    let pb = poisson_binomial_pmf(&lambdas)?;
    let exact_mean = pb.mean();
    let exact_variance = pb.variance();

    let r = replicates as f64;
    let empirical_mean = counts.iter().map(|&c| c as f64).sum::<f64>() / r;
    let empirical_variance = counts
        .iter()
        .map(|&c| (c as f64 - empirical_mean).powi(2))
        .sum::<f64>()
        / (r - 1.0);

    let standardized: Vec<f64> = counts
        .iter()
        .map(|&c| standardized_count(c, n, exact_mean))
        .collect::<Result<_>>()?;
    let standardized_mean = standardized.iter().sum::<f64>() / r;
    let standardized_variance = standardized
        .iter()
        .map(|&z| (z - standardized_mean).powi(2))
        .sum::<f64>()
        / (r - 1.0);

    let mut count_histogram = vec![0u64; n + 1];
    for &c in &counts {
        count_histogram[c as usize] += 1;
    }
    let count_tv = 0.5
        * pb.pmf()
            .iter()
            .enumerate()
            .map(|(k, &p)| (count_histogram[k] as f64 / r - p).abs())
            .sum::<f64>();

    Ok(ArcCountReport {
        n,
        arc_length: arc.length(),
        arc_center: arc.center(),
        replicates,
        seed: config.seed,
        exact_mean,
        exact_variance,
        empirical_mean,
        empirical_variance,
        standardized_mean,
        standardized_variance,
        count_tv,
        count_histogram,
    })
}
