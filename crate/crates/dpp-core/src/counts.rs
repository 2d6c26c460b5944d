//! Distribution of the number of points.
//!
//! The point count of the process equals a sum of independent
//! Bernoulli(λ_j) variables over the kernel spectrum, so its law is
//! Poisson-binomial in the eigenvalues — exactly, not asymptotically. The
//! count in a window E uses the eigenvalues of the restricted kernel.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::kernel::HermitianKernel;
use crate::subset::SubsetIndex;

/// Success probabilities (λ_j) together with the exact pmf of their
/// Bernoulli-sum, indexed 0..=n.
#[derive(Clone, Debug)]
pub struct PoissonBinomial {
    lambdas: Vec<f64>,
    pmf: Vec<f64>,
}

impl PoissonBinomial {
    pub fn n(&self) -> usize {
        self.lambdas.len()
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    /// pmf[k] = ℙ(count = k), length n+1.
    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn mean(&self) -> f64 {
        compensated_sum(self.lambdas.iter().copied())
    }

    pub fn variance(&self) -> f64 {
        compensated_sum(self.lambdas.iter().map(|&l| l * (1.0 - l)))
    }
}

/// Exact pmf of Σ Bernoulli(λ_j) by iterative convolution of the factors
/// (1−λ_j + λ_j z), ascending in λ. All terms are nonnegative, so the
/// convolution is cancellation-free.
pub fn poisson_binomial_pmf(lambdas: &[f64]) -> Result<PoissonBinomial> {
    for &l in lambdas {
        if !(0.0..=1.0).contains(&l) {
            return Err(Error::OutOfRange {
                context: format!("Bernoulli probability {l} outside [0, 1]"),
            });
        }
    }
    let mut order = lambdas.to_vec();
    order.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut pmf = vec![1.0f64];
    for &l in &order {
        let mut next = vec![0.0; pmf.len() + 1];
        for (k, &p) in pmf.iter().enumerate() {
            next[k] += p * (1.0 - l);
            next[k + 1] += p * l;
        }
        pmf = next;
    }
    let pb = PoissonBinomial {
        lambdas: lambdas.to_vec(),
        pmf,
    };
    certify(&pb)?;
    Ok(pb)
}

/// Law of #(X ∩ E): Poisson-binomial in the spectrum of the restriction
/// K_E. The empty window gives the deterministic count 0.
pub fn count_distribution(k: &HermitianKernel, e: &SubsetIndex) -> Result<PoissonBinomial> {
    e.check_range(k.n())?;
    if e.is_empty() {
        return Ok(PoissonBinomial {
            lambdas: Vec::new(),
            pmf: vec![1.0],
        });
    }
    let spec = k.restrict(e)?.spectral_decompose()?;
    poisson_binomial_pmf(spec.eigenvalues())
}

/// (mean, variance) = (Σλ, Σλ(1−λ)).
pub fn count_moments(pb: &PoissonBinomial) -> (f64, f64) {
    (pb.mean(), pb.variance())
}

/// The normal-limit standardization `(count − mean)·π/√(ln n)`.
pub fn standardized_count(count: u64, n: usize, mean: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::OutOfRange {
            context: format!("standardization needs n >= 2, got {n}"),
        });
    }
    Ok((count as f64 - mean) * PI / (n as f64).ln().sqrt())
}

/// Construction-time invariant checks: normalization and the two moments.
fn certify(pb: &PoissonBinomial) -> Result<()> {
    if pb.pmf.iter().any(|&p| p < 0.0) {
        return Err(Error::NumericalInconsistency {
            context: "count pmf entry negative".into(),
            value: *pb
                .pmf
                .iter()
                .min_by(|a, b| a.partial_cmp(b).unwrap())
                .unwrap(),
        });
    }
    let total = compensated_sum(pb.pmf.iter().copied());
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::NumericalInconsistency {
            context: "count pmf normalization".into(),
            value: total - 1.0,
        });
    }
    let mean_from_pmf = compensated_sum(pb.pmf.iter().enumerate().map(|(k, &p)| k as f64 * p));
    if (mean_from_pmf - pb.mean()).abs() > 1e-10 {
        return Err(Error::NumericalInconsistency {
            context: "count pmf mean vs Σλ".into(),
            value: mean_from_pmf - pb.mean(),
        });
    }
    let mu = pb.mean();
    let var_from_pmf = compensated_sum(
        pb.pmf
            .iter()
            .enumerate()
            .map(|(k, &p)| (k as f64 - mu).powi(2) * p),
    );
    if (var_from_pmf - pb.variance()).abs() > 1e-10 {
        return Err(Error::NumericalInconsistency {
            context: "count pmf variance vs Σλ(1−λ)".into(),
            value: var_from_pmf - pb.variance(),
        });
    }
    Ok(())
}

fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}
