//! Exact sampling of configurations, via the spectral mixture of
//! projection processes.
//!
//! Phase 1 activates eigenvector `j` independently with probability λ_j;
//! Phase 2 samples exactly `|T|` points from the projection process with
//! kernel `P = Σ_{j∈T} v_j v_j†` by the chain rule: pick a point with
//! probability `diag(P)_i / rank`, then deflate `P` by the rank-one
//! projector onto the picked column. The resulting subset law matches the
//! exact pmf; every batch is reproducible from a single seed regardless of
//! thread count.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::SpectralDecomposition;
use crate::measure::ExactPmf;
use crate::rng::{replicate_rng, ReplicateRng, DOMAIN_SAMPLE};
use crate::subset::SubsetIndex;
use crate::C64;

/// Eigenvalues below this are treated as exactly 0 in Phase 1 (and above
/// one minus this as exactly 1), consuming no randomness.
const LAMBDA_CLIP: f64 = 1e-12;

/// Allowed drift between the diagonal mass of the deflated projection and
/// its remaining rank before re-orthogonalization (then failure).
const MASS_TOL: f64 = 1e-6;

/// Batch sampling configuration. The seed fully determines the output;
/// replicate `i` always consumes the same derived substream.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig { seed: 0 }
    }
}

/// Histogram of sampled configurations.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "HistogramWire", try_from = "HistogramWire")]
pub struct SampleHistogram {
    pub n: usize,
    pub draws: u64,
    pub seed: u64,
    pub counts: BTreeMap<SubsetIndex, u64>,
}

impl SampleHistogram {
    /// Empirical frequency of the configuration `s`.
    pub fn frequency(&self, s: &SubsetIndex) -> f64 {
        let c = self.counts.get(s).copied().unwrap_or(0);
        c as f64 / self.draws as f64
    }

    /// Histogram of configuration sizes, indexed 0..=n.
    pub fn count_histogram(&self) -> Vec<u64> {
        let mut h = vec![0u64; self.n + 1];
        for (s, &c) in &self.counts {
            h[s.len()] += c;
        }
        h
    }
}

/// JSON form: {"n":…, "draws":…, "seed":…, "counts": {"0,2": 123, …}}.
#[derive(Serialize, Deserialize)]
struct HistogramWire {
    n: usize,
    draws: u64,
    seed: u64,
    counts: BTreeMap<String, u64>,
}

impl From<SampleHistogram> for HistogramWire {
    fn from(h: SampleHistogram) -> Self {
        HistogramWire {
            n: h.n,
            draws: h.draws,
            seed: h.seed,
            counts: h
                .counts
                .into_iter()
                .map(|(s, c)| (s.to_string(), c))
                .collect(),
        }
    }
}

impl TryFrom<HistogramWire> for SampleHistogram {
    type Error = String;

    fn try_from(w: HistogramWire) -> std::result::Result<Self, String> {
        let mut counts = BTreeMap::new();
        for (key, c) in w.counts {
            let s: SubsetIndex = key.parse().map_err(|e| format!("bad subset key: {e}"))?;
            s.check_range(w.n).map_err(|e| e.to_string())?;
            counts.insert(s, c);
        }
        Ok(SampleHistogram {
            n: w.n,
            draws: w.draws,
            seed: w.seed,
            counts,
        })
    }
}

/// Draws one configuration. The caller supplies the RNG state, so repeat
/// calls continue one stream; batch use derives one stream per replicate.
pub fn sample_once(spec: &SpectralDecomposition, rng: &mut ReplicateRng) -> Result<SubsetIndex> {
    let n = spec.n();
    // Phase 1: Bernoulli(λ_j) activation of eigenvectors.
    let mut active: Vec<usize> = Vec::new();
    for (j, &l) in spec.eigenvalues().iter().enumerate() {
        if l < LAMBDA_CLIP {
            continue;
        }
        if l > 1.0 - LAMBDA_CLIP || rng.gen::<f64>() < l {
            active.push(j);
        }
    }
    if active.is_empty() {
        return Ok(SubsetIndex::empty());
    }
    // Phase 2: chain-rule sampling from the projection Σ v_j v_j†.
    let v = spec.eigenvectors();
    let mut p = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
    for &j in &active {
        let col = v.column(j);
        for a in 0..n {
            for b in 0..n {
                p[(a, b)] += col[a] * col[b].conj();
            }
        }
    }
    let mut picked: Vec<usize> = Vec::with_capacity(active.len());
    let mut remaining = active.len();
    let mut reorthogonalized = false;
    while remaining > 0 {
        let mass: f64 = (0..n).map(|i| p[(i, i)].re.max(0.0)).sum();
        if (mass - remaining as f64).abs() > MASS_TOL {
            if reorthogonalized {
                return Err(Error::NumericalBreakdown {
                    diagonal_mass: mass,
                    remaining_rank: remaining,
                });
            }
            reorthogonalized = true;
            p = reproject(&p, remaining)?;
            let mass: f64 = (0..n).map(|i| p[(i, i)].re.max(0.0)).sum();
            if (mass - remaining as f64).abs() > MASS_TOL {
                return Err(Error::NumericalBreakdown {
                    diagonal_mass: mass,
                    remaining_rank: remaining,
                });
            }
            continue;
        }
        // pick i with probability diag_i / mass
        let u = rng.gen::<f64>() * mass;
        let mut cum = 0.0f64;
        let mut chosen = None;
        for i in 0..n {
            let d = p[(i, i)].re.max(0.0);
            if d == 0.0 {
                continue;
            }
            cum += d;
            if u < cum {
                chosen = Some(i);
                break;
            }
        }
        let i = match chosen {
            Some(i) => i,
            // u landed on the top edge of the last positive cell
            None => (0..n)
                .rev()
                .find(|&i| p[(i, i)].re > 0.0)
                .expect("positive diagonal mass"),
        };
        picked.push(i);
        // rank-one deflation: P ← P − P[:,i]P[i,:]/P_ii, then zero row/col i
        let pii = p[(i, i)].re;
        let col: Vec<C64> = (0..n).map(|a| p[(a, i)]).collect();
        for a in 0..n {
            for b in 0..n {
                p[(a, b)] -= col[a] * col[b].conj() / pii;
            }
        }
        for a in 0..n {
            p[(a, i)] = C64::new(0.0, 0.0);
            p[(i, a)] = C64::new(0.0, 0.0);
        }
        remaining -= 1;
    }
    Ok(SubsetIndex::new(picked))
}

/// Snaps a drifted deflated matrix back onto the nearest rank-`rank`
/// projection via its top eigenvectors.
fn reproject(p: &DMatrix<C64>, rank: usize) -> Result<DMatrix<C64>> {
    let n = p.nrows();
    let eig = SymmetricEigen::try_new(p.clone(), f64::EPSILON, 100_000)
        .ok_or(Error::DecompositionFailure)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let mut out = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
    for &j in order.iter().take(rank) {
        let col = eig.eigenvectors.column(j);
        for a in 0..n {
            for b in 0..n {
                out[(a, b)] += col[a] * col[b].conj();
            }
        }
    }
    Ok(out)
}

/// Draws `count` independent configurations and histograms them.
/// Replicates are partitioned across threads, but replicate `i` always uses
/// the substream derived from `(seed, i)`, so the histogram is identical
/// for every thread count.
pub fn sample_batch(
    spec: &SpectralDecomposition,
    count: u64,
    config: SamplerConfig,
) -> Result<SampleHistogram> {
    if count == 0 {
        return Err(Error::OutOfRange {
            context: "sample count must be at least 1".into(),
        });
    }
    let counts = (0..count)
        .into_par_iter()
        .try_fold(BTreeMap::new, |mut acc: BTreeMap<SubsetIndex, u64>, i| {
            let mut rng = replicate_rng(config.seed, DOMAIN_SAMPLE, i);
            let s = sample_once(spec, &mut rng)?;
            *acc.entry(s).or_insert(0) += 1;
            Ok::<_, Error>(acc)
        })
        .try_reduce(BTreeMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            Ok(a)
        })?;
    Ok(SampleHistogram {
        n: spec.n(),
        draws: count,
        seed: config.seed,
        counts,
    })
}

/// Total-variation distance ½·Σ_S |freq(S) − pmf(S)| between an empirical
/// histogram and an exact pmf on the same ground set.
pub fn empirical_tv_distance(histogram: &SampleHistogram, pmf: &ExactPmf) -> Result<f64> {
    if histogram.n != pmf.n() {
        return Err(Error::DimensionMismatch {
            expected: pmf.n(),
            actual: histogram.n,
        });
    }
    for s in histogram.counts.keys() {
        s.check_range(pmf.n())?;
    }
    let mut total = 0.0f64;
    for (s, p) in pmf.iter() {
        total += (histogram.frequency(&s) - p).abs();
    }
    Ok(0.5 * total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::HermitianKernel;
    use crate::measure::full_pmf;

    fn spec_of_diag(diag: &[f64]) -> SpectralDecomposition {
        HermitianKernel::from_diagonal(diag)
            .unwrap()
            .spectral_decompose()
            .unwrap()
    }

    #[test]
    fn deterministic_point() {
        let spec = spec_of_diag(&[1.0, 0.0]);
        let mut rng = replicate_rng(9, DOMAIN_SAMPLE, 0);
        for _ in 0..10 {
            let s = sample_once(&spec, &mut rng).unwrap();
            assert_eq!(s, SubsetIndex::singleton(0));
        }
    }

    #[test]
    fn zero_kernel_samples_empty() {
        let spec = spec_of_diag(&[0.0, 0.0, 0.0]);
        let mut rng = replicate_rng(9, DOMAIN_SAMPLE, 0);
        assert!(sample_once(&spec, &mut rng).unwrap().is_empty());
    }

    #[test]
    fn batch_of_deterministic_kernel() {
        let spec = spec_of_diag(&[1.0, 0.0]);
        let h = sample_batch(&spec, 100, SamplerConfig { seed: 1 }).unwrap();
        assert_eq!(h.counts.len(), 1);
        assert_eq!(h.counts[&SubsetIndex::singleton(0)], 100);
        assert_eq!(h.draws, 100);
    }

    #[test]
    fn identical_seeds_identical_histograms() {
        let spec = spec_of_diag(&[0.7, 0.5, 0.2]);
        let a = sample_batch(&spec, 500, SamplerConfig { seed: 42 }).unwrap();
        let b = sample_batch(&spec, 500, SamplerConfig { seed: 42 }).unwrap();
        assert_eq!(a, b);
        let c = sample_batch(&spec, 500, SamplerConfig { seed: 43 }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn zero_draws_rejected() {
        let spec = spec_of_diag(&[0.5]);
        assert!(matches!(
            sample_batch(&spec, 0, SamplerConfig::default()),
            Err(Error::OutOfRange { .. })
        ));
    }

    #[test]
    fn tv_zero_for_exactly_proportional_histogram() {
        let k = HermitianKernel::from_diagonal(&[0.5, 0.25]).unwrap();
        let pmf = full_pmf(&k).unwrap();
        let mut counts = BTreeMap::new();
        for (s, p) in pmf.iter() {
            counts.insert(s, (p * 16.0).round() as u64);
        }
        let h = SampleHistogram {
            n: 2,
            draws: 16,
            seed: 0,
            counts,
        };
        assert_eq!(empirical_tv_distance(&h, &pmf).unwrap(), 0.0);
    }

    #[test]
    fn tv_one_for_disjoint_supports() {
        let m = DMatrix::from_fn(2, 2, |_, _| C64::new(0.5, 0.0));
        let k = HermitianKernel::from_matrix(m).unwrap();
        let pmf = full_pmf(&k).unwrap(); // mass only on {0} and {1}
        let mut counts = BTreeMap::new();
        counts.insert(SubsetIndex::empty(), 10u64);
        let h = SampleHistogram {
            n: 2,
            draws: 10,
            seed: 0,
            counts,
        };
        assert!((empirical_tv_distance(&h, &pmf).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tv_requires_matching_ground_size() {
        let k = HermitianKernel::from_diagonal(&[0.5, 0.25]).unwrap();
        let pmf = full_pmf(&k).unwrap();
        let h = SampleHistogram {
            n: 3,
            draws: 1,
            seed: 0,
            counts: BTreeMap::new(),
        };
        assert!(matches!(
            empirical_tv_distance(&h, &pmf),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn histogram_serde_round_trip() {
        let spec = spec_of_diag(&[0.7, 0.5, 0.2]);
        let h = sample_batch(&spec, 250, SamplerConfig { seed: 3 }).unwrap();
        let json = serde_json::to_string(&h).unwrap();
        let back: SampleHistogram = serde_json::from_str(&json).unwrap();
        assert_eq!(h, back);
        assert!(json.contains("\"counts\""));
    }

    #[test]
    fn moderate_batch_tracks_exact_pmf() {
        // fixed seed: this is a regression check, not a statistical test
        let k = HermitianKernel::from_diagonal(&[0.6, 0.3]).unwrap();
        let spec = k.spectral_decompose().unwrap();
        let pmf = full_pmf(&k).unwrap();
        let h = sample_batch(&spec, 20_000, SamplerConfig { seed: 5 }).unwrap();
        let tv = empirical_tv_distance(&h, &pmf).unwrap();
        assert!(tv < 0.02, "tv = {tv}");
    }

    #[test]
    fn count_histogram_groups_by_size() {
        let spec = spec_of_diag(&[1.0, 1.0, 0.0]);
        let h = sample_batch(&spec, 50, SamplerConfig { seed: 2 }).unwrap();
        let ch = h.count_histogram();
        assert_eq!(ch, vec![0, 0, 50, 0]);
    }
}
