//! Sampler distribution checks against the exhaustive law, plus the
//! schedule-independence guarantee behind the thread-count contract.

mod common;

use common::random_kernel;
use dpp_core::measure::full_pmf;
use dpp_core::rng::{replicate_rng, DOMAIN_SAMPLE};
use dpp_core::sampler::{empirical_tv_distance, sample_batch, sample_once, SamplerConfig};

#[test]
fn moderate_batches_track_the_exact_law() {
    let k = random_kernel(4, 300, 0.0, 1.0);
    let spec = k.spectral_decompose().unwrap();
    let pmf = full_pmf(&k).unwrap();
    let hist = sample_batch(&spec, 40_000, SamplerConfig { seed: 3 }).unwrap();
    let tv = empirical_tv_distance(&hist, &pmf).unwrap();
    // TV of 40k draws over 16 cells concentrates well below this bound
    assert!(tv < 0.02, "tv = {tv}");
}

#[test]
fn projection_kernels_always_yield_rank_many_points() {
    let rank = 3usize;
    let v = common::random_unitary(5, 301);
    let eigenvalues = vec![1.0, 1.0, 1.0, 0.0, 0.0];
    let spec = dpp_core::kernel::SpectralDecomposition::from_parts(eigenvalues, v).unwrap();
    for i in 0..200u64 {
        let mut rng = replicate_rng(4, DOMAIN_SAMPLE, i);
        let s = sample_once(&spec, &mut rng).unwrap();
        assert_eq!(s.len(), rank, "draw {i}");
    }
}

#[test]
fn histograms_are_identical_for_any_thread_count() {
    let k = random_kernel(4, 302, 0.0, 1.0);
    let spec = k.spectral_decompose().unwrap();
    let config = SamplerConfig { seed: 9 };
    let mut serialized = Vec::new();
    for threads in [1usize, 2, 8] {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        let hist = pool
            .install(|| sample_batch(&spec, 20_000, config))
            .unwrap();
        serialized.push(serde_json::to_vec(&hist).unwrap());
    }
    assert_eq!(serialized[0], serialized[1]);
    assert_eq!(serialized[0], serialized[2]);
}

#[test]
fn sample_sizes_follow_the_spectral_bernoulli_law() {
    let k = random_kernel(3, 303, 0.0, 1.0);
    let spec = k.spectral_decompose().unwrap();
    let hist = sample_batch(&spec, 5_000, SamplerConfig { seed: 11 }).unwrap();
    let sizes = hist.count_histogram();
    let pb = dpp_core::counts::poisson_binomial_pmf(spec.eigenvalues()).unwrap();
    for (m, &observed) in sizes.iter().enumerate() {
        let expected = pb.pmf()[m] * 5_000.0;
        assert!(
            (observed as f64 - expected).abs() < 5.0 * (expected.max(1.0)).sqrt() + 10.0,
            "size {m}: observed {observed}, expected {expected:.1}"
        );
    }
}
