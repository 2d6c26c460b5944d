//! Cross-checks between independent probability computations: every law
//! here is evaluated two ways that share no code path.

mod common;

use common::random_kernel;
use dpp_core::counts::{count_distribution, poisson_binomial_pmf};
use dpp_core::measure::{
    complement_pmf_check, elementary_probability, full_pmf, inclusion_probability, janossy_weight,
    void_probability,
};
use dpp_core::subset::SubsetIndex;

const SIZES: [usize; 4] = [2, 3, 5, 7];

#[test]
fn pmf_is_a_probability_measure() {
    for (stream, &n) in SIZES.iter().enumerate() {
        let k = random_kernel(n, stream as u64, 0.0, 1.0);
        let pmf = full_pmf(&k).expect("pmf under cap");
        let total: f64 = pmf.probabilities().iter().sum();
        assert!((total - 1.0).abs() < 1e-10, "n={n}: total {total}");
        assert!(pmf.probabilities().iter().all(|&p| p >= 0.0));
    }
}

#[test]
fn superset_sums_of_pmf_recover_inclusion_determinants() {
    for (stream, &n) in SIZES.iter().enumerate() {
        let k = random_kernel(n, 10 + stream as u64, 0.0, 1.0);
        let pmf = full_pmf(&k).unwrap();
        for s_mask in 0u64..1 << n {
            let s = SubsetIndex::from_bitmask(s_mask);
            let direct = inclusion_probability(&k, &s).unwrap();
            let summed: f64 = pmf
                .iter()
                .filter(|(t, _)| t.is_superset(&s))
                .map(|(_, p)| p)
                .sum();
            assert!(
                (direct - summed).abs() < 1e-10,
                "n={n} S={s}: det {direct} vs sum {summed}"
            );
        }
    }
}

#[test]
fn elementary_matches_pmf_entry() {
    for (stream, &n) in SIZES.iter().enumerate() {
        let k = random_kernel(n, 20 + stream as u64, 0.0, 1.0);
        let pmf = full_pmf(&k).unwrap();
        for (s, p) in pmf.iter() {
            let direct = elementary_probability(&k, &s).unwrap();
            assert!((direct - p).abs() < 1e-10, "n={n} S={s}");
        }
    }
}

#[test]
fn complement_distributions_are_mirrors() {
    for (stream, &n) in SIZES.iter().enumerate() {
        let k = random_kernel(n, 30 + stream as u64, 0.0, 1.0);
        let gap = complement_pmf_check(&k).expect("check under cap");
        assert!(gap < 1e-10, "n={n}: complement discrepancy {gap}");
    }
}

#[test]
fn void_probability_equals_pmf_mass_outside_window() {
    for (stream, &n) in SIZES.iter().enumerate() {
        let k = random_kernel(n, 40 + stream as u64, 0.0, 1.0);
        let pmf = full_pmf(&k).unwrap();
        for e_mask in 0u64..1 << n {
            let e = SubsetIndex::from_bitmask(e_mask);
            let fredholm = void_probability(&k, &e).unwrap();
            let mass: f64 = pmf
                .iter()
                .filter(|(t, _)| t.is_disjoint(&e))
                .map(|(_, p)| p)
                .sum();
            assert!(
                (fredholm - mass).abs() < 1e-10,
                "n={n} E={e}: product {fredholm} vs mass {mass}"
            );
        }
    }
}

#[test]
fn janossy_weights_equal_elementary_probabilities_for_strict_contractions() {
    for (stream, &n) in SIZES.iter().enumerate() {
        let k = random_kernel(n, 50 + stream as u64, 0.02, 0.9);
        for s_mask in 0u64..1 << n {
            let s = SubsetIndex::from_bitmask(s_mask);
            let weight = janossy_weight(&k, &s).unwrap();
            let direct = elementary_probability(&k, &s).unwrap();
            assert!(
                (weight - direct).abs() < 1e-9,
                "n={n} S={s}: weight {weight} vs elementary {direct}"
            );
        }
    }
}

#[test]
fn count_marginal_of_pmf_is_the_spectral_bernoulli_convolution() {
    for (stream, &n) in SIZES.iter().enumerate() {
        let k = random_kernel(n, 60 + stream as u64, 0.0, 1.0);
        let marginal = full_pmf(&k).unwrap().count_marginal();
        let spectrum = k.spectral_decompose().unwrap();
        let pb = poisson_binomial_pmf(spectrum.eigenvalues()).unwrap();
        for (m, (a, b)) in marginal.iter().zip(pb.pmf()).enumerate() {
            assert!((a - b).abs() < 1e-10, "n={n} count {m}: {a} vs {b}");
        }
    }
}

#[test]
fn windowed_count_law_matches_restricted_pmf_marginal() {
    let k = random_kernel(6, 70, 0.0, 1.0);
    for window in [
        SubsetIndex::new(vec![0, 3]),
        SubsetIndex::new(vec![1, 2, 5]),
        SubsetIndex::full(6),
    ] {
        let pb = count_distribution(&k, &window).unwrap();
        let restricted = k.restrict(&window).unwrap();
        let marginal = full_pmf(&restricted).unwrap().count_marginal();
        for (m, (a, b)) in pb.pmf().iter().zip(&marginal).enumerate() {
            assert!((a - b).abs() < 1e-10, "window {window} count {m}");
        }
    }
}

/// E[Π_b N(B_b)] over disjoint blocks, evaluated from the full law, must
/// match the determinant sum over one-point-per-block choices.
#[test]
fn correlation_sums_are_factorial_moments_of_disjoint_blocks() {
    use dpp_core::measure::correlation_sum;
    let k = random_kernel(6, 80, 0.0, 1.0);
    let pmf = full_pmf(&k).unwrap();
    let block_families: [&[SubsetIndex]; 3] = [
        &[SubsetIndex::new(vec![0, 2])],
        &[SubsetIndex::new(vec![0, 2]), SubsetIndex::new(vec![1, 4])],
        &[
            SubsetIndex::new(vec![0]),
            SubsetIndex::new(vec![1, 5]),
            SubsetIndex::new(vec![2, 3]),
        ],
    ];
    for blocks in block_families {
        let det_sum = correlation_sum(&k, blocks).unwrap();
        let moment: f64 = pmf
            .iter()
            .map(|(t, p)| {
                let product: usize = blocks
                    .iter()
                    .map(|b| b.iter().filter(|&i| t.contains(i)).count())
                    .product();
                p * product as f64
            })
            .sum();
        assert!(
            (det_sum - moment).abs() < 1e-10,
            "{} blocks: {det_sum} vs {moment}",
            blocks.len()
        );
    }
}

#[test]
fn restriction_commutes_with_the_probability_law() {
    // inclusion probabilities of a restricted kernel agree with the parent
    let k = random_kernel(7, 90, 0.0, 1.0);
    let window = SubsetIndex::new(vec![0, 2, 3, 6]);
    let restricted = k.restrict(&window).unwrap();
    let positions: Vec<usize> = window.iter().collect();
    for mask in 0u64..1 << positions.len() {
        let local = SubsetIndex::from_bitmask(mask);
        let global = SubsetIndex::new(local.iter().map(|i| positions[i]).collect());
        let a = inclusion_probability(&restricted, &local).unwrap();
        let b = inclusion_probability(&k, &global).unwrap();
        assert!((a - b).abs() < 1e-12, "window {window} local {local}");
    }
}
