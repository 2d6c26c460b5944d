//! Shared fixtures: reproducible random kernels and unitaries.
#![allow(dead_code)] // not every test target uses every fixture

use dpp_core::experiments::haar_unitary;
use dpp_core::kernel::SpectralDecomposition;
use dpp_core::rng::{replicate_rng, DOMAIN_BASIS};
use dpp_core::{C64, HermitianKernel};
use nalgebra::DMatrix;
use rand::Rng;

/// A random Hermitian kernel with Haar-random eigenbasis and eigenvalues
/// uniform in [lo, hi]. The stream index makes each fixture independent
/// and reproducible.
pub fn random_kernel(n: usize, stream: u64, lo: f64, hi: f64) -> HermitianKernel {
    let mut rng = replicate_rng(0xDEC0DE, DOMAIN_BASIS, stream);
    let v = haar_unitary(n, &mut rng);
    let mut eigenvalues: Vec<f64> = (0..n).map(|_| rng.gen_range(lo..=hi)).collect();
    eigenvalues.sort_by(|a, b| b.partial_cmp(a).expect("finite eigenvalues"));
    let spec =
        SpectralDecomposition::from_parts(eigenvalues, v).expect("random spectrum is admissible");
    HermitianKernel::from_matrix(spec.reconstruct()).expect("reconstruction validates")
}

/// A reproducible Haar-random unitary, independent of `random_kernel`
/// streams.
pub fn random_unitary(n: usize, stream: u64) -> DMatrix<C64> {
    let mut rng = replicate_rng(0xBA515, DOMAIN_BASIS, stream);
    haar_unitary(n, &mut rng)
}
