//! Property-based checks for subset indexing and exactly-solvable laws.

use dpp_core::measure::{elementary_probability, inclusion_probability};
use dpp_core::subset::{fock_basis_order, SubsetIndex};
use dpp_core::HermitianKernel;
use proptest::prelude::*;

proptest! {
    #[test]
    fn bitmask_round_trips(bits in 0u64..(1 << 16)) {
        let s = SubsetIndex::from_bitmask(bits);
        prop_assert_eq!(s.bitmask(), bits);
        prop_assert_eq!(s.len(), bits.count_ones() as usize);
    }

    #[test]
    fn display_round_trips(indices in proptest::collection::vec(0usize..64, 0..10)) {
        let s = SubsetIndex::new(indices);
        let text = s.to_string();
        let back: SubsetIndex = text.parse().unwrap();
        prop_assert_eq!(back, s);
    }

    #[test]
    fn construction_is_sorted_and_deduplicated(
        indices in proptest::collection::vec(0usize..32, 0..12)
    ) {
        let s = SubsetIndex::new(indices.clone());
        let slice = s.indices();
        prop_assert!(slice.windows(2).all(|w| w[0] < w[1]));
        for &i in &indices {
            prop_assert!(s.contains(i));
        }
    }

    #[test]
    fn complement_is_an_involution(bits in 0u64..(1 << 12)) {
        let s = SubsetIndex::from_bitmask(bits);
        prop_assert_eq!(s.complement(12).complement(12), s);
    }

    #[test]
    fn fock_rank_inverts_basis_order(n in 1usize..9, salt in 0u64..64) {
        let order = fock_basis_order(n);
        let pick = (salt as usize) % order.len();
        prop_assert_eq!(order[pick].fock_rank(n), pick);
    }

    /// Independent-point kernels are exactly solvable: both probability
    /// modes reduce to closed-form Bernoulli products.
    #[test]
    fn diagonal_kernels_obey_the_product_law(
        diag in proptest::collection::vec(0.0f64..=1.0, 1..7),
        bits in 0u64..64
    ) {
        let n = diag.len();
        let mask = bits & ((1 << n) - 1);
        let k = HermitianKernel::from_diagonal(&diag).unwrap();
        let s = SubsetIndex::from_bitmask(mask);
        let inc = inclusion_probability(&k, &s).unwrap();
        let want_inc: f64 = s.iter().map(|i| diag[i]).product();
        prop_assert!((inc - want_inc).abs() < 1e-12);
        let elem = elementary_probability(&k, &s).unwrap();
        let want_elem: f64 = (0..n)
            .map(|i| if s.contains(i) { diag[i] } else { 1.0 - diag[i] })
            .product();
        prop_assert!((elem - want_elem).abs() < 1e-12);
    }
}
