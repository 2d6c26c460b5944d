//! Exact probabilistic quantities of the finite process: inclusion,
//! elementary, and void probabilities; correlation sums; configuration
//! weights under the L-ensemble form; full pmf enumeration.
//!
//! Everything here is exact up to floating-point roundoff — no sampling and
//! no approximation. Enumerative operations error beyond [`ENUM_CAP`] points
//! rather than silently degrade, because these functions serve as oracles
//! for the randomized parts of the crate.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::HermitianKernel;
use crate::subset::SubsetIndex;
use crate::C64;

/// Largest ground-set size for which 2^n subset enumeration is permitted.
pub const ENUM_CAP: usize = 20;

/// Negative (or above-one) slack attributed to cancellation and clamped;
/// anything worse signals an inconsistent kernel and raises an error.
const CANCEL_SLACK: f64 = 1e-12;

/// Probability of every one of the 2^n configurations.
#[derive(Clone, Debug)]
pub struct ExactPmf {
    n: usize,
    /// Indexed by subset bitmask (bit i set ⇔ point i present).
    probabilities: Vec<f64>,
}

impl ExactPmf {
    /// Wraps bitmask-indexed probabilities, enforcing nonnegativity (with
    /// the cancellation slack) and normalization to 1 within 1e-10.
    pub fn from_bitmask_values(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != 1usize << n {
            return Err(Error::DimensionMismatch {
                expected: 1usize << n,
                actual: values.len(),
            });
        }
        let probabilities: Vec<f64> = values
            .into_iter()
            .map(|p| clamp_probability(p, "pmf entry"))
            .collect::<Result<_>>()?;
        let total: f64 = neumaier_sum(&probabilities);
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::NumericalInconsistency {
                context: "pmf normalization".into(),
                value: total - 1.0,
            });
        }
        Ok(ExactPmf { n, probabilities })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Probability of the exact configuration `s`, or `None` if `s` has an
    /// index outside the ground set.
    pub fn get(&self, s: &SubsetIndex) -> Option<f64> {
        if s.check_range(self.n).is_err() {
            return None;
        }
        Some(self.probabilities[s.bitmask() as usize])
    }

    /// Bitmask-indexed raw values (length 2^n).
    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// Iterates configurations in ascending bitmask order.
    pub fn iter(&self) -> impl Iterator<Item = (SubsetIndex, f64)> + '_ {
        self.probabilities
            .iter()
            .enumerate()
            .map(|(mask, &p)| (SubsetIndex::from_bitmask(mask as u64), p))
    }

    /// Marginal law of the configuration size (length n+1).
    pub fn count_marginal(&self) -> Vec<f64> {
        let mut marginal = vec![0.0; self.n + 1];
        for (mask, &p) in self.probabilities.iter().enumerate() {
            marginal[mask.count_ones() as usize] += p;
        }
        marginal
    }

    /// Map keyed by the compact subset string ("0,2", empty key = ∅).
    pub fn to_map(&self) -> BTreeMap<String, f64> {
        self.iter().map(|(s, p)| (s.to_string(), p)).collect()
    }
}

/// ℙ(S ⊆ X): the principal minor `det K_S`. The empty subset gives 1.
pub fn inclusion_probability(k: &HermitianKernel, s: &SubsetIndex) -> Result<f64> {
    s.check_range(k.n())?;
    let det = principal_det(k.entries(), s.indices())?;
    clamp_probability(det, "inclusion probability")
}

/// ℙ(X = S) by inclusion-exclusion over the 2^(n−|S|) supersets of S.
pub fn elementary_probability(k: &HermitianKernel, s: &SubsetIndex) -> Result<f64> {
    let n = k.n();
    check_enum_cap(n, "elementary_probability")?;
    s.check_range(n)?;
    let base = s.indices().to_vec();
    let rest: Vec<usize> = (0..n).filter(|&i| !s.contains(i)).collect();
    let mut total = 0.0f64;
    let mut comp = 0.0f64; // Neumaier compensation
    for extra in 0u64..1 << rest.len() {
        let mut t = base.clone();
        for (pos, &i) in rest.iter().enumerate() {
            if extra >> pos & 1 == 1 {
                t.push(i);
            }
        }
        t.sort_unstable();
        let sign = if extra.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        let term = sign * principal_det(k.entries(), &t)?;
        neumaier_add(&mut total, &mut comp, term);
    }
    clamp_probability(total + comp, "elementary probability")
}

/// The pmf of every configuration: all 2^n principal minors followed by a
/// superset Möbius transform. Exact inverse of `inclusion_probability`.
pub fn full_pmf(k: &HermitianKernel) -> Result<ExactPmf> {
    let n = k.n();
    check_enum_cap(n, "full_pmf")?;
    let mut values = all_inclusion_dets(k)?;
    // butterfly: values[mask] ← Σ_{T ⊇ mask} (−1)^{|T\mask|} det K_T
    for bit in 0..n {
        let step = 1usize << bit;
        for mask in 0..values.len() {
            if mask & step == 0 {
                values[mask] -= values[mask | step];
            }
        }
    }
    ExactPmf::from_bitmask_values(n, values)
}

/// Cross-checks the complement construction: for every S, the probability
/// that the *missing* points cover S (from `full_pmf`) must equal the
/// inclusion probability of S under the complement kernel `I−K`. Returns
/// the maximum discrepancy over all 2^n subsets.
pub fn complement_pmf_check(k: &HermitianKernel) -> Result<f64> {
    let n = k.n();
    check_enum_cap(n, "complement_pmf_check")?;
    let pmf = full_pmf(k)?;
    // zeta transform: cum[mask] = Σ_{T ⊆ mask} pmf[T]
    let mut cum = pmf.probabilities().to_vec();
    for bit in 0..n {
        let step = 1usize << bit;
        for mask in 0..cum.len() {
            if mask & step != 0 {
                cum[mask] += cum[mask ^ step];
            }
        }
    }
    let comp = k.complement();
    let full = (1usize << n) - 1;
    let mut worst = 0.0f64;
    for mask in 0..=full as u64 {
        let s = SubsetIndex::from_bitmask(mask);
        // X misses all of S  ⇔  the complement configuration contains S
        let from_pmf = cum[full & !(mask as usize)];
        let direct = inclusion_probability(&comp, &s)?;
        worst = worst.max((from_pmf - direct).abs());
    }
    Ok(worst)
}

/// ℙ(X ∩ E = ∅) as the product ∏(1−λ) over the spectrum of the restricted
/// kernel — the finite form of the Fredholm determinant of I−K_E.
pub fn void_probability(k: &HermitianKernel, e: &SubsetIndex) -> Result<f64> {
    e.check_range(k.n())?;
    if e.is_empty() {
        return Ok(1.0);
    }
    let spec = k.restrict(e)?.spectral_decompose()?;
    let prod = spec.eigenvalues().iter().fold(1.0, |acc, &l| acc * (1.0 - l));
    clamp_probability(prod, "void probability")
}

/// 𝔼[∏_j #(X ∩ E_j)] for pairwise-disjoint blocks: the sum over one point
/// per block of the determinant of the cross-kernel matrix.
pub fn correlation_sum(k: &HermitianKernel, blocks: &[SubsetIndex]) -> Result<f64> {
    if blocks.is_empty() {
        return Err(Error::OutOfRange {
            context: "correlation_sum requires at least one block".into(),
        });
    }
    for b in blocks {
        b.check_range(k.n())?;
    }
    for (a, block) in blocks.iter().enumerate() {
        for other in &blocks[a + 1..] {
            if !block.is_disjoint(other) {
                return Err(Error::BlocksNotDisjoint);
            }
        }
    }
    let m = blocks.len();
    let entries = k.entries();
    let mut total = 0.0f64;
    let mut comp = 0.0f64;
    let mut choice = vec![0usize; m]; // positional odometer over the blocks
    loop {
        let pts: Vec<usize> = choice
            .iter()
            .enumerate()
            .map(|(b, &c)| blocks[b].indices()[c])
            .collect();
        let det = DMatrix::from_fn(m, m, |i, j| entries[(pts[i], pts[j])]).determinant();
        neumaier_add(&mut total, &mut comp, det.re);
        // advance odometer
        let mut pos = 0;
        loop {
            if pos == m {
                return Ok(total + comp);
            }
            choice[pos] += 1;
            if choice[pos] < blocks[pos].len() {
                break;
            }
            choice[pos] = 0;
            pos += 1;
        }
    }
}

/// Weight of the exact configuration S in L-ensemble form:
/// `det(I−K) · det(L_S)` with `L = (I−K)⁻¹K`. Agrees with
/// `elementary_probability` whenever the kernel is a strict contraction —
/// without any subset enumeration, so it scales past [`ENUM_CAP`].
pub fn janossy_weight(k: &HermitianKernel, s: &SubsetIndex) -> Result<f64> {
    s.check_range(k.n())?;
    let l = k.l_ensemble()?;
    let spec = k.spectral_decompose()?;
    let fredholm = spec.eigenvalues().iter().fold(1.0, |acc, &v| acc * (1.0 - v));
    let minor = principal_det(&l, s.indices())?;
    clamp_probability(fredholm * minor, "configuration weight")
}

fn check_enum_cap(n: usize, operation: &str) -> Result<()> {
    if n > ENUM_CAP {
        return Err(Error::DimensionTooLarge {
            size: n,
            cap: ENUM_CAP,
            operation: operation.into(),
        });
    }
    Ok(())
}

/// Real part of the principal minor det M[idx, idx], with a sanity check
/// that the imaginary part (exactly zero for Hermitian M) stayed small.
fn principal_det(entries: &DMatrix<C64>, idx: &[usize]) -> Result<f64> {
    if idx.is_empty() {
        return Ok(1.0);
    }
    let m = DMatrix::from_fn(idx.len(), idx.len(), |i, j| entries[(idx[i], idx[j])]);
    let det = m.determinant();
    if det.im.abs() > 1e-9 {
        return Err(Error::NumericalInconsistency {
            context: "principal minor of a Hermitian matrix came out complex".into(),
            value: det.im,
        });
    }
    Ok(det.re)
}

/// det K_S for every bitmask S, parallelized per subset; the value for a
/// given mask never depends on the parallel schedule.
fn all_inclusion_dets(k: &HermitianKernel) -> Result<Vec<f64>> {
    let n = k.n();
    let entries = k.entries();
    (0..1usize << n)
        .into_par_iter()
        .map(|mask| {
            let idx: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
            principal_det(entries, &idx)
        })
        .collect()
}

fn clamp_probability(x: f64, context: &str) -> Result<f64> {
    if x < 0.0 {
        if x >= -CANCEL_SLACK {
            Ok(0.0)
        } else {
            Err(Error::NumericalInconsistency {
                context: context.into(),
                value: x,
            })
        }
    } else if x > 1.0 {
        if x <= 1.0 + CANCEL_SLACK {
            Ok(1.0)
        } else {
            Err(Error::NumericalInconsistency {
                context: context.into(),
                value: x,
            })
        }
    } else {
        Ok(x)
    }
}

fn neumaier_add(sum: &mut f64, comp: &mut f64, term: f64) {
    let t = *sum + term;
    if sum.abs() >= term.abs() {
        *comp += (*sum - t) + term;
    } else {
        *comp += (term - t) + *sum;
    }
    *sum = t;
}

fn neumaier_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for &v in values {
        neumaier_add(&mut sum, &mut comp, v);
    }
    sum + comp
}
