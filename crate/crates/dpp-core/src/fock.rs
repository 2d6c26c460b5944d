//! Explicit fermion Fock space over an n-dimensional one-particle space.
//!
//! The 2^n-dimensional exterior algebra is materialized with basis vectors
//! labeled by subsets (ordered by size, then lexicographically). The density
//! operator of the process is diagonal in the eigen-Fock basis with weights
//! `w(S) = ∏_{k∈S} λ_k ∏_{k∉S} (1−λ_k)`, and its diagonal in *any* rotated
//! Fock basis reproduces the elementary probabilities of the rotated kernel.
//! That equivalence — plus the identity between the m-particle correlation
//! operator and the antisymmetrized m-fold tensor power of the kernel — is
//! what the rest of the crate is verified against.
//!
//! Everything here enumerates exhaustively, so the caps are tight; this
//! module is an oracle, not a production path.

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::kernel::{max_entry_norm, unitary_deviation, SpectralDecomposition, Tolerances};
use crate::subset::{fock_basis_order, SubsetIndex};
use crate::C64;

/// Largest one-particle dimension for 2^n weight/probability sums.
pub const FOCK_CAP: usize = 12;
/// Largest one-particle dimension for materialized tensor operators.
pub const FOCK_CAP_SMALL: usize = 6;
/// Largest allowed tensor-space dimension n^m.
pub const TENSOR_CAP: usize = 4096;

/// A vector in the 2^n-dimensional Fock space, stored in the fixed basis
/// order (subsets by size, then lexicographic); component 0 is the vacuum.
#[derive(Clone, Debug)]
pub struct FockVector {
    n: usize,
    amplitudes: Vec<C64>,
}

impl FockVector {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Amplitudes in the fixed basis order.
    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    /// Component on the basis vector labeled by `s`.
    pub fn amplitude(&self, s: &SubsetIndex) -> Option<C64> {
        if s.check_range(self.n).is_err() {
            return None;
        }
        Some(self.amplitudes[s.fock_rank(self.n)])
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `[re, im]` pairs in the fixed basis order, for serialization.
    pub fn to_pairs(&self) -> Vec<[f64; 2]> {
        self.amplitudes.iter().map(|z| [z.re, z.im]).collect()
    }
}

/// The diagonal of the process's density operator in its eigen-Fock basis:
/// weight(S) = ∏_{k∈S} λ_k ∏_{k∉S} (1−λ_k), summing to 1. Subsets index
/// *eigenvalue positions* (descending order), not ground-set points.
#[derive(Clone, Debug)]
pub struct DensityWeights {
    eigenbasis: SpectralDecomposition,
    /// Indexed by bitmask over eigenvalue positions.
    weights: Vec<f64>,
}

impl DensityWeights {
    pub fn n(&self) -> usize {
        self.eigenbasis.n()
    }

    pub fn eigenbasis(&self) -> &SpectralDecomposition {
        &self.eigenbasis
    }

    pub fn weight(&self, s: &SubsetIndex) -> Option<f64> {
        if s.check_range(self.n()).is_err() {
            return None;
        }
        Some(self.weights[s.bitmask() as usize])
    }

    /// Iterates (subset of eigenvalue positions, weight) in bitmask order.
    pub fn iter(&self) -> impl Iterator<Item = (SubsetIndex, f64)> + '_ {
        self.weights
            .iter()
            .enumerate()
            .map(|(mask, &w)| (SubsetIndex::from_bitmask(mask as u64), w))
    }
}

/// An operator on the m-fold tensor power (ℂ^n)^⊗m, dimension n^m × n^m.
/// Multi-indices are encoded big-endian: the first tensor slot varies
/// slowest, matching the Kronecker-product layout.
#[derive(Clone, Debug)]
pub struct TensorOperator {
    n: usize,
    m: usize,
    matrix: DMatrix<C64>,
}

impl TensorOperator {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    /// Entry ⟨e_{row[0]}⊗…⊗e_{row[m−1]}, T e_{col[0]}⊗…⊗e_{col[m−1]}⟩.
    pub fn entry(&self, row: &[usize], col: &[usize]) -> C64 {
        assert_eq!(row.len(), self.m);
        assert_eq!(col.len(), self.m);
        self.matrix[(tensor_index(row, self.n), tensor_index(col, self.n))]
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }
}

/// The wedge v_1∧…∧v_m in Fock coordinates: the amplitude on the basis
/// vector labeled S = {s_1<…<s_m} is the m×m determinant with rows indexed
/// by the s_a and columns by the inputs. All other components vanish. With
/// this convention ⟨Sl, Sl⟩ equals the Gram determinant of the inputs.
pub fn slater_vector(vectors: &[DVector<C64>]) -> Result<FockVector> {
    let m = vectors.len();
    if m == 0 {
        return Err(Error::OutOfRange {
            context: "a wedge product needs at least one vector".into(),
        });
    }
    let n = vectors[0].len();
    for v in vectors {
        if v.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: v.len(),
            });
        }
    }
    if m > n {
        return Err(Error::TooManyFactors { m, n });
    }
    if n > FOCK_CAP {
        return Err(Error::DimensionTooLarge {
            size: n,
            cap: FOCK_CAP,
            operation: "slater_vector".into(),
        });
    }
    if vectors
        .iter()
        .any(|v| v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()))
    {
        return Err(Error::NonFinite);
    }
    let mut amplitudes = vec![C64::new(0.0, 0.0); 1 << n];
    for rows in (0..n).combinations(m) {
        let det = DMatrix::from_fn(m, m, |a, b| vectors[b][rows[a]]).determinant();
        let s = SubsetIndex::new(rows);
        amplitudes[s.fock_rank(n)] = det;
    }
    Ok(FockVector { n, amplitudes })
}

/// Overlap ⟨f_A(S), f_B(T)⟩ of Slater basis vectors built from columns of
/// the unitaries A and B: zero unless |S| = |T|, else the determinant of
/// the cross-Gram matrix ⟨a_{s_i}, b_{t_j}⟩. The inner product is
/// conjugate-linear in the first argument.
pub fn fock_overlap(
    basis_a: &DMatrix<C64>,
    s: &SubsetIndex,
    basis_b: &DMatrix<C64>,
    t: &SubsetIndex,
) -> Result<C64> {
    let n = basis_a.nrows();
    if basis_a.shape() != (n, n) || basis_b.shape() != (n, n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: basis_b.nrows().max(basis_a.ncols()),
        });
    }
    for basis in [basis_a, basis_b] {
        let deviation = unitary_deviation(basis);
        if deviation > Tolerances::default().ortho {
            return Err(Error::NotUnitary { deviation });
        }
    }
    s.check_range(n)?;
    t.check_range(n)?;
    if s.len() != t.len() {
        return Ok(C64::new(0.0, 0.0));
    }
    if s.is_empty() {
        return Ok(C64::new(1.0, 0.0)); // vacuum against vacuum
    }
    let m = s.len();
    let gram = DMatrix::from_fn(m, m, |i, j| {
        let a = basis_a.column(s.indices()[i]);
        let b = basis_b.column(t.indices()[j]);
        a.dotc(&b) // Σ_r conj(a_r) b_r
    });
    Ok(gram.determinant())
}

/// All 2^n diagonal weights of the density operator in its eigenbasis.
pub fn density_weights(spec: &SpectralDecomposition) -> Result<DensityWeights> {
    let n = spec.n();
    if n > FOCK_CAP {
        return Err(Error::DimensionTooLarge {
            size: n,
            cap: FOCK_CAP,
            operation: "density_weights".into(),
        });
    }
    let lambdas = spec.eigenvalues();
    let mut weights = vec![0.0f64; 1 << n];
    for (mask, w) in weights.iter_mut().enumerate() {
        let mut prod = 1.0f64;
        for (k, &l) in lambdas.iter().enumerate() {
            prod *= if mask >> k & 1 == 1 { l } else { 1.0 - l };
        }
        *w = prod;
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::NumericalInconsistency {
            context: "density weight normalization".into(),
            value: total - 1.0,
        });
    }
    Ok(DensityWeights {
        eigenbasis: spec.clone(),
        weights,
    })
}

/// The diagonal matrix element ⟨f_W(S), D f_W(S)⟩ of the density operator
/// in the Fock basis built from the unitary W: the weighted sum over
/// same-size subsets T of |⟨f_V(T), f_W(S)⟩|². This equals the elementary
/// probability of S for the kernel rotated into the W frame.
pub fn diagonal_probability(
    d: &DensityWeights,
    w: &DMatrix<C64>,
    s: &SubsetIndex,
) -> Result<f64> {
    let n = d.n();
    if n > FOCK_CAP {
        return Err(Error::DimensionTooLarge {
            size: n,
            cap: FOCK_CAP,
            operation: "diagonal_probability".into(),
        });
    }
    if w.shape() != (n, n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: w.nrows().max(w.ncols()),
        });
    }
    let deviation = unitary_deviation(w);
    if deviation > Tolerances::default().ortho {
        return Err(Error::NotUnitary { deviation });
    }
    s.check_range(n)?;
    let m = s.len();
    // cross-Gram of eigenbasis against W; overlaps are its minors
    let g = d.eigenbasis().eigenvectors().adjoint() * w;
    let s_idx = s.indices();
    let mut total = 0.0f64;
    for (mask, &weight) in d.weights.iter().enumerate() {
        if weight == 0.0 || mask.count_ones() as usize != m {
            continue;
        }
        let t_idx: Vec<usize> = (0..n).filter(|&k| mask >> k & 1 == 1).collect();
        let minor = DMatrix::from_fn(m, m, |i, j| g[(t_idx[i], s_idx[j])]).determinant();
        total += weight * minor.norm_sqr();
    }
    Ok(total)
}

/// The n^m × n^m matrix of (⊗^m K)·Σ_π sgn(π)U_π, where U_π permutes
/// tensor slots. For m = 1 this is K itself; its trace is m!·e_m(λ).
pub fn antisymmetrized_power(k_matrix: &DMatrix<C64>, m: usize) -> Result<TensorOperator> {
    let (rows, cols) = k_matrix.shape();
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    let n = rows;
    if m == 0 {
        return Err(Error::OutOfRange {
            context: "tensor power needs m >= 1".into(),
        });
    }
    let dim = checked_tensor_dim(n, m, "antisymmetrized_power")?;
    let mut kron = DMatrix::from_element(1, 1, C64::new(1.0, 0.0));
    for _ in 0..m {
        kron = kron.kronecker(k_matrix);
    }
    let mut anti = DMatrix::from_element(dim, dim, C64::new(0.0, 0.0));
    let mut col_multi = vec![0usize; m];
    let mut row_multi = vec![0usize; m];
    for perm in (0..m).permutations(m) {
        let sign = permutation_sign(&perm);
        for col in 0..dim {
            decode_tensor_index(col, n, &mut col_multi);
            // slot perm[a] of the image carries slot a of the source
            for (a, &p) in perm.iter().enumerate() {
                row_multi[p] = col_multi[a];
            }
            let row = tensor_index(&row_multi, n);
            anti[(row, col)] += C64::new(sign, 0.0);
        }
    }
    Ok(TensorOperator {
        n,
        m,
        matrix: kron * anti,
    })
}

/// The m-particle correlation operator K_m[D]: the unique operator with
/// Tr(Γ_m[A]·D) = Tr(A·K_m[D]) for every A on (ℂ^n)^⊗m, where Γ_m[A] sums
/// A over all injections of the m slots into the occupied slots.
///
/// On a Slater state with k particles every injection contributes the same
/// expectation (slot permutations only flip signs, which cancel between the
/// state and its conjugate), so the injection sum collapses to the falling
/// factorial k^[m] = k(k−1)…(k−m+1) times the expectation of A⊗I^⊗(k−m).
/// That expectation is Tr(A·M_S M_S†) with M_S the n^m × n^(k−m) reshape of
/// the k-particle Slater tensor, giving
/// K_m[D] = Σ_S w(S)·k^[m]·M_S M_S†. The collapse is verified against the
/// literal injection sum in this module's tests.
pub fn correlation_operator(d: &DensityWeights, m: usize) -> Result<TensorOperator> {
    let n = d.n();
    if m == 0 {
        return Err(Error::OutOfRange {
            context: "correlation operator needs m >= 1".into(),
        });
    }
    if m > n {
        return Err(Error::TooManyFactors { m, n });
    }
    if n > FOCK_CAP_SMALL {
        return Err(Error::DimensionTooLarge {
            size: n,
            cap: FOCK_CAP_SMALL,
            operation: "correlation_operator".into(),
        });
    }
    let dim = checked_tensor_dim(n, m, "correlation_operator")?;
    let v = d.eigenbasis().eigenvectors();
    let mut acc = DMatrix::from_element(dim, dim, C64::new(0.0, 0.0));
    for (mask, &weight) in d.weights.iter().enumerate() {
        let k = mask.count_ones() as usize;
        if k < m || weight == 0.0 {
            continue;
        }
        let falling: f64 = (0..m).map(|i| (k - i) as f64).product();
        let s = SubsetIndex::from_bitmask(mask as u64);
        let psi = slater_tensor(v, &s);
        let tail = n.pow((k - m) as u32);
        let m_s = DMatrix::from_fn(dim, tail, |r, c| psi[r * tail + c]);
        acc += (&m_s * m_s.adjoint()).scale(weight * falling);
    }
    Ok(TensorOperator { n, m, matrix: acc })
}

/// Max-norm gap between the correlation operator K_m[D] and the
/// antisymmetrized tensor power of the reconstructed kernel — the two sides
/// of the identity that makes the process determinantal. Should sit at
/// roundoff level (≤ 1e-9) whenever both are defined.
pub fn key_identity_gap(spec: &SpectralDecomposition, m: usize) -> Result<f64> {
    let d = density_weights(spec)?;
    let lhs = correlation_operator(&d, m)?;
    let rhs = antisymmetrized_power(&spec.reconstruct(), m)?;
    Ok(max_entry_norm(&(lhs.matrix() - rhs.matrix())))
}

/// The k-particle Slater tensor for the columns of `basis` selected by `s`,
/// as a unit vector in (ℂ^n)^⊗k: (1/√k!)·Σ_π sgn(π) ⊗_a v_{s_π(a)}.
fn slater_tensor(basis: &DMatrix<C64>, s: &SubsetIndex) -> DVector<C64> {
    let n = basis.nrows();
    let k = s.len();
    let dim = n.pow(k as u32);
    let mut psi = DVector::from_element(dim, C64::new(0.0, 0.0));
    for perm in (0..k).permutations(k) {
        let sign = permutation_sign(&perm);
        let mut t = DVector::from_element(1, C64::new(sign, 0.0));
        for &p in &perm {
            t = kron_column(&t, basis, s.indices()[p]);
        }
        psi += t;
    }
    let norm: f64 = (1..=k).map(|i| i as f64).product::<f64>().sqrt();
    psi.unscale(norm)
}

/// a ⊗ (column j of basis).
fn kron_column(a: &DVector<C64>, basis: &DMatrix<C64>, j: usize) -> DVector<C64> {
    let b = basis.column(j);
    let mut out = DVector::from_element(a.len() * b.len(), C64::new(0.0, 0.0));
    for (i, &ai) in a.iter().enumerate() {
        for (r, &br) in b.iter().enumerate() {
            out[i * b.len() + r] = ai * br;
        }
    }
    out
}

fn permutation_sign(perm: &[usize]) -> f64 {
    let mut inversions = 0usize;
    for a in 0..perm.len() {
        for b in a + 1..perm.len() {
            if perm[a] > perm[b] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Big-endian flat index of a tensor multi-index (first slot slowest).
fn tensor_index(multi: &[usize], n: usize) -> usize {
    multi.iter().fold(0, |acc, &i| acc * n + i)
}

fn decode_tensor_index(mut flat: usize, n: usize, out: &mut [usize]) {
    for slot in (0..out.len()).rev() {
        out[slot] = flat % n;
        flat /= n;
    }
}

fn checked_tensor_dim(n: usize, m: usize, operation: &str) -> Result<usize> {
    let dim = (n as u128).checked_pow(m as u32).unwrap_or(u128::MAX);
    if dim > TENSOR_CAP as u128 {
        return Err(Error::DimensionTooLarge {
            size: usize::try_from(dim).unwrap_or(usize::MAX),
            cap: TENSOR_CAP,
            operation: operation.into(),
        });
    }
    Ok(dim as usize)
}

/// Fixed Fock basis order shared with [`crate::subset::fock_basis_order`].
pub fn basis_order(n: usize) -> Vec<SubsetIndex> {
    fock_basis_order(n)
}
