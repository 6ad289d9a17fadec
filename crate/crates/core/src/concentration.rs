//! The non-equilibrium measure and the unitaries that concentrate it.
//!
//! The measure of a state rho on d levels is log2(d * ||rho||_inf), the
//! max-relative-entropy distance from the maximally mixed state. A global
//! unitary on rho together with an ancilla eta can push that measure up on
//! the first subsystem; the achievable maximum is a Ky Fan sum of the
//! joint spectrum, and this module builds unitaries that attain it.

use crate::error::{Error, Result};
use crate::linalg::{kron_vec, orthonormal_completion, ComplexMatrix, Spectrum, C64};
use crate::states::{BipartiteState, DensityMatrix};
use crate::{correlations, tol};

/// Gains with magnitude at or below this are reported as exactly zero.
/// The maximum over unitaries includes the identity, so the true value is
/// never negative; anything this small is numerical noise.
pub const ZERO_CLAMP: f64 = 1e-12;

fn clamp_gain(value: f64) -> f64 {
    if value.abs() <= ZERO_CLAMP {
        0.0
    } else {
        value
    }
}

/// A validated unitary matrix.
#[derive(Clone, Debug)]
pub struct UnitaryMatrix {
    dim: usize,
    matrix: ComplexMatrix,
}

impl UnitaryMatrix {
    /// Validates `matrix` as unitary within the central tolerance.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if matrix.rows() != matrix.cols() {
            return Err(Error::NotSquare {
                rows: matrix.rows(),
                cols: matrix.cols(),
            });
        }
        let tols = tol::current();
        let dev = matrix.unitarity_deviation();
        // NaN deviations must fail, so the comparison is written to reject them.
        if dev.is_nan() || dev > tols.hermiticity {
            return Err(Error::NotUnitary {
                deviation: dev,
                tolerance: tols.hermiticity,
            });
        }
        Ok(UnitaryMatrix {
            dim: matrix.rows(),
            matrix,
        })
    }

    pub fn identity(n: usize) -> Self {
        UnitaryMatrix {
            dim: n,
            matrix: ComplexMatrix::identity(n),
        }
    }

    /// Permutation unitary sending basis state `i` to `perm[i]`.
    pub fn from_permutation(perm: &[usize]) -> Result<Self> {
        let n = perm.len();
        let mut seen = vec![false; n];
        for &p in perm {
            if p >= n || seen[p] {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: p,
                });
            }
            seen[p] = true;
        }
        let mut m = ComplexMatrix::zeros(n, n);
        for (src, &dst) in perm.iter().enumerate() {
            m.set(dst, src, C64::new(1.0, 0.0));
        }
        Ok(UnitaryMatrix { dim: n, matrix: m })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }
}

/// One eigenvalue product of a tensor pair, with its factor indices.
///
/// The indices matter downstream: the concentration constructions need to
/// know which factor pair produced each level of the product spectrum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProductLevel {
    pub value: f64,
    pub i: usize,
    pub j: usize,
}

/// All eigenvalue products of two descending spectra, sorted descending.
/// Exact ties are broken by lexicographic factor index, so the order is
/// deterministic.
pub fn ordered_products(a: &[f64], b: &[f64]) -> Vec<ProductLevel> {
    let mut levels = Vec::with_capacity(a.len() * b.len());
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            levels.push(ProductLevel { value: x * y, i, j });
        }
    }
    levels.sort_by(|x, y| {
        y.value
            .partial_cmp(&x.value)
            .unwrap()
            .then(x.i.cmp(&y.i))
            .then(x.j.cmp(&y.j))
    });
    levels
}

fn top_product_sum(a: &[f64], b: &[f64], k: usize) -> f64 {
    ordered_products(a, b).iter().take(k).map(|l| l.value).sum()
}

/// The informational non-equilibrium measure log2(d * ||rho||_inf).
///
/// Zero exactly for the maximally mixed state, log2(d) for pure states.
pub fn noneq_measure(rho: &DensityMatrix) -> f64 {
    (rho.dim() as f64 * rho.max_eigenvalue()).log2()
}

/// Ky Fan sum of a Hermitian matrix: the sum of its `k` largest
/// eigenvalues.
pub fn ky_fan(m: &ComplexMatrix, k: usize) -> Result<f64> {
    let eig = m.hermitian_eig()?;
    let n = eig.dim();
    if k == 0 || k > n {
        return Err(Error::RankOutOfRange { k, max: n });
    }
    Ok(eig.eigenvalues().iter().take(k).sum())
}

/// Largest achievable measure gain when rho evolves jointly with an
/// ancilla copy of itself: log2 of the d largest eigenvalue products of
/// rho (x) rho over ||rho||_inf.
///
/// Always nonnegative; zero for every qubit, for pure states and for the
/// maximally mixed state.
pub fn delta_p(rho: &DensityMatrix) -> f64 {
    let a = rho.eigenvalues();
    let top = top_product_sum(a, a, rho.dim());
    clamp_gain((top / a[0]).log2())
}

/// Maximum of 2^measure on subsystem A over all global unitaries on
/// rho_a (x) eta_b: d_A times the sum of the d_B largest eigenvalues of
/// the joint product state. Lies in [1, d_A].
pub fn max_relocation(rho_a: &DensityMatrix, eta_b: &DensityMatrix) -> f64 {
    let top = top_product_sum(rho_a.eigenvalues(), eta_b.eigenvalues(), eta_b.dim());
    rho_a.dim() as f64 * top
}

/// A unitary attaining [`max_relocation`].
///
/// The top d_B eigenvectors of rho_a (x) eta_b are rotated onto the
/// |0, n> row of the product basis; the map is completed to a unitary by
/// Gram-Schmidt over the remaining standard basis vectors in index order.
/// Eigenvalue ties follow the deterministic product-level order, and for
/// diagonal states in sorted order the result is an exact permutation.
pub fn optimal_unitary(rho_a: &DensityMatrix, eta_b: &DensityMatrix) -> Result<UnitaryMatrix> {
    let da = rho_a.dim();
    let db = eta_b.dim();
    let n = da * db;
    let levels = ordered_products(rho_a.eigenvalues(), eta_b.eigenvalues());
    let sa = rho_a.spectrum();
    let sb = eta_b.spectrum();
    let seeds: Vec<Vec<C64>> = levels[..db]
        .iter()
        .map(|l| kron_vec(&sa.eigenvector(l.i), &sb.eigenvector(l.j)))
        .collect();
    let basis = orthonormal_completion(&seeds, n);
    // Input basis[k] maps to output |k>; for k < d_B that is the |0, k>
    // row, the rest fills the remaining slots in index order. Hence U has
    // the conjugated input vectors as rows.
    let u = ComplexMatrix::from_fn(n, n, |r, c| basis[r][c].conj());
    UnitaryMatrix::new(u)
}

/// Marginals of U (joint) U^dag without the full evolution report.
pub fn evolve_marginals(
    joint: &BipartiteState,
    u: &UnitaryMatrix,
) -> Result<(DensityMatrix, DensityMatrix)> {
    let n = joint.dim_a() * joint.dim_b();
    if u.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: u.dim(),
        });
    }
    let evolved = joint.matrix().conjugate_by(u.matrix());
    let a = DensityMatrix::new(evolved.partial_trace(
        joint.dim_a(),
        joint.dim_b(),
        crate::linalg::Subsystem::A,
    )?)?;
    let b = DensityMatrix::new(evolved.partial_trace(
        joint.dim_a(),
        joint.dim_b(),
        crate::linalg::Subsystem::B,
    )?)?;
    Ok((a, b))
}

/// Full record of one joint evolution.
#[derive(Clone, Debug)]
pub struct ConcentrationReport {
    /// Achieved measure gain on A: `p_after - p_before`. Equals the
    /// analytic optimum when the unitary is optimal.
    pub delta_p: f64,
    /// Measure of the A marginal before evolution.
    pub p_before: f64,
    /// Measure of the A marginal after evolution.
    pub p_after: f64,
    pub unitary: UnitaryMatrix,
    pub sigma_a: DensityMatrix,
    pub sigma_b: DensityMatrix,
    pub sigma_ab: BipartiteState,
    /// Mutual information of the evolved joint state.
    pub mutual_information: f64,
}

/// Applies `u` to the joint state and reports the evolved state, its
/// marginals, the measure gain on A and the output mutual information.
pub fn evolve_and_trace(joint: &BipartiteState, u: &UnitaryMatrix) -> Result<ConcentrationReport> {
    let n = joint.dim_a() * joint.dim_b();
    if u.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: u.dim(),
        });
    }
    let evolved = joint.matrix().conjugate_by(u.matrix());
    let sigma_ab = BipartiteState::new(joint.dim_a(), joint.dim_b(), evolved)?;
    let sigma_a = sigma_ab.marginal_a()?;
    let sigma_b = sigma_ab.marginal_b()?;
    let rho_a = joint.marginal_a()?;
    let p_before = noneq_measure(&rho_a);
    let p_after = noneq_measure(&sigma_a);
    let correlation = correlations::mutual_information(&sigma_ab)?;
    Ok(ConcentrationReport {
        delta_p: p_after - p_before,
        p_before,
        p_after,
        unitary: u.clone(),
        sigma_a,
        sigma_b,
        sigma_ab,
        mutual_information: correlation.mutual_information,
    })
}

/// The explicit two-level concentration unitary: swaps the product basis
/// states |1, 0> and |0, 2> and leaves everything else alone. Needs
/// d >= 3 because level 2 of the ancilla must exist.
///
/// On sorted diagonal qutrit pairs this single swap already attains the
/// optimum.
pub fn simple_unitary(d: usize) -> Result<UnitaryMatrix> {
    if d < 3 {
        return Err(Error::DimensionTooSmall { dim: d, min: 3 });
    }
    let n = d * d;
    let mut perm: Vec<usize> = (0..n).collect();
    perm.swap(d, 2);
    UnitaryMatrix::from_permutation(&perm)
}

/// Closed-form qutrit gain log2(a0 + 2 a1) for a descending spectrum
/// (a0, a1, a2).
pub fn qutrit_delta_p(spectrum: &Spectrum) -> Result<f64> {
    if spectrum.dim() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            got: spectrum.dim(),
        });
    }
    let a = spectrum.eigenvalues();
    Ok(clamp_gain((a[0] + 2.0 * a[1]).log2()))
}

/// Whether `rho` is a bound state: informationally non-equilibrium (not
/// maximally mixed), not pure, yet with no concentrable gain above
/// `tolerance`.
pub fn is_bound(rho: &DensityMatrix, tolerance: f64) -> bool {
    let a0 = rho.max_eigenvalue();
    let pure = 1.0 - a0 <= tolerance;
    let mixed = a0 - 1.0 / rho.dim() as f64 <= tolerance;
    !pure && !mixed && delta_p(rho) <= tolerance
}
